#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wsnkm/types.hpp"

namespace wsnkm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Abstract energy units per octet or per operation. Model parameters, not
// hardware measurements.
struct EnergyCosts {
  double tx_per_octet = 2.0;
  double rx_per_octet = 1.0;
  double mac = 5.0;
  double prf = 5.0;
  double enc = 3.0;
};

struct NodeCounters {
  std::uint64_t tx_octets = 0;
  std::uint64_t rx_octets = 0;
  std::uint64_t mac_ops = 0;
  std::uint64_t prf_ops = 0;
  std::uint64_t enc_ops = 0;
  std::uint64_t frames_tx = 0;
  std::uint64_t frames_rx = 0;

  double energy(const EnergyCosts& c) const {
    return static_cast<double>(tx_octets) * c.tx_per_octet + static_cast<double>(rx_octets) * c.rx_per_octet +
           static_cast<double>(mac_ops) * c.mac + static_cast<double>(prf_ops) * c.prf +
           static_cast<double>(enc_ops) * c.enc;
  }
};

enum class LedgerKind { Tx, Rx, Mac, Prf, Enc, Unknown };

// "tx", "rx", "mac", "verify", "prf", "enc", "dec"; anything else is Unknown.
LedgerKind ledger_kind_from_string(std::string_view name);

struct LedgerEvent {
  NodeId node;
  LedgerKind kind = LedgerKind::Unknown;
  std::size_t octets = 0;
};

class EnergyLedger {
 public:
  explicit EnergyLedger(EnergyCosts costs = {}) : costs_(costs) {}

  void record(const LedgerEvent& ev);

  const NodeCounters& counters(NodeId node) const;
  const std::map<NodeId, NodeCounters>& all() const { return nodes_; }
  double energy(NodeId node) const { return counters(node).energy(costs_); }
  double total_energy() const;
  std::uint64_t total_tx_octets() const;
  std::uint64_t total_rx_octets() const;
  std::uint64_t max_frames_received() const;
  std::uint64_t warnings() const { return warnings_; }
  const EnergyCosts& costs() const { return costs_; }

 private:
  EnergyCosts costs_;
  std::map<NodeId, NodeCounters> nodes_;
  std::uint64_t warnings_ = 0;
};

struct ExperimentResult {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double success_rate = 0.0;
  double mean_pairwise_us = 0.0;
  std::uint64_t max_msgs = 0;
  double energy_units = 0.0;

  // Not exported; per-node detail behind the figure analogs.
  std::map<NodeId, Ticks> pairwise_completion_us;
  std::map<NodeId, Ticks> individual_key_us;
};

enum class ExportFormat { Csv, Json };

inline constexpr std::string_view kResultCsvHeader = "n,seed,success_rate,mean_pairwise_us,max_msgs,energy_units";

// Throws std::invalid_argument on empty input.
std::string to_csv(const std::vector<ExperimentResult>& results);
std::string to_json(const std::vector<ExperimentResult>& results);
std::vector<ExperimentResult> results_from_csv(std::string_view text);
std::vector<ExperimentResult> results_from_json(std::string_view text);

// Throws std::invalid_argument on empty results and IoError when the file cannot be written.
void export_results(const std::vector<ExperimentResult>& results, ExportFormat format,
                    const std::filesystem::path& path);

}  // namespace wsnkm
