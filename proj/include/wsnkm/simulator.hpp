#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wsnkm/adversary.hpp"
#include "wsnkm/base_station.hpp"
#include "wsnkm/event_queue.hpp"
#include "wsnkm/metrics.hpp"
#include "wsnkm/node.hpp"
#include "wsnkm/radio.hpp"

namespace wsnkm {

class PastTime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoSuchNode : public std::runtime_error {
 public:
  explicit NoSuchNode(NodeId id) : std::runtime_error("no node " + std::to_string(id.value)) {}
};

struct SimConfig {
  RadioConfig radio;
  ProtocolConfig protocol;
  EnergyCosts energy;
  Ticks bs_latency = 2000;
  std::size_t chain_length = 20;
  std::uint64_t seed = 1;
  // Emit a `keystore` trace line per node at every periodic check and at the end of run().
  bool dump_keystores = false;
};

enum class EventKind { Boot, Deliver, Timer, Adversary, Inject };

struct SimEvent {
  EventKind kind = EventKind::Boot;
  NodeId target;
  NodeId transmitter;
  TimerKind timer = TimerKind::Hello;
  std::size_t action = 0;
  Bytes frame;
};

// Octets put on the air, as seen by an eavesdropper.
struct AirFrame {
  Ticks at = 0;
  NodeId transmitter;
  Bytes frame;
};

struct InvariantCounters {
  std::uint64_t erasure_violations = 0;
  std::uint64_t causality_violations = 0;
  std::uint64_t installs_without_verify = 0;
};

class Simulator final : private Env {
 public:
  Simulator(Topology topology, NoiseTrace noise, SimConfig config);

  // Preloads a node; its boot is scheduled at `boot_at`.
  void add_node(NodeId id, Ticks boot_at);
  void add_action(const AdversaryAction& action);

  // Handler of `target` runs at `at` exactly as if the frame arrived by radio.
  void inject(const Packet& pkt, NodeId target, Ticks at);
  void inject_frame(Bytes frame, NodeId target, Ticks at);

  // Processes events with time <= until, at most `max_events` of them.
  // Returns the number of events processed.
  std::size_t run(Ticks until, std::size_t max_events = ~std::size_t{0});

  Ticks now() const override { return now_; }
  const std::vector<std::string>& trace() const { return trace_; }
  std::string trace_text() const;

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const;
  // Available once run() has been called.
  const BaseStation& base_station() const {
    if (!bs_) throw std::logic_error("base station exists after the first run()");
    return *bs_;
  }
  const EnergyLedger& ledger() const { return ledger_; }
  const RadioModel& radio() const { return radio_; }
  const SimConfig& config() const { return config_; }
  const Provisioning& provisioning() const { return provisioning_; }
  const std::vector<CompromiseRecord>& compromises() const { return compromises_; }
  const std::vector<AirFrame>& air_log() const { return air_log_; }
  // Time each node revoked each victim: (holder, victim) -> tick.
  const std::map<std::pair<NodeId, NodeId>, Ticks>& revocations() const { return revocations_; }

  InvariantCounters invariants() const;
  std::set<NodeId> node_ids() const;
  // Live keys of every node except those in `exclude`.
  NetworkKeys network_keys(const std::set<NodeId>& exclude = {}) const;
  // Pairs adjacent in the topology (both deployed) holding octet-identical keys for each other.
  std::size_t agreeing_adjacent_pairs() const;
  std::size_t adjacent_pairs() const;
  // Pairs where both ends hold a key for each other but the keys differ.
  std::size_t disagreeing_pairs() const;
  // Pairwise keys any node holds for `id`.
  std::size_t installs_for(NodeId id) const;

  DetectionReport evaluate_detection(const CompromiseRecord& record) const;
  std::vector<DetectionReport> evaluate_detection() const;

 private:
  // Env
  void transmit(NodeId from, const Packet& pkt, Ticks delay) override;
  void set_timer(NodeId node, TimerKind kind, Ticks at) override;
  void trace(NodeId node, std::string_view ev, std::string_view detail) override;
  void trace_line(std::string line) override;
  void account(const LedgerEvent& ev) override { ledger_.record(ev); }
  std::mt19937_64& rng() override { return rng_; }

  void schedule(Ticks at, SimEvent ev);
  void dispatch(const SimEvent& ev);
  void deliver_frame(NodeId receiver, const Bytes& frame);
  void radio_send(NodeId transmitter, const Bytes& frame, NodeId dst, Ticks at);
  void execute(const AdversaryAction& a);
  void check_erasure(const Node& n);
  void dump_keystore(const Node& n);
  Bytes apply_alters(NodeId src, NodeId dst, Ticks at, Bytes frame) const;

  SimConfig config_;
  RadioModel radio_;
  std::mt19937_64 rng_;
  Provisioning provisioning_;
  std::unique_ptr<BaseStation> bs_;
  std::map<NodeId, Node> nodes_;
  std::vector<AdversaryAction> actions_;
  std::vector<CompromiseRecord> compromises_;
  std::vector<AirFrame> air_log_;
  std::map<std::pair<NodeId, NodeId>, Ticks> revocations_;
  EventQueue<SimEvent> queue_;
  std::vector<std::string> trace_;
  EnergyLedger ledger_;
  Ticks now_ = 0;
  std::uint64_t erasure_violations_ = 0;
  std::uint64_t causality_violations_ = 0;
};

// Row for the experiment tables, computed from a finished run.
ExperimentResult summarize(const Simulator& sim);

}  // namespace wsnkm
