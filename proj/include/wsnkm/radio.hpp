#pragma once

// Topology and noise-trace ingestion plus the threshold-SNR link model.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsnkm/types.hpp"

namespace wsnkm {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TooShort : public std::runtime_error {
 public:
  explicit TooShort(std::size_t samples)
      : std::runtime_error("noise trace has " + std::to_string(samples) + " samples, need at least 100"),
        samples_(samples) {}
  std::size_t samples() const { return samples_; }

 private:
  std::size_t samples_;
};

struct LinkGain {
  NodeId src;
  NodeId dst;
  double gain_dbm = 0.0;
  bool operator==(const LinkGain&) const = default;
};

// Directed gains. Absence of an entry means no link.
class Topology {
 public:
  void add(const LinkGain& link) { gains_[{link.src, link.dst}] = link.gain_dbm; }
  std::optional<double> gain(NodeId src, NodeId dst) const;
  std::vector<LinkGain> links() const;
  std::vector<std::pair<NodeId, double>> out_links(NodeId src) const;
  std::set<NodeId> nodes() const;
  // Unordered pairs (lo, hi) with a link in both directions.
  std::vector<std::pair<NodeId, NodeId>> adjacent_pairs() const;
  std::set<NodeId> neighbors(NodeId id) const;
  std::size_t size() const { return gains_.size(); }
  std::string to_text() const;

 private:
  std::map<std::pair<NodeId, NodeId>, double> gains_;
};

// Lines are `src dst gain` or `gain src dst g`; a decimal comma is accepted.
// Duplicate (src, dst) lines: the last one wins.
Topology load_topology(std::string_view text);

struct NoiseTrace {
  static constexpr std::size_t kMinSamples = 100;
  std::vector<int> samples;
  int at(std::size_t i) const { return samples[i % samples.size()]; }
};

// One integer dBm reading per nonempty line, at least 100 of them.
NoiseTrace load_noise(std::string_view text);

// Ten heavy-noise readings cycled to the 100-sample minimum. Default trace for
// generated scenarios.
NoiseTrace reference_noise_trace();

struct RadioConfig {
  double snr_threshold_db = 4.0;
  Ticks propagation_ticks = 10;
  Ticks serialization_ticks_per_octet = 32;
  Ticks noise_sample_ticks = 1000;

  static constexpr double kLossless = -std::numeric_limits<double>::infinity();
};

class RadioModel {
 public:
  RadioModel(Topology topology, NoiseTrace noise, RadioConfig config, std::uint64_t seed);

  const Topology& topology() const { return topology_; }
  const RadioConfig& config() const { return config_; }

  // Noise heard by `receiver` at `now`: seeded per-receiver offset plus tick position.
  int noise_sample(NodeId receiver, Ticks now) const;
  // gain - noise >= threshold. False when the link does not exist.
  bool delivered(NodeId src, NodeId dst, Ticks now) const;
  bool delivered_with_gain(double gain_dbm, NodeId dst, Ticks now) const;
  Ticks latency(std::size_t frame_octets) const {
    return config_.propagation_ticks + config_.serialization_ticks_per_octet * frame_octets;
  }

 private:
  Topology topology_;
  NoiseTrace noise_;
  RadioConfig config_;
  std::uint64_t seed_;
};

// Generators for sweeps.
// Random geometric graph on the unit square, redrawn until connected.
Topology random_connected_topology(std::size_t n, std::uint64_t seed, double mean_degree = 8.0);
// Circulant graph: every node linked to degree/2 neighbours on each side of a ring.
Topology ring_lattice_topology(std::size_t n, std::size_t degree);

}  // namespace wsnkm
