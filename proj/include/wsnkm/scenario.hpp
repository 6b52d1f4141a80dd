#pragma once

// Line-oriented scenario files:
//
//   seed = 42
//   topology = topo.txt
//   noise = noise.txt
//   until = 20s
//   [nodes]
//   1 boot=100001
//   4 boot=0 isolated
//   [protocol]
//   tmin = 5s
//   [radio]
//   snr_threshold = lossless
//   [adversary]
//   adversary: compromise node=2 at=6s
//
// Times accept a us/ms/s suffix; bare numbers are ticks (microseconds).

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wsnkm/adversary.hpp"
#include "wsnkm/simulator.hpp"

namespace wsnkm {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct NodeSpec {
  NodeId id;
  Ticks boot = 0;
  bool isolated = false;
};

struct Scenario {
  std::filesystem::path topology_path;
  std::filesystem::path noise_path;
  std::vector<NodeSpec> nodes;
  std::vector<AdversaryAction> actions;
  SimConfig sim;
  std::optional<Ticks> until;

  Ticks effective_until() const;
};

// Relative paths resolve against the directory of `source`.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

// Loads topology and noise, checks that every node and adversary reference is
// known, and builds a ready-to-run simulator. Throws ScenarioError, ParseError,
// TooShort or IoError.
std::unique_ptr<Simulator> build_simulator(const Scenario& scenario);

}  // namespace wsnkm
