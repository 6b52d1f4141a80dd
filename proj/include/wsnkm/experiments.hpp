#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsnkm/metrics.hpp"
#include "wsnkm/simulator.hpp"

namespace wsnkm {

// A generated deployment: topology, boot times and attacks.
struct NetworkRun {
  Topology topology;
  NoiseTrace noise = reference_noise_trace();
  SimConfig config;
  std::vector<std::pair<NodeId, Ticks>> boots;
  std::vector<AdversaryAction> actions;
  Ticks until = 0;
};

// Every topology node boots at a seeded-uniform time in [0, boot_spread]; the
// run lasts until the last erasure plus `tail`.
NetworkRun generated_run(Topology topology, const SimConfig& config, Ticks boot_spread = 100'000,
                         Ticks tail = 3 * kTicksPerSecond);

std::unique_ptr<Simulator> simulate(const NetworkRun& run);

// Detection trial: random connected topology of `n` nodes, one node compromised
// one tick after one of its periodic checks, past its erasure deadline.
NetworkRun detection_run(std::size_t n, const SimConfig& config, std::uint64_t seed);

enum class Experiment { PairwiseTime, IndividualTime, Scalability, Energy, Detection };
std::optional<Experiment> experiment_from_string(std::string_view name);
std::string_view to_string(Experiment e);

// Lossless radio: sweeps measure protocol cost, not link quality.
SimConfig sweep_defaults();

struct SweepParams {
  SimConfig base = sweep_defaults();  // seed acts as the base seed
  std::vector<std::size_t> step_grid{2, 5, 10};  // pairwise_time: one sweep per step
  std::size_t steps = 10;    // grid points per pairwise_time sweep
  std::size_t reps = 10;
  std::size_t degree = 6;    // scalability / energy topologies
  std::size_t detection_n = 20;
  std::vector<double> p_detect_grid{0.25, 0.5, 0.75, 1.0};
  std::vector<Ticks> tp_grid{500'000, 1'000'000, 2'000'000};
  std::size_t jobs = 1;
  ExportFormat format = ExportFormat::Csv;
};

struct SweepFile {
  std::string name;  // file name, e.g. "scalability.csv"
  std::string content;
};

// Runs are independent; with jobs > 1 they execute on worker threads. Rows are
// always ordered by (N, seed).
std::vector<SweepFile> run_sweep(Experiment e, const SweepParams& params);

// Grids used by each experiment.
std::vector<std::size_t> pairwise_time_grid(std::size_t step, std::size_t steps);
std::vector<std::size_t> scalability_grid();

inline constexpr std::string_view kIndividualCsvHeader = "n,seed,node,individual_us";
inline constexpr std::string_view kDetectionCsvHeader =
    "p_detect,tp_us,seed,detect_latency_us,revocation_latency_us,coverage,residual_pairs";

// Plot-ready summaries of every result file in `dir`. Empty when the directory
// holds no result files.
struct ReportOutput {
  std::string summary;
  std::map<std::string, std::string> plot_files;
};
std::optional<ReportOutput> build_report(const std::filesystem::path& dir);

}  // namespace wsnkm
