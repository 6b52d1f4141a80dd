// wsnkm_cli: run scenarios, sweep experiments, summarize results.
//
// Exit codes: 0 success, 1 invariant or validation failure, 2 usage or configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wsnkm/experiments.hpp"
#include "wsnkm/scenario.hpp"

namespace {

using namespace wsnkm;

constexpr int kOk = 0;
constexpr int kInvariant = 1;
constexpr int kUsage = 2;

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> until;
  std::optional<std::string> snr_threshold;
  std::optional<std::string> tmin;
  std::optional<std::string> tp;
  std::optional<double> p_detect;
  bool check = false;
  bool dump_keystores = false;
  std::string out = "out";
  std::string format = "csv";
};

struct SweepOptions {
  std::string experiment;
  std::uint64_t seed = 1;
  std::size_t reps = 10;
  std::size_t jobs = 1;
  std::string out = "out";
  std::string format = "csv";
  std::optional<std::size_t> step;
  std::optional<std::string> tmin;
  std::optional<std::string> tp;
  std::optional<std::string> snr_threshold;
};

double snr_or_throw(const std::string& text) {
  if (text == "lossless") return RadioConfig::kLossless;
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("bad value for --snr-threshold: " + text);
  return v;
}

Ticks duration_or_throw(const std::string& text, const char* flag) {
  auto d = parse_duration(text);
  if (!d) throw std::invalid_argument(std::string("bad duration for ") + flag + ": " + text);
  return *d;
}

ExportFormat format_or_throw(const std::string& f) {
  if (f == "csv") return ExportFormat::Csv;
  if (f == "json") return ExportFormat::Json;
  throw std::invalid_argument("unknown format " + f);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  if (!f) throw IoError("cannot write " + path.string());
}

int cmd_run(const RunOptions& o) {
  std::unique_ptr<Simulator> sim;
  Ticks until = 0;
  ExportFormat format{};
  bool attack_free = false;
  try {
    format = format_or_throw(o.format);
    Scenario sc = load_scenario(o.scenario);
    if (o.seed) sc.sim.seed = *o.seed;
    if (o.until) sc.until = duration_or_throw(*o.until, "--until");
    if (o.snr_threshold)
      sc.sim.radio.snr_threshold_db = snr_or_throw(*o.snr_threshold);
    if (o.tmin) sc.sim.protocol.tmin = duration_or_throw(*o.tmin, "--tmin");
    if (o.tp) sc.sim.protocol.tp = duration_or_throw(*o.tp, "--tp");
    if (o.p_detect) sc.sim.protocol.p_detect = *o.p_detect;
    if (o.dump_keystores) sc.sim.dump_keystores = true;
    sc.sim.protocol.validate();
    attack_free = sc.actions.empty();
    until = sc.effective_until();
    sim = build_simulator(sc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  sim->run(until);
  const ExperimentResult result = summarize(*sim);

  try {
    std::filesystem::create_directories(o.out);
    write_file(std::filesystem::path(o.out) / "trace.txt", sim->trace_text());
    export_results({result}, format, std::filesystem::path(o.out) / (format == ExportFormat::Csv ? "results.csv" : "results.json"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::cout << "nodes=" << result.n << " success_rate=" << result.success_rate << " max_msgs=" << result.max_msgs
            << " energy_units=" << result.energy_units << '\n';
  if (!o.check) return kOk;

  int status = kOk;
  auto fail = [&](const std::string& what) {
    std::cerr << "check failed: " << what << '\n';
    status = kInvariant;
  };
  const auto inv = sim->invariants();
  if (inv.installs_without_verify) fail("installs_without_verify=" + std::to_string(inv.installs_without_verify));
  if (inv.erasure_violations) fail("erasure_violations=" + std::to_string(inv.erasure_violations));
  if (inv.causality_violations) fail("causality_violations=" + std::to_string(inv.causality_violations));
  if (auto d = sim->disagreeing_pairs()) fail("disagreeing_pairs=" + std::to_string(d));
  if (attack_free && result.success_rate != 1.0) fail("success_rate=" + std::to_string(result.success_rate));
  if (status == kOk) std::cout << "check ok\n";
  return status;
}

int cmd_sweep(const SweepOptions& o) {
  SweepParams p;
  Experiment e{};
  try {
    auto parsed = experiment_from_string(o.experiment);
    if (!parsed) throw std::invalid_argument("unknown experiment " + o.experiment);
    e = *parsed;
    p.format = format_or_throw(o.format);
    p.base.seed = o.seed;
    p.reps = o.reps;
    p.jobs = o.jobs;
    if (o.step) p.step_grid = {*o.step};
    if (o.tmin) p.base.protocol.tmin = duration_or_throw(*o.tmin, "--tmin");
    if (o.tp) p.base.protocol.tp = duration_or_throw(*o.tp, "--tp");
    if (o.tp) p.tp_grid = {p.base.protocol.tp};
    if (o.snr_threshold) p.base.radio.snr_threshold_db = snr_or_throw(*o.snr_threshold);
    p.base.protocol.validate();
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  }

  const auto files = run_sweep(e, p);
  try {
    std::filesystem::create_directories(o.out);
    for (const auto& f : files) {
      write_file(std::filesystem::path(o.out) / f.name, f.content);
      std::cout << "wrote " << (std::filesystem::path(o.out) / f.name).string() << '\n';
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  }
  return kOk;
}

int cmd_report(const std::string& dir) {
  if (!std::filesystem::is_directory(dir)) {
    std::cerr << "error: cannot read " << dir << '\n';
    return kUsage;
  }
  std::optional<ReportOutput> report;
  try {
    report = build_report(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (!report) {
    std::cout << "no results\n";
    return kInvariant;
  }
  std::cout << report->summary;
  try {
    for (const auto& [name, content] : report->plot_files) {
      write_file(std::filesystem::path(dir) / name, content);
      std::cout << "plot data: " << (std::filesystem::path(dir) / name).string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WSN key-management simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write trace and results");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--until", run.until, "Stop time (us, ms or s suffix)");
  run_cmd->add_option("--snr-threshold", run.snr_threshold, "Delivery threshold in dB, or 'lossless'");
  run_cmd->add_option("--tmin", run.tmin, "Erasure deadline after boot");
  run_cmd->add_option("--tp", run.tp, "Periodic check interval");
  run_cmd->add_option("--p-detect", run.p_detect, "Tamper detection probability per check");
  run_cmd->add_flag("--check", run.check, "Exit 1 if any invariant fails");
  run_cmd->add_flag("--dump-keystores", run.dump_keystores, "Trace keystore contents at every check");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--format", run.format, "csv or json");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid");
  sweep_cmd->add_option("experiment", sweep.experiment, "pairwise_time, individual_time, scalability, energy, detection")
      ->required();
  sweep_cmd->add_option("--seed", sweep.seed, "Base seed");
  sweep_cmd->add_option("--reps", sweep.reps, "Repetitions per grid point");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads");
  sweep_cmd->add_option("--step", sweep.step, "Single pairwise_time grid step");
  sweep_cmd->add_option("--tmin", sweep.tmin, "Erasure deadline after boot");
  sweep_cmd->add_option("--tp", sweep.tp, "Periodic check interval");
  sweep_cmd->add_option("--snr-threshold", sweep.snr_threshold, "Delivery threshold in dB, or 'lossless' (default)");
  sweep_cmd->add_option("--out", sweep.out, "Output directory");
  sweep_cmd->add_option("--format", sweep.format, "csv or json");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Summarize result files and write plot data");
  report_cmd->add_option("dir", report_dir, "Directory with result files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*run_cmd) return cmd_run(run);
  if (*sweep_cmd) return cmd_sweep(sweep);
  if (*report_cmd) return cmd_report(report_dir);
  return kUsage;
}
