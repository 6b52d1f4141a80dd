#include "wsnkm/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace wsnkm {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string opt(const std::optional<Ticks>& v) { return v ? std::to_string(*v) : std::string{}; }

// Runs `count` independent jobs, possibly on several threads. Results keep job order.
template <typename T>
std::vector<T> run_jobs(std::size_t count, std::size_t threads, const std::function<T(std::size_t)>& job) {
  std::vector<T> out(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = job(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < count; i = next++) out[i] = job(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t n, std::size_t rep) {
  return base * 1'000'003ULL + n * 1'009ULL + rep;
}

struct Cell {
  std::size_t n;
  std::uint64_t seed;
};

std::vector<ExperimentResult> run_cells(const std::vector<Cell>& cells, const SweepParams& p,
                                        const std::function<Topology(const Cell&)>& topo) {
  return run_jobs<ExperimentResult>(cells.size(), p.jobs, [&](std::size_t i) {
    SimConfig cfg = p.base;
    cfg.seed = cells[i].seed;
    auto sim = simulate(generated_run(topo(cells[i]), cfg));
    return summarize(*sim);
  });
}

std::string encode(const std::vector<ExperimentResult>& rows, ExportFormat f) {
  return f == ExportFormat::Csv ? to_csv(rows) : to_json(rows);
}

std::string extension(ExportFormat f) { return f == ExportFormat::Csv ? ".csv" : ".json"; }

std::vector<std::vector<std::string>> csv_rows(std::string_view text, std::string& header) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is{std::string(text)};
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      header = line;
      first = false;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    rows.push_back(std::move(cols));
  }
  return rows;
}

double num(const std::string& s) {
  double v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

struct Mean {
  double sum = 0;
  std::size_t count = 0;
  void add(double v) {
    sum += v;
    ++count;
  }
  double value() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

std::string result_plot(const std::vector<ExperimentResult>& rows) {
  std::map<std::size_t, std::array<Mean, 4>> by_n;
  for (const auto& r : rows) {
    auto& m = by_n[r.n];
    m[0].add(r.success_rate);
    m[1].add(r.mean_pairwise_us);
    m[2].add(static_cast<double>(r.max_msgs));
    m[3].add(r.energy_units);
  }
  std::ostringstream os;
  os << "# n success_rate mean_pairwise_us max_msgs energy_units\n";
  for (const auto& [n, m] : by_n)
    os << n << ' ' << fmt(m[0].value()) << ' ' << fmt(m[1].value()) << ' ' << fmt(m[2].value()) << ' '
       << fmt(m[3].value()) << '\n';
  return os.str();
}

}  // namespace

SimConfig sweep_defaults() {
  SimConfig c;
  c.radio.snr_threshold_db = RadioConfig::kLossless;
  return c;
}

NetworkRun generated_run(Topology topology, const SimConfig& config, Ticks boot_spread, Ticks tail) {
  NetworkRun run;
  run.config = config;
  std::mt19937_64 rng(config.seed ^ 0x6a09e667f3bcc909ULL);
  std::uniform_int_distribution<Ticks> boot(0, boot_spread);
  Ticks last = 0;
  for (auto id : topology.nodes()) {
    if (id == kBaseStation) continue;
    const Ticks at = boot(rng);
    last = std::max(last, at);
    run.boots.emplace_back(id, at);
  }
  run.until = last + config.protocol.tmin + tail;
  run.topology = std::move(topology);
  return run;
}

std::unique_ptr<Simulator> simulate(const NetworkRun& run) {
  auto sim = std::make_unique<Simulator>(run.topology, run.noise, run.config);
  for (const auto& [id, at] : run.boots) sim->add_node(id, at);
  for (const auto& a : run.actions) sim->add_action(a);
  sim->run(run.until);
  return sim;
}

NetworkRun detection_run(std::size_t n, const SimConfig& config, std::uint64_t seed) {
  SimConfig cfg = config;
  cfg.seed = seed;
  NetworkRun run = generated_run(random_connected_topology(n, seed), cfg);
  std::mt19937_64 rng(seed ^ 0xbb67ae8584caa73bULL);
  const auto& [victim, boot] = run.boots[std::uniform_int_distribution<std::size_t>(0, run.boots.size() - 1)(rng)];
  const Ticks tp = cfg.protocol.tp;
  const Ticks checks_before = cfg.protocol.tmin / tp + 1;
  AdversaryAction a;
  a.kind = AttackKind::Compromise;
  a.node = victim;
  a.at = boot + checks_before * tp + 1;
  run.actions.push_back(a);
  // Long enough that an undetected compromise is vanishingly rare for p_detect >= 0.25.
  run.until = std::max(run.until, a.at + 80 * tp + 4 * cfg.bs_latency + cfg.protocol.tmin);
  return run;
}

std::optional<Experiment> experiment_from_string(std::string_view name) {
  if (name == "pairwise_time") return Experiment::PairwiseTime;
  if (name == "individual_time") return Experiment::IndividualTime;
  if (name == "scalability") return Experiment::Scalability;
  if (name == "energy") return Experiment::Energy;
  if (name == "detection") return Experiment::Detection;
  return std::nullopt;
}

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::PairwiseTime: return "pairwise_time";
    case Experiment::IndividualTime: return "individual_time";
    case Experiment::Scalability: return "scalability";
    case Experiment::Energy: return "energy";
    case Experiment::Detection: return "detection";
  }
  return "?";
}

std::vector<std::size_t> pairwise_time_grid(std::size_t step, std::size_t steps) {
  std::vector<std::size_t> grid;
  for (std::size_t k = 1; k <= steps; ++k) grid.push_back(step * k);
  return grid;
}

std::vector<std::size_t> scalability_grid() {
  std::vector<std::size_t> grid;
  for (std::size_t n = 10; n <= 100; n += 10) grid.push_back(n);
  return grid;
}

std::vector<SweepFile> run_sweep(Experiment e, const SweepParams& p) {
  const std::uint64_t base = p.base.seed;
  std::vector<SweepFile> files;

  auto cells_for = [&](const std::vector<std::size_t>& grid) {
    std::vector<Cell> cells;
    for (auto n : grid)
      for (std::size_t r = 0; r < p.reps; ++r) cells.push_back({n, run_seed(base, n, r)});
    return cells;
  };
  auto random_topo = [](const Cell& c) { return random_connected_topology(c.n, c.seed); };
  auto lattice_topo = [&](const Cell& c) { return ring_lattice_topology(c.n, p.degree); };

  switch (e) {
    case Experiment::PairwiseTime: {
      for (std::size_t step : p.step_grid) {
        std::vector<std::size_t> grid;
        for (auto n : pairwise_time_grid(step, p.steps))
          if (n >= 2) grid.push_back(n);
        auto rows = run_cells(cells_for(grid), p, random_topo);
        files.push_back({"pairwise_time_step" + std::to_string(step) + extension(p.format), encode(rows, p.format)});
      }
      break;
    }
    case Experiment::IndividualTime: {
      const auto cells = cells_for({10, 20});
      auto rows = run_cells(cells, p, random_topo);
      std::ostringstream os;
      os << kIndividualCsvHeader << '\n';
      for (const auto& r : rows)
        for (const auto& [node, t] : r.individual_key_us) os << r.n << ',' << r.seed << ',' << node << ',' << t << '\n';
      files.push_back({"individual_time.csv", os.str()});
      break;
    }
    case Experiment::Scalability:
    case Experiment::Energy: {
      auto rows = run_cells(cells_for(scalability_grid()), p, lattice_topo);
      files.push_back({std::string(to_string(e)) + extension(p.format), encode(rows, p.format)});
      break;
    }
    case Experiment::Detection: {
      struct Trial {
        double p_detect;
        Ticks tp;
        std::uint64_t seed;
      };
      std::vector<Trial> trials;
      for (double pd : p.p_detect_grid)
        for (Ticks tp : p.tp_grid)
          for (std::size_t r = 0; r < p.reps; ++r) trials.push_back({pd, tp, run_seed(base, p.detection_n, r)});
      auto reports = run_jobs<DetectionReport>(trials.size(), p.jobs, [&](std::size_t i) {
        SimConfig cfg = p.base;
        cfg.protocol.p_detect = trials[i].p_detect;
        cfg.protocol.tp = trials[i].tp;
        auto sim = simulate(detection_run(p.detection_n, cfg, trials[i].seed));
        return sim->evaluate_detection().at(0);
      });
      std::ostringstream os;
      os << kDetectionCsvHeader << '\n';
      for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& r = reports[i];
        os << fmt(trials[i].p_detect) << ',' << trials[i].tp << ',' << trials[i].seed << ',' << opt(r.detect_latency)
           << ',' << opt(r.revocation_latency) << ',' << fmt(r.coverage) << ',' << r.residual_pairs.size() << '\n';
      }
      files.push_back({"detection.csv", os.str()});
      break;
    }
  }
  return files;
}

std::optional<ReportOutput> build_report(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) return std::nullopt;
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".json")) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());

  ReportOutput out;
  std::ostringstream summary;
  auto table = [&](const std::string& stem) {
    std::istringstream is(out.plot_files[stem + ".dat"]);
    for (std::string line; std::getline(is, line);) summary << "  " << line << '\n';
  };
  for (const auto& path : paths) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    const std::string text = buf.str();
    const std::string stem = path.stem().string();

    if (path.extension() == ".json") {
      try {
        auto rows = results_from_json(text);
        if (rows.empty()) continue;
        out.plot_files[stem + ".dat"] = result_plot(rows);
        summary << path.filename().string() << ": " << rows.size() << " runs\n";
        table(stem);
      } catch (const std::exception&) {
        continue;
      }
      continue;
    }

    std::string header;
    auto rows = csv_rows(text, header);
    if (rows.empty()) continue;
    if (header == kResultCsvHeader) {
      auto results = results_from_csv(text);
      out.plot_files[stem + ".dat"] = result_plot(results);
      Mean success;
      for (const auto& r : results) success.add(r.success_rate);
      summary << path.filename().string() << ": " << results.size() << " runs, mean success_rate "
              << fmt(success.value()) << '\n';
      table(stem);
    } else if (header == kIndividualCsvHeader) {
      std::map<std::size_t, Mean> by_n;
      for (const auto& r : rows)
        if (r.size() == 4) by_n[static_cast<std::size_t>(num(r[0]))].add(num(r[3]));
      std::ostringstream os;
      os << "# n mean_individual_us\n";
      for (const auto& [n, m] : by_n) os << n << ' ' << fmt(m.value()) << '\n';
      out.plot_files[stem + ".dat"] = os.str();
      summary << path.filename().string() << ": " << rows.size() << " individual-key samples\n";
      table(stem);
    } else if (header == kDetectionCsvHeader) {
      std::map<std::pair<double, double>, std::array<Mean, 2>> cells;
      std::size_t undetected = 0;
      for (const auto& r : rows) {
        if (r.size() < 7) continue;
        auto& m = cells[{num(r[0]), num(r[1])}];
        if (r[3].empty()) ++undetected;
        else m[0].add(num(r[3]));
        if (!r[4].empty()) m[1].add(num(r[4]));
      }
      std::ostringstream os;
      os << "# p_detect tp_us mean_detect_latency_us mean_revocation_latency_us\n";
      for (const auto& [k, m] : cells)
        os << fmt(k.first) << ' ' << static_cast<Ticks>(k.second) << ' ' << fmt(m[0].value()) << ' ' << fmt(m[1].value()) << '\n';
      out.plot_files[stem + ".dat"] = os.str();
      summary << path.filename().string() << ": " << rows.size() << " trials, " << undetected << " undetected\n";
      table(stem);
    }
  }
  if (out.plot_files.empty()) return std::nullopt;
  out.summary = summary.str();
  return out;
}

}  // namespace wsnkm
