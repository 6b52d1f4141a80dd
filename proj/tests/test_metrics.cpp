#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wsnkm/experiments.hpp"
#include "wsnkm/metrics.hpp"

using namespace wsnkm;

namespace {

ExperimentResult row(std::size_t n, std::uint64_t seed) {
  ExperimentResult r;
  r.n = n;
  r.seed = seed;
  r.success_rate = 0.75;
  r.mean_pairwise_us = 123456.25;
  r.max_msgs = 17;
  r.energy_units = 9876.5;
  return r;
}

bool same(const ExperimentResult& a, const ExperimentResult& b) {
  return a.n == b.n && a.seed == b.seed && a.success_rate == b.success_rate &&
         a.mean_pairwise_us == b.mean_pairwise_us && a.max_msgs == b.max_msgs && a.energy_units == b.energy_units;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wsnkm_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("ledger counts one bundle per event kind") {
  EnergyLedger l;
  const NodeId a{1};
  l.record({a, LedgerKind::Tx, 50});
  CHECK(l.energy(a) == 100.0);
  l.record({a, ledger_kind_from_string("verify"), 0});
  CHECK(l.counters(a).mac_ops == 1);
  l.record({a, ledger_kind_from_string("dec"), 0});
  CHECK(l.counters(a).enc_ops == 1);
  l.record({a, ledger_kind_from_string("prf"), 0});
  l.record({a, LedgerKind::Rx, 30});
  CHECK(l.counters(a).rx_octets == 30);
  CHECK(l.counters(a).frames_rx == 1);
  CHECK(l.energy(a) == 100.0 + 5.0 + 3.0 + 5.0 + 30.0);

  l.record({a, ledger_kind_from_string("teleport"), 10});
  CHECK(l.warnings() == 1);
  CHECK(l.energy(a) == 143.0);
  CHECK(l.counters(NodeId{9}).tx_octets == 0);
}

TEST_CASE("energy is linear in the counters") {
  const EnergyCosts c{3.0, 0.5, 7.0, 11.0, 13.0};
  EnergyLedger l(c);
  const NodeId a{4};
  for (int i = 0; i < 10; ++i) {
    const double before = l.energy(a);
    l.record({a, LedgerKind::Tx, 8});
    CHECK(l.energy(a) - before == 24.0);
  }
  l.record({NodeId{5}, LedgerKind::Mac, 0});
  CHECK(l.total_energy() == 240.0 + 7.0);
  CHECK(l.total_tx_octets() == 80);
}

TEST_CASE("CSV export") {
  const auto csv = to_csv({row(10, 3)});
  CHECK(csv == "n,seed,success_rate,mean_pairwise_us,max_msgs,energy_units\n10,3,0.75,123456.25,17,9876.5\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK_THROWS_AS(to_csv({}), std::invalid_argument);
  CHECK_THROWS_AS(to_json({}), std::invalid_argument);
  CHECK_THROWS_AS(results_from_csv("n,seed\n1,2\n"), std::invalid_argument);
}

TEST_CASE("JSON to CSV to JSON preserves values") {
  std::vector<ExperimentResult> rows{row(10, 1), row(20, 2)};
  rows[1].success_rate = 1.0 / 3.0;
  rows[1].energy_units = 1e-9 + 12345.678;
  const auto json = to_json(rows);
  const auto back = results_from_csv(to_csv(results_from_json(json)));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(same(back[i], rows[i]));
  CHECK(to_json(back) == json);
}

TEST_CASE("export writes files and reports IO errors") {
  const auto dir = scratch("export");
  export_results({row(5, 5)}, ExportFormat::Csv, dir / "r.csv");
  CHECK(results_from_csv(slurp(dir / "r.csv")).size() == 1);
  export_results({row(5, 5)}, ExportFormat::Json, dir / "r.json");
  CHECK(results_from_json(slurp(dir / "r.json")).size() == 1);
  CHECK_THROWS_AS(export_results({row(5, 5)}, ExportFormat::Csv, dir / "missing" / "r.csv"), IoError);
  CHECK_THROWS_AS(export_results({}, ExportFormat::Csv, dir / "empty.csv"), std::invalid_argument);
  CHECK_FALSE(std::filesystem::exists(dir / "empty.csv"));
}

TEST_CASE("experiment names") {
  for (auto e : {Experiment::PairwiseTime, Experiment::IndividualTime, Experiment::Scalability, Experiment::Energy,
                 Experiment::Detection})
    CHECK(experiment_from_string(to_string(e)) == e);
  CHECK_FALSE(experiment_from_string("warp_speed"));
}

TEST_CASE("sweep grids") {
  CHECK(pairwise_time_grid(2, 10) == std::vector<std::size_t>{2, 4, 6, 8, 10, 12, 14, 16, 18, 20});
  CHECK(pairwise_time_grid(5, 3) == std::vector<std::size_t>{5, 10, 15});
  CHECK(scalability_grid() == std::vector<std::size_t>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
}

TEST_CASE("pairwise_time sweep: one row per repetition, full success") {
  SweepParams p;
  p.step_grid = {2};
  p.steps = 4;
  p.reps = 3;
  p.jobs = 2;
  const auto files = run_sweep(Experiment::PairwiseTime, p);
  REQUIRE(files.size() == 1);
  CHECK(files[0].name == "pairwise_time_step2.csv");
  const auto rows = results_from_csv(files[0].content);
  REQUIRE(rows.size() == 12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].n == 2 * (i / 3 + 1));
    CHECK(rows[i].success_rate == 1.0);
  }
  p.jobs = 1;
  CHECK(run_sweep(Experiment::PairwiseTime, p)[0].content == files[0].content);
}

TEST_CASE("individual_time and detection sweeps") {
  SweepParams p;
  p.reps = 2;
  const auto ind = run_sweep(Experiment::IndividualTime, p);
  REQUIRE(ind.size() == 1);
  CHECK(ind[0].content.rfind(std::string(kIndividualCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(ind[0].content.begin(), ind[0].content.end(), '\n') == 1 + 2 * (10 + 20));

  p.detection_n = 8;
  p.p_detect_grid = {1.0};
  p.tp_grid = {1'000'000};
  const auto det = run_sweep(Experiment::Detection, p);
  REQUIRE(det.size() == 1);
  std::istringstream is(det[0].content);
  std::string line;
  std::getline(is, line);
  CHECK(line == kDetectionCsvHeader);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(line.find(",1,0") != std::string::npos);
  }
  CHECK(rows == 2);
}

TEST_CASE("report") {
  const auto empty = scratch("report_empty");
  CHECK_FALSE(build_report(empty));

  const auto dir = scratch("report");
  SweepParams p;
  p.step_grid = {5};
  p.steps = 2;
  p.reps = 2;
  for (const auto& f : run_sweep(Experiment::PairwiseTime, p)) std::ofstream(dir / f.name) << f.content;
  p.reps = 1;
  for (const auto& f : run_sweep(Experiment::IndividualTime, p)) std::ofstream(dir / f.name) << f.content;
  const auto out = build_report(dir);
  REQUIRE(out);
  CHECK(out->summary.find("pairwise_time_step5") != std::string::npos);
  CHECK(out->summary.find("individual_time") != std::string::npos);
  CHECK_FALSE(out->plot_files.empty());
  for (const auto& [name, content] : out->plot_files) {
    CAPTURE(name);
    CHECK_FALSE(content.empty());
  }
}
