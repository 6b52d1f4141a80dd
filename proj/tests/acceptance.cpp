// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <openssl/evp.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "wsnkm/experiments.hpp"
#include "wsnkm/scenario.hpp"
#include "wsnkm/trace.hpp"

using namespace wsnkm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Invariants accumulated over every simulation the gate runs.
struct Totals {
  std::size_t runs = 0;
  std::uint64_t erasure_violations = 0;
  std::uint64_t installs_without_verify = 0;
  std::uint64_t keystore_lines = 0;
  std::uint64_t keystore_after_deadline = 0;
  std::uint64_t kin_after_deadline = 0;
} totals;

// Independent scan of the keystore dump lines: after boot + tmin no node may
// still show Kin or neighbour masters.
void scan_keystores(const Simulator& sim) {
  const Ticks tmin = sim.config().protocol.tmin;
  const std::string zeros(2 * kKeySize, '0');
  for (const auto& l : sim.trace()) {
    if (l.find("ev=keystore") == std::string::npos) continue;
    auto t = parse_trace_line(l);
    if (!t) continue;
    ++totals.keystore_lines;
    const Ticks boot = std::stoull(t->get("boot").value_or("0"));
    if (t->t <= boot + tmin) continue;
    ++totals.keystore_after_deadline;
    if (t->get("initial") != zeros || t->get("neighbor_masters") != "absent") ++totals.kin_after_deadline;
  }
}

void track(const Simulator& sim) {
  ++totals.runs;
  const auto inv = sim.invariants();
  totals.erasure_violations += inv.erasure_violations;
  totals.installs_without_verify += inv.installs_without_verify;
  scan_keystores(sim);
}

SimConfig lossless(std::uint64_t seed) {
  SimConfig c = sweep_defaults();
  c.seed = seed;
  c.dump_keystores = true;
  return c;
}

Ticks last_boot(const NetworkRun& run) {
  Ticks t = 0;
  for (const auto& [_, at] : run.boots) t = std::max(t, at);
  return t;
}

std::unique_ptr<Simulator> prepare(const NetworkRun& run) {
  auto sim = std::make_unique<Simulator>(run.topology, run.noise, run.config);
  for (const auto& [id, at] : run.boots) sim->add_node(id, at);
  for (const auto& a : run.actions) sim->add_action(a);
  return sim;
}

std::unique_ptr<Simulator> simulate_tracked(const NetworkRun& run) {
  auto sim = simulate(run);
  track(*sim);
  return sim;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  return to_hex(ByteView(md, len));
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

AdversaryAction action(const std::string& line) { return parse_adversary_action(line); }

std::string id(NodeId n) { return std::to_string(n.value); }

// 1
Outcome storage() {
  const auto r = StorageReport::compute(20, 20, 8);
  std::mt19937_64 rng(1);
  Provisioning p{KeyMaterial::random(rng), KeyMaterial::random(rng), KeyMaterial::random(rng), 20};
  auto s = KeyStore::preload(NodeId{1}, p, KeyMaterial::random(rng));
  for (std::uint16_t i = 2; i < 22; ++i) {
    s.install_pairwise(NodeId{i}, KeyMaterial::random(rng), 0);
    s.install_cluster(NodeId{i}, KeyMaterial::random(rng));
  }
  const auto live = s.storage_report(8);
  std::ostringstream os;
  os << "formula " << r.total_keys << " keys / " << r.total_octets << " octets, populated store " << live.total_keys
     << " / " << live.total_octets;
  return {r.total_keys == 82 && r.total_octets == 656 && live.total_keys == 82 && live.total_octets == 656, os.str()};
}

// 2
Outcome connectivity() {
  std::size_t topologies = 0, pairs = 0, agreeing = 0, complete = 0;
  for (std::size_t n : {10u, 25u, 50u})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto run = generated_run(random_connected_topology(n, seed), lossless(seed));
      auto sim = prepare(run);
      Ticks first_deadline = ~Ticks{0};
      for (const auto& [_, at] : run.boots) first_deadline = std::min(first_deadline, at + run.config.protocol.tmin);
      sim->run(first_deadline - 1);
      ++topologies;
      pairs += sim->adjacent_pairs();
      agreeing += sim->agreeing_adjacent_pairs();
      sim->run(run.until);
      track(*sim);
      if (summarize(*sim).success_rate == 1.0 && sim->disagreeing_pairs() == 0) ++complete;
    }
  std::ostringstream os;
  os << topologies << " topologies, " << agreeing << "/" << pairs << " adjacent pairs keyed before the first erasure, "
     << complete << "/" << topologies << " runs at success_rate 1.0";
  return {topologies == 30 && pairs > 0 && agreeing == pairs && complete == topologies, os.str()};
}

// 4
Outcome localization() {
  std::size_t exact = 0, trials = 0;
  std::string first_failure;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t n = 10 + seed % 16;
    auto run = generated_run(random_connected_topology(n, 100 + seed), lossless(seed));
    const NodeId victim = run.boots[seed % run.boots.size()].first;
    const Ticks at = last_boot(run) + run.config.protocol.tmin + 300'000;
    run.actions.push_back(action("compromise node=" + id(victim) + " at=" + std::to_string(at)));
    run.until = std::max(run.until, at + 5 * kTicksPerSecond);
    auto sim = prepare(run);
    sim->run(at);
    ++trials;
    bool ok = sim->compromises().size() == 1 && sim->compromises()[0].post_erasure;
    if (ok) {
      std::set<NodePair> expected;
      for (auto nb : run.topology.neighbors(victim)) expected.insert(make_pair_ordered(victim, nb));
      ok = derivable_pairwise(sim->compromises()[0].snapshot, sim->network_keys(), sim->node_ids()) == expected;
    }
    if (ok) ++exact;
    else if (first_failure.empty()) first_failure = ", first mismatch at seed " + std::to_string(seed);
    sim->run(run.until);
    track(*sim);
  }
  return {exact == trials && trials == 30,
          std::to_string(exact) + "/" + std::to_string(trials) + " post-erasure captures derive exactly the victim's links" +
              first_failure};
}

// 5
Outcome revocation() {
  std::size_t ok = 0;
  Ticks worst = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto sim = simulate_tracked(detection_run(20, lossless(seed), seed));
    const auto reports = sim->evaluate_detection();
    if (reports.size() != 1 || !reports[0].detect_latency) continue;
    const auto& r = reports[0];
    worst = std::max(worst, *r.detect_latency);
    bool rekeyed = true;
    for (const auto& [nid, node] : sim->nodes())
      if (nid != r.victim && node.store().global() != sim->base_station().global()) rekeyed = false;
    if (*r.detect_latency <= sim->config().protocol.tp && r.coverage == 1.0 && r.residual_empty && rekeyed) ++ok;
  }
  return {ok == 30, std::to_string(ok) + "/30 seeds: HELP within T_p (worst " + std::to_string(worst) +
                        " us), full neighbour revocation, empty closure after rekey"};
}

// 6
Outcome hello_flood() {
  std::size_t runs = 0, installs = 0, late_acks = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    for (bool late : {false, true}) {
      auto run = generated_run(random_connected_topology(15, 200 + seed), lossless(seed));
      const Ticks at = last_boot(run) + (late ? run.config.protocol.tmin + kTicksPerSecond : 20'000);
      run.actions.push_back(action("hello_flood fake=4000 boost=60 at=" + std::to_string(at)));
      auto sim = simulate_tracked(run);
      ++runs;
      installs += sim->installs_for(NodeId{4000});
      if (late)
        for (const auto& l : sim->trace())
          if (l.find("ev=ack_tx") != std::string::npos && l.find("to=4000") != std::string::npos) ++late_acks;
    }
  return {installs == 0 && late_acks == 0,
          std::to_string(runs) + " flood runs (discovery and post-erasure): " + std::to_string(installs) +
              " installs for the fake id, " + std::to_string(late_acks) + " post-erasure ACKs"};
}

// 7
Outcome scalability() {
  SweepParams p;
  const auto files = run_sweep(Experiment::Scalability, p);
  std::map<std::size_t, std::pair<double, double>> sums;  // n -> (max_msgs, energy)
  std::map<std::size_t, int> counts;
  for (const auto& r : results_from_csv(files.at(0).content)) {
    sums[r.n].first += static_cast<double>(r.max_msgs);
    sums[r.n].second += r.energy_units;
    ++counts[r.n];
  }
  double overall = 0.0;
  for (const auto& [n, s] : sums) overall += s.first / counts[n];
  overall /= static_cast<double>(sums.size());
  double spread = 0.0;
  bool increasing = true;
  double prev = -1.0;
  for (const auto& [n, s] : sums) {
    spread = std::max(spread, std::abs(s.first / counts[n] - overall) / overall);
    const double e = s.second / counts[n];
    if (e <= prev) increasing = false;
    prev = e;
  }
  std::ostringstream os;
  os << "N=10..100, D=6: max_msgs within " << spread * 100.0 << "% of the mean " << overall << ", energy "
     << (increasing ? "strictly increasing" : "NOT strictly increasing");
  return {sums.size() == 10 && spread <= 0.10 && increasing, os.str()};
}

// 8
Outcome determinism() {
  std::vector<std::string> mismatches;
  auto compare = [&](const std::string& what, const std::function<std::string()>& produce) {
    if (sha256_hex(produce()) != sha256_hex(produce())) mismatches.push_back(what);
  };
  compare("three_node", [] {
    auto sim = build_simulator(load_scenario(WSNKM_SCENARIO_DIR "/three_node.scn"));
    sim->run(load_scenario(WSNKM_SCENARIO_DIR "/three_node.scn").effective_until());
    track(*sim);
    return sim->trace_text() + to_csv({summarize(*sim)});
  });
  compare("attacked", [] {
    SimConfig c;
    c.seed = 77;
    c.protocol.p_detect = 0.5;
    auto run = generated_run(random_connected_topology(20, 77), c);
    const auto t = last_boot(run);
    const auto [a, b] = run.topology.adjacent_pairs().front();
    run.actions.push_back(action("alter src=" + id(a) + " dst=" + id(b) + " at=0 duration=300ms"));
    run.actions.push_back(action("hello_flood fake=4000 at=" + std::to_string(t + 50'000)));
    run.actions.push_back(action("compromise node=" + id(a) + " at=" + std::to_string(t + 6 * kTicksPerSecond)));
    run.actions.push_back(action("replay type=ACK src=" + id(b) + " at=" + std::to_string(t + 7 * kTicksPerSecond)));
    run.until += 20 * kTicksPerSecond;
    auto sim = simulate_tracked(run);
    return sim->trace_text() + to_csv({summarize(*sim)});
  });
  const auto base = fs::temp_directory_path() / "wsnkm_acceptance";
  fs::remove_all(base);
  std::string hashes;
  for (const char* dir : {"a", "b"}) {
    const std::string cmd = std::string(WSNKM_CLI) + " run " WSNKM_SCENARIO_DIR "/three_node.scn --out " +
                            (base / dir).string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) mismatches.push_back(std::string("cli exit ") + dir);
    hashes += sha256_hex(slurp(base / dir / "trace.txt")) + sha256_hex(slurp(base / dir / "results.csv")) + "|";
  }
  const auto half = hashes.size() / 2;
  if (hashes.substr(0, half) != hashes.substr(half)) mismatches.push_back("cli files");
  std::string detail = "library runs and CLI output files hash-identical across repeats";
  if (!mismatches.empty()) {
    detail = "differing:";
    for (const auto& m : mismatches) detail += " " + m;
  }
  return {mismatches.empty(), detail};
}

// 9
Outcome parser_goldens() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const auto comma = load_topology("1 2 -54,0\n");
  expect(comma.links() == std::vector<LinkGain>{{NodeId{1}, NodeId{2}, -54.0}}, "decimal comma");
  expect(load_topology("gain 1 2 -54,0\n").links() == comma.links(), "gain form");
  const auto file = load_topology(slurp(WSNKM_SCENARIO_DIR "/three_node.topo"));
  expect(file.gain(NodeId{1}, NodeId{2}) == -54.0, "three_node.topo first line");

  const int excerpt[] = {-39, -98, -98, -98, -99, -98, -94, -98, -98, -98};
  std::string hundred, ninety_nine;
  for (int i = 0; i < 100; ++i) {
    hundred += std::to_string(excerpt[i % 10]) + "\n";
    if (i < 99) ninety_nine += std::to_string(excerpt[i % 10]) + "\n";
  }
  const auto noise = load_noise(hundred);
  bool samples_ok = noise.samples.size() == 100;
  for (std::size_t i = 0; samples_ok && i < 100; ++i) samples_ok = noise.samples[i] == excerpt[i % 10];
  expect(samples_ok, "100-sample trace");
  expect(load_noise(slurp(WSNKM_SCENARIO_DIR "/heavy_noise.txt")).samples == noise.samples, "heavy_noise.txt");
  bool rejected = false;
  try {
    load_noise(ninety_nine);
  } catch (const TooShort& e) {
    rejected = e.samples() == 99;
  }
  expect(rejected, "99-sample rejection");
  std::string detail = "topology comma and gain forms, 100-sample trace, 99-sample rejection";
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " [" + f + "]";
  }
  return {failures.empty(), detail};
}

// Dedicated ALTER and REPLAY runs feeding the MAC-gate totals.
Outcome mac_gate_attacks() {
  std::uint64_t bad_mac = 0, replays = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto run = generated_run(random_connected_topology(12, 300 + seed), lossless(seed));
    const auto t = last_boot(run);
    const auto pairs = run.topology.adjacent_pairs();
    const auto [a, b] = pairs[seed % pairs.size()];
    for (std::size_t offset : {6u, 8u, 12u})
      run.actions.push_back(action("alter src=" + id(a) + " dst=" + id(b) + " offset=" + std::to_string(offset) +
                                   " mask=0x5a at=0 duration=" + std::to_string(t + 8 * kTicksPerSecond)));
    run.actions.push_back(action("alter src=" + id(b) + " dst=" + id(a) + " offset=9 at=0"));
    const auto late = t + run.config.protocol.tmin + kTicksPerSecond;
    for (const char* type : {"ACK", "CLUSTER_KEY", "REPORT", "HELLO"})
      run.actions.push_back(action(std::string("replay type=") + type + " src=" + id(b) + " at=" + std::to_string(late)));
    run.actions.push_back(action("replay type=ACK src=" + id(b) + " to=" + id(pairs.back().second) +
                                 " at=" + std::to_string(late + 10)));
    auto sim = simulate_tracked(run);
    for (const auto& [_, n] : sim->nodes()) bad_mac += n.stats().bad_mac;
    for (const auto& l : sim->trace())
      if (l.find("action=replay,type=") != std::string::npos) ++replays;
  }
  return {bad_mac > 0 && replays > 0,
          std::to_string(bad_mac) + " altered frames rejected, " + std::to_string(replays) + " replays injected"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int number, const std::string& name, const std::function<Outcome()>& check, double budget_s = 0) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0 && secs >= budget_s) {
      o.pass = false;
      o.detail += " (over the " + std::to_string(static_cast<int>(budget_s)) + " s budget)";
    }
    if (!o.pass) ++failures;
    std::ostringstream time;
    time.precision(2);
    time << std::fixed << secs;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << number << "] " << name << ": " << o.detail << " (" << time.str()
              << " s)" << std::endl;
  };

  report(1, "storage formula", storage, 1.0);
  report(2, "full connectivity", connectivity, 30.0);
  report(4, "compromise localization", localization);
  report(5, "revocation", revocation);
  report(6, "hello-flood resistance", hello_flood);
  report(7, "scalability trend", scalability, 120.0);
  report(8, "determinism", determinism);
  report(9, "parser goldens", parser_goldens);

  Outcome attacks;
  try {
    attacks = mac_gate_attacks();
  } catch (const std::exception& e) {
    attacks = {false, std::string("exception: ") + e.what()};
  }

  report(3, "erasure deadline", [] {
    std::ostringstream os;
    os << totals.runs << " runs, " << totals.keystore_after_deadline << " keystore dumps past the deadline, "
       << totals.kin_after_deadline << " with Kin, " << totals.erasure_violations << " erasure violations";
    return Outcome{totals.keystore_after_deadline > 0 && totals.kin_after_deadline == 0 &&
                       totals.erasure_violations == 0,
                   os.str()};
  });
  report(10, "MAC gate", [&] {
    std::ostringstream os;
    os << "installs_without_verify=" << totals.installs_without_verify << " over " << totals.runs
       << " runs; attack runs: " << attacks.detail;
    return Outcome{attacks.pass && totals.installs_without_verify == 0, os.str()};
  });

  std::cout << (failures ? "acceptance FAILED: " + std::to_string(failures) + " criteria" : "acceptance passed")
            << std::endl;
  return failures ? 1 : 0;
}
