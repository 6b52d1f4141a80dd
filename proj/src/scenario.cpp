#include "wsnkm/scenario.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace wsnkm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

class Parser {
 public:
  Parser(std::string source, std::filesystem::path base) : source_(std::move(source)), base_(std::move(base)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(source_, line_, what); }

  Ticks duration(std::string_view v) const {
    auto d = parse_duration(v);
    if (!d) fail("bad duration '" + std::string(v) + "'");
    return *d;
  }

  double real(std::string_view v) const {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) fail("bad number '" + std::string(v) + "'");
    return out;
  }

  template <typename T>
  T integer(std::string_view v) const {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) fail("bad integer '" + std::string(v) + "'");
    return out;
  }

  bool boolean(std::string_view v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail("bad boolean '" + std::string(v) + "'");
  }

  Scenario parse(std::string_view text) {
    Scenario sc;
    bool have_seed = false;
    std::string section = "scenario";
    std::set<NodeId> seen_nodes;
    while (!text.empty()) {
      ++line_;
      auto nl = text.find('\n');
      std::string_view raw = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      auto hash = raw.find('#');
      auto line = trim(raw.substr(0, hash));
      if (line.empty()) continue;

      if (line.front() == '[') {
        if (line.back() != ']') fail("unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (section != "scenario" && section != "nodes" && section != "protocol" && section != "radio" &&
            section != "energy" && section != "adversary")
          fail("unknown section [" + section + "]");
        continue;
      }

      if (section == "nodes") {
        parse_node(line, sc, seen_nodes);
        continue;
      }
      if (section == "adversary") {
        try {
          sc.actions.push_back(parse_adversary_action(line));
        } catch (const std::invalid_argument& e) {
          fail(e.what());
        }
        continue;
      }

      auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected key = value");
      const auto key = trim(line.substr(0, eq));
      const auto val = trim(line.substr(eq + 1));
      if (val.empty()) fail("missing value for " + std::string(key));

      if (section == "scenario") {
        if (key == "seed") {
          sc.sim.seed = integer<std::uint64_t>(val);
          have_seed = true;
        } else if (key == "until") sc.until = duration(val);
        else if (key == "topology") sc.topology_path = base_ / std::string(val);
        else if (key == "noise") sc.noise_path = base_ / std::string(val);
        else if (key == "dump_keystores") sc.sim.dump_keystores = boolean(val);
        else fail("unknown key '" + std::string(key) + "'");
      } else if (section == "protocol") {
        auto& p = sc.sim.protocol;
        if (key == "tmin") p.tmin = duration(val);
        else if (key == "tp") p.tp = duration(val);
        else if (key == "p_detect") p.p_detect = real(val);
        else if (key == "hello_jitter") p.hello_jitter = duration(val);
        else if (key == "block_duration") p.block_duration = duration(val);
        else if (key == "chain_length") sc.sim.chain_length = integer<std::size_t>(val);
        else if (key == "prf_ticks") p.compute.prf = duration(val);
        else if (key == "mac_ticks") p.compute.mac = duration(val);
        else if (key == "enc_ticks") p.compute.enc = duration(val);
        else fail("unknown key '" + std::string(key) + "'");
      } else if (section == "radio") {
        auto& r = sc.sim.radio;
        if (key == "snr_threshold") r.snr_threshold_db = val == "lossless" ? RadioConfig::kLossless : real(val);
        else if (key == "propagation") r.propagation_ticks = duration(val);
        else if (key == "serialization") r.serialization_ticks_per_octet = duration(val);
        else if (key == "noise_sample") r.noise_sample_ticks = duration(val);
        else if (key == "bs_latency") sc.sim.bs_latency = duration(val);
        else fail("unknown key '" + std::string(key) + "'");
      } else if (section == "energy") {
        auto& e = sc.sim.energy;
        if (key == "c_tx") e.tx_per_octet = real(val);
        else if (key == "c_rx") e.rx_per_octet = real(val);
        else if (key == "c_mac") e.mac = real(val);
        else if (key == "c_prf") e.prf = real(val);
        else if (key == "c_enc") e.enc = real(val);
        else fail("unknown key '" + std::string(key) + "'");
      }
    }
    ++line_;
    if (!have_seed) fail("seed is mandatory");
    if (sc.topology_path.empty()) fail("topology is mandatory");
    if (sc.noise_path.empty()) fail("noise is mandatory");
    if (sc.nodes.empty()) fail("no nodes declared");
    if (sc.sim.chain_length == 0) fail("chain_length must be at least 1");
    try {
      sc.sim.protocol.validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    return sc;
  }

 private:
  void parse_node(std::string_view line, Scenario& sc, std::set<NodeId>& seen) {
    std::istringstream is{std::string(line)};
    std::string id_tok, tok;
    is >> id_tok;
    const auto raw = integer<unsigned>(id_tok);
    if (raw == 0 || raw >= 0xFFFF) fail("node id must be in 1..65534");
    NodeSpec spec{NodeId{static_cast<std::uint16_t>(raw)}, 0, false};
    bool have_boot = false;
    while (is >> tok) {
      if (tok == "isolated") spec.isolated = true;
      else if (tok.rfind("boot=", 0) == 0) {
        spec.boot = duration(std::string_view(tok).substr(5));
        have_boot = true;
      } else fail("unexpected '" + tok + "' in node line");
    }
    if (!have_boot) fail("node " + id_tok + " needs boot=");
    if (!seen.insert(spec.id).second) fail("duplicate node " + id_tok);
    sc.nodes.push_back(spec);
  }

  std::string source_;
  std::filesystem::path base_;
  std::size_t line_ = 0;
};

}  // namespace

Ticks Scenario::effective_until() const {
  if (until) return *until;
  Ticks last_boot = 0;
  for (const auto& n : nodes) last_boot = std::max(last_boot, n.boot);
  return last_boot + sim.protocol.tmin + 10 * sim.protocol.tp;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& source) {
  Parser p(source.string(), source.has_parent_path() ? source.parent_path() : std::filesystem::path{});
  return p.parse(text);
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path), path); }

std::unique_ptr<Simulator> build_simulator(const Scenario& sc) {
  Topology topo = load_topology(read_file(sc.topology_path));
  NoiseTrace noise = load_noise(read_file(sc.noise_path));

  const auto in_topology = topo.nodes();
  std::set<NodeId> declared;
  for (const auto& n : sc.nodes) {
    if (!n.isolated && !in_topology.count(n.id))
      throw ScenarioError(sc.topology_path.string(), 0,
                          "node " + std::to_string(n.id.value) + " is not in the topology and not marked isolated");
    declared.insert(n.id);
  }
  for (const auto& a : sc.actions)
    for (auto id : a.referenced_nodes())
      if (!declared.count(id))
        throw ScenarioError("[adversary]", 0,
                            std::string(to_string(a.kind)) + " references unknown node " + std::to_string(id.value));

  auto sim = std::make_unique<Simulator>(std::move(topo), std::move(noise), sc.sim);
  for (const auto& n : sc.nodes) sim->add_node(n.id, n.boot);
  for (const auto& a : sc.actions) sim->add_action(a);
  return sim;
}

}  // namespace wsnkm
