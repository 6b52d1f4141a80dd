#include "wsnkm/radio.hpp"

#include <cctype>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

namespace wsnkm {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

NodeId parse_id(std::string_view tok, std::size_t line) {
  unsigned v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size() || v >= 0xFFFF)
    throw ParseError(line, "bad node id '" + std::string(tok) + "'");
  return NodeId{static_cast<std::uint16_t>(v)};
}

double parse_gain(std::string_view tok, std::size_t line) {
  std::string s(tok);
  std::replace(s.begin(), s.end(), ',', '.');
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, "bad gain '" + std::string(tok) + "'");
  return v;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::optional<double> Topology::gain(NodeId src, NodeId dst) const {
  auto it = gains_.find({src, dst});
  if (it == gains_.end()) return std::nullopt;
  return it->second;
}

std::vector<LinkGain> Topology::links() const {
  std::vector<LinkGain> out;
  out.reserve(gains_.size());
  for (const auto& [k, g] : gains_) out.push_back({k.first, k.second, g});
  return out;
}

std::vector<std::pair<NodeId, double>> Topology::out_links(NodeId src) const {
  std::vector<std::pair<NodeId, double>> out;
  for (auto it = gains_.lower_bound({src, NodeId{0}}); it != gains_.end() && it->first.first == src; ++it)
    out.emplace_back(it->first.second, it->second);
  return out;
}

std::set<NodeId> Topology::nodes() const {
  std::set<NodeId> out;
  for (const auto& [k, _] : gains_) {
    out.insert(k.first);
    out.insert(k.second);
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> Topology::adjacent_pairs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& [k, _] : gains_)
    if (k.first < k.second && gains_.count({k.second, k.first})) out.emplace_back(k.first, k.second);
  return out;
}

std::set<NodeId> Topology::neighbors(NodeId id) const {
  std::set<NodeId> out;
  for (const auto& [dst, _] : out_links(id))
    if (gains_.count({dst, id})) out.insert(dst);
  return out;
}

std::string Topology::to_text() const {
  std::ostringstream os;
  for (const auto& [k, g] : gains_) os << k.first.value << ' ' << k.second.value << ' ' << g << '\n';
  return os.str();
}

Topology load_topology(std::string_view text) {
  Topology topo;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto tok = split_ws(line);
    if (tok.empty()) return;
    if (tok[0] == "gain") {
      if (tok.size() != 4) throw ParseError(line_no, "expected 'gain src dst g'");
      topo.add({parse_id(tok[1], line_no), parse_id(tok[2], line_no), parse_gain(tok[3], line_no)});
    } else {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'src dst gain'");
      topo.add({parse_id(tok[0], line_no), parse_id(tok[1], line_no), parse_gain(tok[2], line_no)});
    }
  });
  return topo;
}

NoiseTrace load_noise(std::string_view text) {
  NoiseTrace trace;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto tok = split_ws(line);
    if (tok.empty()) return;
    if (tok.size() != 1) throw ParseError(line_no, "expected one integer per line");
    int v = 0;
    auto [p, ec] = std::from_chars(tok[0].data(), tok[0].data() + tok[0].size(), v);
    if (ec != std::errc{} || p != tok[0].data() + tok[0].size())
      throw ParseError(line_no, "bad noise reading '" + std::string(tok[0]) + "'");
    trace.samples.push_back(v);
  });
  if (trace.samples.size() < NoiseTrace::kMinSamples) throw TooShort(trace.samples.size());
  return trace;
}

NoiseTrace reference_noise_trace() {
  static constexpr int kExcerpt[] = {-39, -98, -98, -98, -99, -98, -94, -98, -98, -98};
  NoiseTrace t;
  for (std::size_t i = 0; i < NoiseTrace::kMinSamples; ++i) t.samples.push_back(kExcerpt[i % 10]);
  return t;
}

RadioModel::RadioModel(Topology topology, NoiseTrace noise, RadioConfig config, std::uint64_t seed)
    : topology_(std::move(topology)), noise_(std::move(noise)), config_(config), seed_(seed) {
  if (noise_.samples.empty()) throw std::invalid_argument("noise trace is empty");
}

int RadioModel::noise_sample(NodeId receiver, Ticks now) const {
  const std::uint64_t offset = mix(seed_ ^ (std::uint64_t{receiver.value} << 32));
  const std::uint64_t position = config_.noise_sample_ticks ? now / config_.noise_sample_ticks : now;
  return noise_.at(static_cast<std::size_t>((offset + position) % noise_.samples.size()));
}

bool RadioModel::delivered(NodeId src, NodeId dst, Ticks now) const {
  auto g = topology_.gain(src, dst);
  return g && delivered_with_gain(*g, dst, now);
}

bool RadioModel::delivered_with_gain(double gain_dbm, NodeId dst, Ticks now) const {
  if (config_.snr_threshold_db == RadioConfig::kLossless) return true;
  return gain_dbm - noise_sample(dst, now) >= config_.snr_threshold_db;
}

Topology random_connected_topology(std::size_t n, std::uint64_t seed, double mean_degree) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  const double radius = n > 1 ? std::sqrt(mean_degree / (std::numbers::pi * static_cast<double>(n))) : 1.0;
  for (int attempt = 0;; ++attempt) {
    std::vector<std::pair<double, double>> pos(n);
    for (auto& p : pos) p = {coord(rng), coord(rng)};
    // Fall back to a wider radius if the graph keeps coming out disconnected.
    const double r = radius * (1.0 + 0.05 * (attempt / 50));
    Topology topo;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = std::hypot(pos[i].first - pos[j].first, pos[i].second - pos[j].second);
        if (d > r) continue;
        const double g = -45.0 - 30.0 * (d / r);
        const NodeId a{static_cast<std::uint16_t>(i + 1)}, b{static_cast<std::uint16_t>(j + 1)};
        topo.add({a, b, g});
        topo.add({b, a, g});
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    std::size_t reached = 0;
    if (n) {
      q.push(0);
      seen[0] = true;
    }
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      ++reached;
      for (auto v : adj[u])
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
    }
    if (reached == n) return topo;
  }
}

Topology ring_lattice_topology(std::size_t n, std::size_t degree) {
  if (degree % 2 != 0 || degree >= n) throw std::invalid_argument("ring lattice needs even degree < n");
  Topology topo;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= degree / 2; ++k) {
      const std::size_t j = (i + k) % n;
      const NodeId a{static_cast<std::uint16_t>(i + 1)}, b{static_cast<std::uint16_t>(j + 1)};
      const double g = -50.0 - 5.0 * static_cast<double>(k);
      topo.add({a, b, g});
      topo.add({b, a, g});
    }
  return topo;
}

}  // namespace wsnkm
