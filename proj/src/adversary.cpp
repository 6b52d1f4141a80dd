#include "wsnkm/adversary.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>

namespace wsnkm {

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::Compromise: return "compromise";
    case AttackKind::HelloFlood: return "hello_flood";
    case AttackKind::Clone: return "clone";
    case AttackKind::Alter: return "alter";
    case AttackKind::Replay: return "replay";
  }
  return "?";
}

std::vector<NodeId> AdversaryAction::referenced_nodes() const {
  switch (kind) {
    case AttackKind::Compromise: return {node};
    case AttackKind::HelloFlood:
      if (kin_from) return {*kin_from};
      return {};
    case AttackKind::Clone: return {node, position};
    case AttackKind::Alter: return {link_src, link_dst};
    case AttackKind::Replay: {
      std::vector<NodeId> out{replay_src};
      if (replay_dst && *replay_dst != kBroadcast && *replay_dst != kBaseStation) out.push_back(*replay_dst);
      if (replay_to) out.push_back(*replay_to);
      return out;
    }
  }
  return {};
}

std::optional<Ticks> parse_duration(std::string_view text) {
  Ticks scale = 1;
  if (text.size() > 2 && text.substr(text.size() - 2) == "us") text.remove_suffix(2);
  else if (text.size() > 2 && text.substr(text.size() - 2) == "ms") {
    text.remove_suffix(2);
    scale = 1000;
  } else if (text.size() > 1 && text.back() == 's') {
    text.remove_suffix(1);
    scale = kTicksPerSecond;
  }
  Ticks v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
  if (v > std::numeric_limits<Ticks>::max() / scale) return std::nullopt;
  return v * scale;
}

namespace {

template <typename T>
T number(std::string_view key, std::string_view v, int base = 10) {
  T out{};
  if (base == 16 && v.substr(0, 2) == "0x") v.remove_prefix(2);
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

Ticks ticks(std::string_view key, std::string_view v) {
  auto d = parse_duration(v);
  if (!d) throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  return *d;
}

NodeId node_id(std::string_view key, std::string_view v) {
  const auto raw = number<unsigned>(key, v);
  if (raw > 0xFFFF) throw std::invalid_argument("node id out of range for " + std::string(key));
  return NodeId{static_cast<std::uint16_t>(raw)};
}

}  // namespace

AdversaryAction parse_adversary_action(std::string_view line) {
  std::vector<std::string_view> tok;
  for (std::size_t i = 0; i < line.size();) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) tok.push_back(line.substr(i, j - i));
    i = j;
  }
  if (!tok.empty() && tok[0] == "adversary:") tok.erase(tok.begin());
  if (tok.empty()) throw std::invalid_argument("empty adversary action");

  AdversaryAction a;
  const auto kind = tok[0];
  if (kind == "compromise") a.kind = AttackKind::Compromise;
  else if (kind == "hello_flood") a.kind = AttackKind::HelloFlood;
  else if (kind == "clone") a.kind = AttackKind::Clone;
  else if (kind == "alter") a.kind = AttackKind::Alter;
  else if (kind == "replay") a.kind = AttackKind::Replay;
  else throw std::invalid_argument("unknown adversary action '" + std::string(kind) + "'");

  std::set<std::string_view> seen;
  for (std::size_t i = 1; i < tok.size(); ++i) {
    auto eq = tok[i].find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("expected key=value, got '" + std::string(tok[i]) + "'");
    const auto key = tok[i].substr(0, eq);
    const auto val = tok[i].substr(eq + 1);
    seen.insert(key);
    if (key == "at") a.at = ticks(key, val);
    else if (key == "node") a.node = node_id(key, val);
    else if (key == "fake") a.fake_id = node_id(key, val);
    else if (key == "boost") {
      std::string s(val);
      try {
        a.power_boost_db = std::stod(s);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad value for boost: '" + s + "'");
      }
    } else if (key == "kin_from") a.kin_from = node_id(key, val);
    else if (key == "position") a.position = node_id(key, val);
    else if (key == "src") {
      a.link_src = node_id(key, val);
      a.replay_src = a.link_src;
    } else if (key == "dst") {
      a.link_dst = node_id(key, val);
      a.replay_dst = a.link_dst;
    } else if (key == "mask") a.mask = number<std::uint8_t>(key, val, 16);
    else if (key == "offset") a.offset = number<std::size_t>(key, val);
    else if (key == "duration") a.duration = ticks(key, val);
    else if (key == "type") {
      auto t = packet_type_from_string(val);
      if (!t) throw std::invalid_argument("unknown packet type '" + std::string(val) + "'");
      a.replay_type = *t;
    } else if (key == "to") a.replay_to = node_id(key, val);
    else throw std::invalid_argument("unknown adversary parameter '" + std::string(key) + "'");
  }

  auto require = [&](std::string_view key) {
    if (!seen.count(key))
      throw std::invalid_argument(std::string(to_string(a.kind)) + " requires " + std::string(key) + "=");
  };
  require("at");
  switch (a.kind) {
    case AttackKind::Compromise: require("node"); break;
    case AttackKind::HelloFlood: require("fake"); break;
    case AttackKind::Clone:
      require("node");
      require("position");
      break;
    case AttackKind::Alter:
      require("src");
      require("dst");
      break;
    case AttackKind::Replay: require("src"); break;
  }
  return a;
}

void NetworkKeys::add(const KeyStore& store) {
  const NodeId self = store.self();
  for (const auto& [peer, k] : store.pairwise_keys()) pairwise[{self, peer}] = k;
  if (store.cluster_sent()) cluster_sent[self] = *store.cluster_sent();
  for (const auto& [owner, k] : store.cluster_received()) cluster_received[{self, owner}] = k;
  global[self] = store.global();
}

std::set<KeyMaterial> attacker_closure(const std::vector<KeyMaterial>& captured, const std::set<NodeId>& ids) {
  std::set<KeyMaterial> known(captured.begin(), captured.end());
  // Anything captured may be an initial key: expand to every node's master.
  std::set<KeyMaterial> masters = known;
  for (const auto& k : captured)
    for (auto id : ids) masters.insert(master_key(k, id));
  // Any known or derived key may be a master: expand to every pairwise key it keys.
  std::set<KeyMaterial> closure = masters;
  for (const auto& m : masters)
    for (auto lo : ids) closure.insert(pairwise_key(m, lo));
  return closure;
}

ClosureResult derivable_traffic_keys(const std::vector<KeyMaterial>& captured, const NetworkKeys& network,
                                     const std::set<NodeId>& ids) {
  const auto closure = attacker_closure(captured, ids);
  ClosureResult r;
  for (const auto& [holder_peer, k] : network.pairwise)
    if (closure.count(k)) r.pairwise.insert(make_pair_ordered(holder_peer.first, holder_peer.second));
  for (const auto& [owner, k] : network.cluster_sent)
    if (closure.count(k)) r.cluster_owners.insert(owner);
  for (const auto& [holder_owner, k] : network.cluster_received)
    if (closure.count(k)) r.cluster_owners.insert(holder_owner.second);
  for (const auto& [holder, k] : network.global)
    if (closure.count(k)) r.global_holders.insert(holder);
  return r;
}

std::set<NodePair> derivable_pairwise(const KeyStore& snapshot, const NetworkKeys& network,
                                      const std::set<NodeId>& ids) {
  return derivable_traffic_keys(snapshot.all_keys(), network, ids).pairwise;
}

}  // namespace wsnkm
