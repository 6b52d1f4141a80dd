#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsnkm/crypto.hpp"
#include "wsnkm/keystore.hpp"
#include "wsnkm/packet.hpp"
#include "wsnkm/types.hpp"

namespace wsnkm {

enum class AttackKind { Compromise, HelloFlood, Clone, Alter, Replay };
std::string_view to_string(AttackKind k);

struct AdversaryAction {
  Ticks at = 0;
  AttackKind kind = AttackKind::Compromise;

  // COMPROMISE and CLONE: the captured node.
  NodeId node;
  // HELLO_FLOOD
  NodeId fake_id;
  double power_boost_db = 60.0;
  // HELLO_FLOOD: forge ACKs with the Kin captured from this node, if any.
  std::optional<NodeId> kin_from;
  // CLONE: the clone is placed at this node's radio position.
  NodeId position;
  // ALTER: XOR `mask` into frame octet `offset` on link src->dst for `duration` ticks.
  NodeId link_src;
  NodeId link_dst;
  std::uint8_t mask = 0x01;
  std::size_t offset = Packet::kHeaderSize;
  Ticks duration = ~Ticks{0};
  // REPLAY: newest recorded frame of this type from src (and to dst, if given), delivered to `to`.
  PacketType replay_type = PacketType::Ack;
  NodeId replay_src;
  std::optional<NodeId> replay_dst;
  std::optional<NodeId> replay_to;

  // Every node id this action depends on.
  std::vector<NodeId> referenced_nodes() const;
};

// Parses durations like "5s", "250ms", "100us" or plain ticks.
std::optional<Ticks> parse_duration(std::string_view text);

// `adversary: <kind> <k=v ...> at=<time>`; the leading `adversary:` is optional.
// Throws std::invalid_argument.
AdversaryAction parse_adversary_action(std::string_view line);

using NodePair = std::pair<NodeId, NodeId>;  // (lo, hi)
inline NodePair make_pair_ordered(NodeId a, NodeId b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }

// Live key material of a set of nodes, indexed for the closure oracle.
struct NetworkKeys {
  // Pairwise keys as held by each endpoint: (holder, peer) -> key.
  std::map<std::pair<NodeId, NodeId>, KeyMaterial> pairwise;
  // Cluster keys by owner, as sent by the owner and as received by others.
  std::map<NodeId, KeyMaterial> cluster_sent;
  std::map<std::pair<NodeId, NodeId>, KeyMaterial> cluster_received;  // (holder, owner)
  std::map<NodeId, KeyMaterial> global;

  void add(const KeyStore& store);
};

struct ClosureResult {
  std::set<NodePair> pairwise;
  std::set<NodeId> cluster_owners;
  std::set<NodeId> global_holders;
  bool empty() const { return pairwise.empty() && cluster_owners.empty() && global_holders.empty(); }
};

// Every key an attacker holding `captured` can compute: the captured keys,
// masters derivable from any captured initial key, and pairwise keys derivable
// from any known master over every id in `ids`.
std::set<KeyMaterial> attacker_closure(const std::vector<KeyMaterial>& captured, const std::set<NodeId>& ids);

// Established pairs (as present in `network`) whose pairwise key lies in the
// attacker's closure.
std::set<NodePair> derivable_pairwise(const KeyStore& snapshot, const NetworkKeys& network,
                                      const std::set<NodeId>& ids);

// Pairwise, cluster and global traffic keys in `network` that lie in the closure.
ClosureResult derivable_traffic_keys(const std::vector<KeyMaterial>& captured, const NetworkKeys& network,
                                     const std::set<NodeId>& ids);

struct CompromiseRecord {
  NodeId node;
  Ticks at = 0;
  KeyStore snapshot;
  bool post_erasure = false;
  std::optional<Ticks> help_at;
  // Pairwise neighbours of the victim at capture time.
  std::set<NodeId> neighbors_at_capture;
};

struct DetectionReport {
  NodeId victim;
  Ticks compromise_at = 0;
  std::optional<Ticks> detect_latency;
  std::optional<Ticks> revocation_latency;
  double coverage = 0.0;
  std::set<NodePair> residual_pairs;
  bool residual_empty = true;
};

}  // namespace wsnkm
