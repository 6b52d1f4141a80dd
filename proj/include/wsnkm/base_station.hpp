#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wsnkm/crypto.hpp"
#include "wsnkm/node.hpp"
#include "wsnkm/packet.hpp"
#include "wsnkm/types.hpp"

namespace wsnkm {

struct Verdict {
  NodeId node;
  bool consistent = false;
  std::string reason;
  Ticks at = 0;
};

struct ReportEntry {
  std::uint32_t counter = 0;
  NeighborDigest digest{};
  Ticks arrival = 0;
};

// The controller. Holds Km and the global key, answers individual keys on
// demand, turns HELP and suspicious REPORTs into ALERT plus a global rekey.
class BaseStation {
 public:
  // expected_neighbors: deployment adjacency per node; its key set is also the
  // list of nodes served by global rekeys.
  BaseStation(KeyMaterial master, KeyMaterial global, std::map<NodeId, std::set<NodeId>> expected_neighbors,
              ComputeCosts compute = {});

  // prf(Km, u); throws std::invalid_argument for u = 0.
  KeyMaterial individual_key(NodeId u) const;

  void on_packet(Env& env, const Packet& pkt);
  void on_help(Env& env, const Packet& pkt);
  std::optional<Verdict> on_report(Env& env, const Packet& pkt);
  // Fresh global key to every node not revoked. No-op when nothing is revoked.
  void global_rekey(Env& env);

  const KeyMaterial& global() const { return global_; }
  std::uint32_t epoch() const { return epoch_; }
  const std::set<NodeId>& revoked() const { return revoked_; }
  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  const std::map<NodeId, ReportEntry>& report_log() const { return report_log_; }
  const std::map<NodeId, Ticks>& individual_key_latency() const { return individual_latency_; }
  std::uint64_t bad_mac() const { return bad_mac_; }
  std::uint64_t alerts_sent() const { return alert_seq_; }
  std::uint64_t rekey_unicasts() const { return rekey_unicasts_; }

 private:
  // Serialised on-demand derivation; returns the key and the delay until it is ready.
  KeyMaterial derive_for(Env& env, NodeId u, Ticks& ready_delay);
  void revoke(Env& env, NodeId victim, Ticks delay, bool rekey);

  KeyMaterial master_;
  KeyMaterial global_;
  std::map<NodeId, std::set<NodeId>> expected_;
  ComputeCosts compute_;
  std::uint32_t epoch_ = 0;
  std::uint32_t alert_seq_ = 0;
  std::uint64_t nonce_counter_ = 0;
  std::uint64_t bad_mac_ = 0;
  std::uint64_t rekey_unicasts_ = 0;
  Ticks busy_until_ = 0;
  std::set<NodeId> revoked_;
  std::vector<Verdict> verdicts_;
  std::map<NodeId, ReportEntry> report_log_;
  std::map<NodeId, Ticks> individual_latency_;
};

}  // namespace wsnkm
