#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "wsnkm/keystore.hpp"
#include "wsnkm/metrics.hpp"
#include "wsnkm/packet.hpp"
#include "wsnkm/types.hpp"

namespace wsnkm {

enum class NodePhase { Preloaded, Discovering, Established, Revoked };
std::string_view to_string(NodePhase p);

enum class TimerKind { Hello, TminExpired, PeriodicCheck };

// Simulated processing time charged per primitive.
struct ComputeCosts {
  Ticks prf = 120;
  Ticks mac = 120;
  Ticks enc = 80;
};

struct ProtocolConfig {
  Ticks tmin = 5 * kTicksPerSecond;
  Ticks tp = 1 * kTicksPerSecond;
  // 0 selects tmin / 10.
  Ticks hello_jitter = 0;
  double p_detect = 1.0;
  // 0 selects 10 * tp.
  Ticks block_duration = 0;
  ComputeCosts compute;

  Ticks effective_hello_jitter() const { return hello_jitter ? hello_jitter : tmin / 10; }
  Ticks effective_block_duration() const { return block_duration ? block_duration : 10 * tp; }
  // Throws std::invalid_argument.
  void validate() const;
};

// Everything a protocol participant may ask of the event loop.
class Env {
 public:
  virtual ~Env() = default;
  virtual Ticks now() const = 0;
  // Puts `pkt` on the air from `from` after `delay`. Frames addressed to the base
  // station, or sent by it, go over the backhaul.
  virtual void transmit(NodeId from, const Packet& pkt, Ticks delay) = 0;
  virtual void set_timer(NodeId node, TimerKind kind, Ticks at) = 0;
  virtual void trace(NodeId node, std::string_view ev, std::string_view detail) = 0;
  // Appends a preformatted line (base-station verdicts).
  virtual void trace_line(std::string line) = 0;
  virtual void account(const LedgerEvent& ev) = 0;
  virtual std::mt19937_64& rng() = 0;
};

using NeighborDigest = std::array<std::uint8_t, 8>;

// Truncated SHA-256 over the sorted ids; all-zero for the empty set.
NeighborDigest neighbor_digest(const std::set<NodeId>& ids);

struct NodeStats {
  std::uint64_t bad_mac = 0;
  std::uint64_t drops = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t installs_without_verify = 0;
  std::uint64_t pairwise_installs = 0;
  std::optional<Ticks> last_pairwise_install;
  std::optional<Ticks> help_sent_at;
};

class Node {
 public:
  Node(KeyStore store, ProtocolConfig config, Ticks boot_time);

  NodeId id() const { return store_.self(); }
  NodePhase phase() const { return phase_; }
  Ticks boot_time() const { return boot_time_; }
  const KeyStore& store() const { return store_; }
  const NodeStats& stats() const { return stats_; }
  std::uint32_t seq_counter() const { return seq_counter_; }
  std::uint32_t global_epoch() const { return global_epoch_; }
  bool compromised() const { return compromised_.has_value(); }
  std::set<NodeId> neighbors() const;

  void on_boot(Env& env);
  void on_timer(Env& env, TimerKind kind);
  void on_packet(Env& env, const Packet& pkt);

  // Adversary hook: the node's memory has been read. Feeds the periodic check.
  void mark_compromised(Ticks at) {
    if (!compromised_) compromised_ = at;
  }

 private:
  void send_hello(Env& env);
  void on_hello(Env& env, const Packet& pkt);
  void on_ack(Env& env, const Packet& pkt);
  void on_tmin_expired(Env& env);
  void on_cluster_key(Env& env, const Packet& pkt);
  void periodic_check(Env& env);
  void on_alert(Env& env, const Packet& pkt);
  void on_global_rekey(Env& env, const Packet& pkt);
  void send_report(Env& env);

  void send_ack(Env& env, NodeId to);
  void distribute_cluster_key(Env& env);

  bool authenticate(Env& env, const Packet& pkt, const KeyMaterial& key);
  void drop(Env& env, const Packet& pkt, std::string_view reason);
  // Counts an install performed without a successful MAC check on the packet being handled.
  void check_verified();
  void charge(Env& env, LedgerKind kind);
  Ticks at_done(Env& env) const { return env.now() + busy_; }
  Nonce next_nonce() { return make_nonce((std::uint64_t{id().value} << 48) | ++nonce_counter_); }

  KeyStore store_;
  ProtocolConfig config_;
  Ticks boot_time_;
  NodePhase phase_ = NodePhase::Preloaded;
  NodeStats stats_;
  std::set<NodeId> acked_;
  std::set<std::uint32_t> seen_alerts_;
  std::uint32_t seq_counter_ = 0;
  std::uint32_t global_epoch_ = 0;
  std::uint64_t nonce_counter_ = 0;
  std::optional<Ticks> compromised_;
  bool help_sent_ = false;
  // Per-event scratch: processing time consumed so far and whether the
  // current packet passed MAC verification.
  Ticks busy_ = 0;
  bool verified_ = false;
};

// Payload layouts shared by nodes, the base station and the adversary.
namespace payload {

Bytes id(NodeId id);
std::optional<NodeId> read_id(const Bytes& p);

// nonce || encrypt(key, plaintext, nonce)
Bytes sealed(const KeyMaterial& key, ByteView plaintext, const Nonce& nonce);
std::optional<Bytes> open(const KeyMaterial& key, const Bytes& p, std::size_t plaintext_size);

Bytes alert(NodeId victim, std::uint32_t seq);

}  // namespace payload

}  // namespace wsnkm
