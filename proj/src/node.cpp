#include "wsnkm/node.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <stdexcept>

#include "wsnkm/trace.hpp"

namespace wsnkm {

std::string_view to_string(NodePhase p) {
  switch (p) {
    case NodePhase::Preloaded: return "PRELOADED";
    case NodePhase::Discovering: return "DISCOVERING";
    case NodePhase::Established: return "ESTABLISHED";
    case NodePhase::Revoked: return "REVOKED";
  }
  return "?";
}

void ProtocolConfig::validate() const {
  if (tmin == 0) throw std::invalid_argument("tmin must be positive");
  if (tp == 0) throw std::invalid_argument("tp must be positive");
  if (!(p_detect >= 0.0 && p_detect <= 1.0)) throw std::invalid_argument("p_detect must lie in [0, 1]");
  if (effective_hello_jitter() >= tmin) throw std::invalid_argument("hello_jitter must be below tmin");
}

NeighborDigest neighbor_digest(const std::set<NodeId>& ids) {
  NeighborDigest out{};
  if (ids.empty()) return out;
  Bytes input{static_cast<std::uint8_t>(Domain::Digest)};
  for (auto id : ids) put_u16(input, id.value);
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> d{};
  SHA256(input.data(), input.size(), d.data());
  std::copy_n(d.begin(), out.size(), out.begin());
  return out;
}

namespace payload {

Bytes id(NodeId id) {
  Bytes b;
  put_u16(b, id.value);
  return b;
}

std::optional<NodeId> read_id(const Bytes& p) {
  if (p.size() != 2) return std::nullopt;
  return NodeId{get_u16(p, 0)};
}

Bytes sealed(const KeyMaterial& key, ByteView plaintext, const Nonce& nonce) {
  Bytes out(nonce.begin(), nonce.end());
  auto ct = encrypt(key, plaintext, nonce);
  out.insert(out.end(), ct.begin(), ct.end());
  return out;
}

std::optional<Bytes> open(const KeyMaterial& key, const Bytes& p, std::size_t plaintext_size) {
  if (p.size() != kNonceSize + plaintext_size) return std::nullopt;
  Nonce nonce{};
  std::copy_n(p.begin(), kNonceSize, nonce.begin());
  return decrypt(key, ByteView(p).subspan(kNonceSize), nonce);
}

Bytes alert(NodeId victim, std::uint32_t seq) {
  Bytes b;
  put_u16(b, victim.value);
  put_u32(b, seq);
  return b;
}

}  // namespace payload

Node::Node(KeyStore store, ProtocolConfig config, Ticks boot_time)
    : store_(std::move(store)), config_(config), boot_time_(boot_time) {
  config_.validate();
}

std::set<NodeId> Node::neighbors() const {
  std::set<NodeId> out;
  for (const auto& [peer, _] : store_.pairwise_keys()) out.insert(peer);
  return out;
}

void Node::charge(Env& env, LedgerKind kind) {
  env.account({id(), kind, 0});
  switch (kind) {
    case LedgerKind::Prf: busy_ += config_.compute.prf; break;
    case LedgerKind::Mac: busy_ += config_.compute.mac; break;
    case LedgerKind::Enc: busy_ += config_.compute.enc; break;
    default: break;
  }
}

bool Node::authenticate(Env& env, const Packet& pkt, const KeyMaterial& key) {
  charge(env, LedgerKind::Mac);
  verified_ = pkt.verify_with(key);
  if (!verified_) {
    ++stats_.bad_mac;
    drop(env, pkt, "bad_mac");
  }
  return verified_;
}

void Node::drop(Env& env, const Packet& pkt, std::string_view reason) {
  ++stats_.drops;
  env.trace(id(), "drop", Detail().add("type", to_string(pkt.type)).add("src", pkt.src).add("reason", reason).str());
}

void Node::check_verified() {
  if (!verified_) ++stats_.installs_without_verify;
}

void Node::on_boot(Env& env) {
  busy_ = 0;
  if (phase_ != NodePhase::Preloaded) {
    env.trace(id(), "boot_ignored", Detail().add("phase", to_string(phase_)).str());
    return;
  }
  phase_ = NodePhase::Discovering;
  env.trace(id(), "boot", Detail().add("phase", to_string(phase_)).str());
  const Ticks jitter = config_.effective_hello_jitter();
  const Ticks delay = jitter ? std::uniform_int_distribution<Ticks>(0, jitter)(env.rng()) : 0;
  env.set_timer(id(), TimerKind::Hello, env.now() + delay);
  env.set_timer(id(), TimerKind::TminExpired, env.now() + config_.tmin);
  env.set_timer(id(), TimerKind::PeriodicCheck, env.now() + config_.tp);
}

void Node::on_timer(Env& env, TimerKind kind) {
  busy_ = 0;
  verified_ = false;
  switch (kind) {
    case TimerKind::Hello: send_hello(env); break;
    case TimerKind::TminExpired: on_tmin_expired(env); break;
    case TimerKind::PeriodicCheck: periodic_check(env); break;
  }
}

void Node::on_packet(Env& env, const Packet& pkt) {
  busy_ = 0;
  verified_ = false;
  if (phase_ == NodePhase::Preloaded) return drop(env, pkt, "not_booted");
  if (phase_ == NodePhase::Revoked) return drop(env, pkt, "revoked");
  switch (pkt.type) {
    case PacketType::Hello: return on_hello(env, pkt);
    case PacketType::Ack: return on_ack(env, pkt);
    case PacketType::ClusterKey: return on_cluster_key(env, pkt);
    case PacketType::Alert: return on_alert(env, pkt);
    case PacketType::GlobalRekey: return on_global_rekey(env, pkt);
    case PacketType::Data:
    case PacketType::Help:
    case PacketType::Report: return drop(env, pkt, "unsupported");
  }
}

void Node::send_hello(Env& env) {
  if (phase_ != NodePhase::Discovering) return;
  Packet hello{PacketType::Hello, id(), kBroadcast, payload::id(id()), {}};
  env.trace(id(), "hello_tx", "");
  env.transmit(id(), hello, busy_);
}

void Node::send_ack(Env& env, NodeId to) {
  Packet ack{PacketType::Ack, id(), to, payload::id(id()), {}};
  charge(env, LedgerKind::Mac);
  ack.sign(store_.own_master());
  acked_.insert(to);
  ++stats_.acks_sent;
  env.trace(id(), "ack_tx", Detail().add("to", to).str());
  env.transmit(id(), ack, busy_);
}

void Node::on_hello(Env& env, const Packet& pkt) {
  auto sender = payload::read_id(pkt.payload);
  if (!sender || *sender != pkt.src) return drop(env, pkt, "malformed");
  if (*sender == id()) return;
  if (store_.is_blocked(*sender, env.now())) return drop(env, pkt, "blocked");
  if (!store_.initial_key() && !store_.pairwise(*sender)) return drop(env, pkt, "stranger");
  if (acked_.count(*sender)) return drop(env, pkt, "duplicate");
  send_ack(env, *sender);
}

void Node::on_ack(Env& env, const Packet& pkt) {
  auto peer = payload::read_id(pkt.payload);
  if (!peer || *peer != pkt.src || pkt.dst != id() || *peer == id()) return drop(env, pkt, "malformed");
  if (store_.is_blocked(*peer, env.now())) return drop(env, pkt, "blocked");
  if (!store_.initial_key()) return drop(env, pkt, "no_initial_key");

  charge(env, LedgerKind::Prf);
  const KeyMaterial peer_master = master_key(*store_.initial_key(), *peer);
  if (!authenticate(env, pkt, peer_master)) return;
  store_.remember_neighbor_master(*peer, peer_master);

  if (!store_.pairwise(*peer)) {
    charge(env, LedgerKind::Prf);
    const KeyMaterial k = *peer > id() ? pairwise_key(peer_master, id()) : pairwise_key(store_.own_master(), *peer);
    check_verified();
    store_.install_pairwise(*peer, k, env.now());
    ++seq_counter_;
    ++stats_.pairwise_installs;
    stats_.last_pairwise_install = at_done(env);
    env.trace(id(), "install_pairwise", Detail().add("peer", *peer).add("seq", seq_counter_).str());
  }
  if (!acked_.count(*peer)) send_ack(env, *peer);
}

void Node::distribute_cluster_key(Env& env) {
  const KeyMaterial cluster = KeyMaterial::random(env.rng());
  store_.set_cluster_sent(cluster);
  for (const auto& [peer, k] : store_.pairwise_keys()) {
    charge(env, LedgerKind::Enc);
    Packet pkt{PacketType::ClusterKey, id(), peer, payload::sealed(k, cluster.view(), next_nonce()), {}};
    charge(env, LedgerKind::Mac);
    pkt.sign(k);
    env.trace(id(), "cluster_tx", Detail().add("to", peer).str());
    env.transmit(id(), pkt, busy_);
  }
}

void Node::on_tmin_expired(Env& env) {
  store_.erase_bootstrap();
  env.trace(id(), "erase", Detail().add("neighbors", store_.pairwise_keys().size()).str());
  if (phase_ != NodePhase::Discovering) return;
  distribute_cluster_key(env);
  phase_ = NodePhase::Established;
  env.trace(id(), "established", Detail().add("neighbors", store_.pairwise_keys().size()).str());
  send_report(env);
}

void Node::on_cluster_key(Env& env, const Packet& pkt) {
  if (pkt.dst != id()) return drop(env, pkt, "not_addressed");
  auto k = store_.pairwise(pkt.src);
  if (!k) return drop(env, pkt, "no_pairwise");
  if (!authenticate(env, pkt, *k)) return;
  charge(env, LedgerKind::Enc);
  auto plain = payload::open(*k, pkt.payload, kKeySize);
  if (!plain) return drop(env, pkt, "malformed");
  check_verified();
  store_.install_cluster(pkt.src, KeyMaterial::from(*plain));
  ++seq_counter_;
  env.trace(id(), "install_cluster", Detail().add("peer", pkt.src).add("seq", seq_counter_).str());
}

void Node::periodic_check(Env& env) {
  if (phase_ == NodePhase::Revoked) return;
  if (compromised_ && !help_sent_) {
    const bool fired = std::uniform_real_distribution<double>(0.0, 1.0)(env.rng()) < config_.p_detect;
    env.trace(id(), "check", Detail().add("tamper", fired ? "detected" : "missed").str());
    if (fired) {
      Packet help{PacketType::Help, id(), kBaseStation, payload::id(id()), {}};
      charge(env, LedgerKind::Mac);
      help.sign(store_.individual());
      help_sent_ = true;
      stats_.help_sent_at = env.now();
      env.trace(id(), "help_tx", "");
      env.transmit(id(), help, busy_);
    }
  } else {
    env.trace(id(), "check", Detail().add("tamper", "none").str());
  }
  env.set_timer(id(), TimerKind::PeriodicCheck, env.now() + config_.tp);
}

void Node::on_alert(Env& env, const Packet& pkt) {
  if (pkt.payload.size() != 6) return drop(env, pkt, "malformed");
  const NodeId victim{get_u16(pkt.payload, 0)};
  const std::uint32_t seq = get_u32(pkt.payload, 2);
  if (seen_alerts_.count(seq)) return;
  if (!authenticate(env, pkt, store_.global())) return;
  seen_alerts_.insert(seq);
  env.trace(id(), "alert_rx", Detail().add("in_danger_id", victim).add("seq", seq).str());
  // Flood onward so nodes out of the base station's reach still hear it.
  env.transmit(id(), pkt, busy_);
  if (victim == id()) {
    phase_ = NodePhase::Revoked;
    env.trace(id(), "revoked", "");
    return;
  }
  const bool was_neighbor = store_.pairwise(victim).has_value();
  store_.revoke_peer(victim, env.now(), config_.effective_block_duration());
  env.trace(id(), "revoke",
            Detail().add("victim", victim).add("neighbor", was_neighbor ? 1 : 0)
                .add("until", env.now() + config_.effective_block_duration()).str());
  if (was_neighbor && phase_ == NodePhase::Established) distribute_cluster_key(env);
}

void Node::on_global_rekey(Env& env, const Packet& pkt) {
  if (pkt.dst != id() || pkt.src != kBaseStation) return drop(env, pkt, "not_addressed");
  if (pkt.payload.size() != 4 + kNonceSize + kKeySize) return drop(env, pkt, "malformed");
  if (!authenticate(env, pkt, store_.individual())) return;
  const std::uint32_t epoch = get_u32(pkt.payload, 0);
  if (epoch <= global_epoch_) return drop(env, pkt, "stale_epoch");
  charge(env, LedgerKind::Enc);
  auto plain = payload::open(store_.individual(), Bytes(pkt.payload.begin() + 4, pkt.payload.end()), kKeySize);
  check_verified();
  store_.set_global(KeyMaterial::from(*plain));
  global_epoch_ = epoch;
  ++seq_counter_;
  env.trace(id(), "install_global", Detail().add("epoch", epoch).add("seq", seq_counter_).str());
}

void Node::send_report(Env& env) {
  Bytes plain;
  put_u32(plain, seq_counter_);
  const auto digest = neighbor_digest(neighbors());
  plain.insert(plain.end(), digest.begin(), digest.end());
  charge(env, LedgerKind::Enc);
  Packet report{PacketType::Report, id(), kBaseStation, payload::sealed(store_.individual(), plain, next_nonce()), {}};
  charge(env, LedgerKind::Mac);
  report.sign(store_.individual());
  env.trace(id(), "report_tx", Detail().add("counter", seq_counter_).add("digest", to_hex(digest)).str());
  env.transmit(id(), report, busy_);
}

}  // namespace wsnkm
