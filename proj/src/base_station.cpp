#include "wsnkm/base_station.hpp"

#include <algorithm>
#include <stdexcept>

#include "wsnkm/trace.hpp"

namespace wsnkm {

BaseStation::BaseStation(KeyMaterial master, KeyMaterial global, std::map<NodeId, std::set<NodeId>> expected_neighbors,
                         ComputeCosts compute)
    : master_(master), global_(global), expected_(std::move(expected_neighbors)), compute_(compute) {
}

KeyMaterial BaseStation::individual_key(NodeId u) const {
  if (u == kBaseStation) throw std::invalid_argument("node id 0 is the base station");
  return wsnkm::individual_key(master_, u);
}

KeyMaterial BaseStation::derive_for(Env& env, NodeId u, Ticks& ready_delay) {
  const Ticks start = std::max(env.now(), busy_until_);
  busy_until_ = start + compute_.prf + compute_.mac;
  ready_delay = busy_until_ - env.now();
  return individual_key(u);
}

void BaseStation::on_packet(Env& env, const Packet& pkt) {
  switch (pkt.type) {
    case PacketType::Help: on_help(env, pkt); break;
    case PacketType::Report: on_report(env, pkt); break;
    default:
      env.trace(kBaseStation, "drop", Detail().add("type", to_string(pkt.type)).add("reason", "unsupported").str());
  }
}

void BaseStation::on_help(Env& env, const Packet& pkt) {
  auto sender = payload::read_id(pkt.payload);
  if (!sender || *sender != pkt.src || *sender == kBaseStation) {
    env.trace(kBaseStation, "drop", Detail().add("type", "HELP").add("reason", "malformed").str());
    return;
  }
  Ticks delay = 0;
  const KeyMaterial ik = derive_for(env, *sender, delay);
  if (!pkt.verify_with(ik)) {
    ++bad_mac_;
    env.trace(kBaseStation, "drop", Detail().add("type", "HELP").add("src", *sender).add("reason", "bad_mac").str());
    return;
  }
  env.trace(kBaseStation, "help_rx", Detail().add("node", *sender).str());
  const bool first = !revoked_.count(*sender);
  revoke(env, *sender, delay, first);
}

void BaseStation::revoke(Env& env, NodeId victim, Ticks delay, bool rekey) {
  revoked_.insert(victim);
  Packet alert{PacketType::Alert, kBaseStation, kBroadcast, payload::alert(victim, ++alert_seq_), {}};
  alert.sign(global_);
  env.trace(kBaseStation, "alert_tx", Detail().add("in_danger_id", victim).add("seq", alert_seq_).str());
  env.transmit(kBaseStation, alert, delay);
  if (rekey) global_rekey(env);
}

void BaseStation::global_rekey(Env& env) {
  if (revoked_.empty()) return;
  global_ = KeyMaterial::random(env.rng());
  ++epoch_;
  env.trace(kBaseStation, "rekey", Detail().add("epoch", epoch_).add("revoked", revoked_.size()).str());
  for (const auto& [u, _] : expected_) {
    if (revoked_.count(u)) continue;
    Ticks delay = 0;
    const KeyMaterial ik = derive_for(env, u, delay);
    Bytes body;
    put_u32(body, epoch_);
    auto sealed = payload::sealed(ik, global_.view(), make_nonce(++nonce_counter_));
    body.insert(body.end(), sealed.begin(), sealed.end());
    Packet pkt{PacketType::GlobalRekey, kBaseStation, u, std::move(body), {}};
    pkt.sign(ik);
    ++rekey_unicasts_;
    env.transmit(kBaseStation, pkt, delay);
  }
}

std::optional<Verdict> BaseStation::on_report(Env& env, const Packet& pkt) {
  const NodeId sender = pkt.src;
  if (sender == kBaseStation) return std::nullopt;
  const Ticks arrival = env.now();
  Ticks delay = 0;
  const KeyMaterial ik = derive_for(env, sender, delay);
  individual_latency_[sender] = delay;
  if (!pkt.verify_with(ik)) {
    ++bad_mac_;
    env.trace(kBaseStation, "drop", Detail().add("type", "REPORT").add("src", sender).add("reason", "bad_mac").str());
    return std::nullopt;
  }
  auto plain = payload::open(ik, pkt.payload, 4 + 8);
  if (!plain) {
    env.trace(kBaseStation, "drop", Detail().add("type", "REPORT").add("src", sender).add("reason", "malformed").str());
    return std::nullopt;
  }
  ReportEntry entry;
  entry.counter = get_u32(*plain, 0);
  std::copy_n(plain->begin() + 4, entry.digest.size(), entry.digest.begin());
  entry.arrival = arrival;
  report_log_[sender] = entry;

  Verdict v{sender, true, "ok", arrival + delay};
  auto expected = expected_.find(sender);
  if (expected == expected_.end()) {
    v = {sender, false, "unknown_node", v.at};
  } else {
    // Neighbours revoked before the report legitimately dropped out of the digest;
    // every rekey so far may have added one global install.
    // A report may still list a revoked neighbour when it crossed the ALERT.
    std::set<NodeId> live;
    std::vector<NodeId> gone;
    for (auto n : expected->second) {
      if (revoked_.count(n)) gone.push_back(n);
      else live.insert(n);
    }
    bool digest_ok = false;
    const std::size_t subsets = gone.size() < 12 ? std::size_t{1} << gone.size() : 1;
    for (std::size_t mask = 0; mask < subsets && !digest_ok; ++mask) {
      std::set<NodeId> candidate = live;
      for (std::size_t i = 0; i < gone.size(); ++i)
        if (mask >> i & 1) candidate.insert(gone[i]);
      digest_ok = entry.digest == neighbor_digest(candidate);
    }
    const std::size_t d = expected->second.size();
    const std::size_t slack = d;
    if (!digest_ok)
      v = {sender, false, "digest_mismatch", v.at};
    else if (entry.counter < live.size())
      v = {sender, false, "counter_low", v.at};
    else if (entry.counter > d + slack + epoch_)
      v = {sender, false, "counter_high", v.at};
  }
  verdicts_.push_back(v);
  env.trace_line(format_verdict(env.now(), sender, v.consistent, v.reason));
  if (!v.consistent && !revoked_.count(sender)) revoke(env, sender, delay, true);
  return v;
}

}  // namespace wsnkm
