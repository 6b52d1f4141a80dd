#include "wsnkm/simulator.hpp"

#include <algorithm>
#include <numeric>

#include "wsnkm/trace.hpp"

namespace wsnkm {

namespace {

constexpr Ticks kForgedAckDelay = 5000;
constexpr double kAttackerBaseGainDbm = -90.0;
constexpr double kClonePositionGainDbm = -40.0;

}  // namespace

Simulator::Simulator(Topology topology, NoiseTrace noise, SimConfig config)
    : config_(config), radio_(std::move(topology), std::move(noise), config.radio, config.seed), rng_(config.seed),
      ledger_(config.energy) {
  config_.protocol.validate();
  provisioning_.initial = KeyMaterial::random(rng_);
  provisioning_.base_master = KeyMaterial::random(rng_);
  provisioning_.global = KeyMaterial::random(rng_);
  provisioning_.chain_length = config_.chain_length;
}

void Simulator::add_node(NodeId id, Ticks boot_at) {
  if (id == kBaseStation || id == kBroadcast) throw std::invalid_argument("reserved node id");
  if (nodes_.count(id)) throw std::invalid_argument("duplicate node " + std::to_string(id.value));
  if (bs_) throw std::logic_error("nodes must be added before the first run()");
  const KeyMaterial chain_seed = KeyMaterial::random(rng_);
  nodes_.emplace(id, Node(KeyStore::preload(id, provisioning_, chain_seed), config_.protocol, boot_at));
  SimEvent ev;
  ev.kind = EventKind::Boot;
  ev.target = id;
  schedule(boot_at, std::move(ev));
}

void Simulator::add_action(const AdversaryAction& action) {
  actions_.push_back(action);
  SimEvent ev;
  ev.kind = EventKind::Adversary;
  ev.action = actions_.size() - 1;
  schedule(action.at, std::move(ev));
}

void Simulator::inject(const Packet& pkt, NodeId target, Ticks at) { inject_frame(pkt.encode(), target, at); }

void Simulator::inject_frame(Bytes frame, NodeId target, Ticks at) {
  if (at < now_) throw PastTime("inject at " + std::to_string(at) + " is before now " + std::to_string(now_));
  if (target != kBaseStation && !nodes_.count(target)) throw NoSuchNode(target);
  SimEvent ev;
  ev.kind = EventKind::Inject;
  ev.target = target;
  ev.frame = std::move(frame);
  schedule(at, std::move(ev));
}

void Simulator::schedule(Ticks at, SimEvent ev) {
  if (at < now_) {
    ++causality_violations_;
    at = now_;
  }
  queue_.push(at, std::move(ev));
}

std::size_t Simulator::run(Ticks until, std::size_t max_events) {
  if (!bs_) {
    std::map<NodeId, std::set<NodeId>> expected;
    for (const auto& [id, _] : nodes_) {
      auto& nbrs = expected[id];
      for (auto peer : radio_.topology().neighbors(id))
        if (nodes_.count(peer)) nbrs.insert(peer);
    }
    bs_ = std::make_unique<BaseStation>(provisioning_.base_master, provisioning_.global, std::move(expected),
                                        config_.protocol.compute);
  }
  std::size_t processed = 0;
  while (!queue_.empty() && queue_.top().time <= until && processed < max_events) {
    auto entry = queue_.pop();
    if (entry.time < now_) ++causality_violations_;
    now_ = entry.time;
    dispatch(entry.payload);
    ++processed;
  }
  for (const auto& [_, n] : nodes_) {
    check_erasure(n);
    if (config_.dump_keystores) dump_keystore(n);
  }
  return processed;
}

void Simulator::dispatch(const SimEvent& ev) {
  switch (ev.kind) {
    case EventKind::Boot: {
      auto& n = nodes_.at(ev.target);
      n.on_boot(*this);
      break;
    }
    case EventKind::Timer: {
      auto& n = nodes_.at(ev.target);
      n.on_timer(*this, ev.timer);
      check_erasure(n);
      if (config_.dump_keystores && ev.timer == TimerKind::PeriodicCheck) dump_keystore(n);
      break;
    }
    case EventKind::Deliver:
    case EventKind::Inject: deliver_frame(ev.target, ev.frame); break;
    case EventKind::Adversary: execute(actions_.at(ev.action)); break;
  }
}

void Simulator::deliver_frame(NodeId receiver, const Bytes& frame) {
  auto pkt = Packet::decode(frame);
  if (receiver == kBaseStation) {
    if (!pkt) return trace(kBaseStation, "drop", Detail().add("reason", "malformed").str());
    bs_->on_packet(*this, *pkt);
    return;
  }
  auto& n = nodes_.at(receiver);
  account({receiver, LedgerKind::Rx, frame.size()});
  if (!pkt) {
    trace(receiver, "drop", Detail().add("reason", "malformed").add("octets", frame.size()).str());
    return;
  }
  n.on_packet(*this, *pkt);
  check_erasure(n);
}

void Simulator::transmit(NodeId from, const Packet& pkt, Ticks delay) {
  const Ticks t = now_ + delay;
  Bytes frame = pkt.encode();
  if (from != kBaseStation) account({from, LedgerKind::Tx, frame.size()});
  air_log_.push_back({t, from, frame});
  trace(from, "tx",
        Detail().add("type", to_string(pkt.type)).add("dst", pkt.dst).add("octets", frame.size()).add("at", t).str());

  if (pkt.type == PacketType::Help)
    for (auto& rec : compromises_)
      if (rec.node == from && !rec.help_at) rec.help_at = now_;

  if (from == kBaseStation) {
    std::vector<NodeId> targets;
    if (pkt.dst == kBroadcast) {
      for (const auto& [peer, _] : radio_.topology().out_links(kBaseStation))
        if (nodes_.count(peer)) targets.push_back(peer);
      if (targets.empty())
        for (const auto& [id, _] : nodes_) targets.push_back(id);
    } else if (nodes_.count(pkt.dst)) {
      targets.push_back(pkt.dst);
    }
    for (auto target : targets) {
      SimEvent ev;
      ev.kind = EventKind::Deliver;
      ev.target = target;
      ev.transmitter = kBaseStation;
      ev.frame = frame;
      schedule(t + config_.bs_latency, std::move(ev));
    }
    return;
  }
  if (pkt.dst == kBaseStation) {
    SimEvent ev;
    ev.kind = EventKind::Deliver;
    ev.target = kBaseStation;
    ev.transmitter = from;
    ev.frame = std::move(frame);
    schedule(t + config_.bs_latency, std::move(ev));
    return;
  }
  radio_send(from, frame, pkt.dst, t);
}

void Simulator::radio_send(NodeId transmitter, const Bytes& frame, NodeId dst, Ticks at) {
  for (const auto& [receiver, _] : radio_.topology().out_links(transmitter)) {
    if (dst != kBroadcast && receiver != dst) continue;
    if (!nodes_.count(receiver)) continue;
    if (!radio_.delivered(transmitter, receiver, at)) {
      trace(transmitter, "lost", Detail().add("to", receiver).add("noise", radio_.noise_sample(receiver, at)).str());
      continue;
    }
    SimEvent ev;
    ev.kind = EventKind::Deliver;
    ev.target = receiver;
    ev.transmitter = transmitter;
    ev.frame = apply_alters(transmitter, receiver, at, frame);
    schedule(at + radio_.latency(frame.size()), std::move(ev));
  }
}

Bytes Simulator::apply_alters(NodeId src, NodeId dst, Ticks at, Bytes frame) const {
  for (const auto& a : actions_) {
    if (a.kind != AttackKind::Alter || a.link_src != src || a.link_dst != dst) continue;
    if (at < a.at || at - a.at >= a.duration) continue;
    if (a.offset < frame.size()) frame[a.offset] ^= a.mask;
  }
  return frame;
}

void Simulator::set_timer(NodeId node, TimerKind kind, Ticks at) {
  SimEvent ev;
  ev.kind = EventKind::Timer;
  ev.target = node;
  ev.timer = kind;
  schedule(at, std::move(ev));
}

void Simulator::trace(NodeId node, std::string_view ev, std::string_view detail) {
  trace_.push_back(format_trace(now_, node, ev, detail));
  if (ev == "revoke") {
    auto line = parse_trace_line(trace_.back());
    if (auto victim = line->get("victim")) {
      const std::pair<NodeId, NodeId> key{node, NodeId{static_cast<std::uint16_t>(std::stoul(*victim))}};
      revocations_.try_emplace(key, now_);
    }
  }
}

void Simulator::trace_line(std::string line) { trace_.push_back(std::move(line)); }

std::string Simulator::trace_text() const {
  std::string out;
  for (const auto& l : trace_) out.append(l).push_back('\n');
  return out;
}

const Node& Simulator::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NoSuchNode(id);
  return it->second;
}

void Simulator::check_erasure(const Node& n) {
  if (n.phase() == NodePhase::Preloaded) return;
  if (now_ <= n.boot_time() + config_.protocol.tmin) return;
  if (n.store().initial_key() || n.store().neighbor_masters()) {
    ++erasure_violations_;
    trace(n.id(), "erasure_violation", "");
  }
}

void Simulator::dump_keystore(const Node& n) {
  const auto& s = n.store();
  trace(n.id(), "keystore",
        Detail()
            .add("initial", to_hex(s.initial_key().value_or(KeyMaterial{}).view()))
            .add("neighbor_masters", s.neighbor_masters() ? "present" : "absent")
            .add("pairwise", s.pairwise_keys().size())
            .add("cluster_received", s.cluster_received().size())
            .add("boot", n.boot_time())
            .str());
}

void Simulator::execute(const AdversaryAction& a) {
  switch (a.kind) {
    case AttackKind::Compromise: {
      auto it = nodes_.find(a.node);
      if (it == nodes_.end()) return trace(a.node, "adversary", Detail().add("action", "compromise").add("result", "no_node").str());
      auto& n = it->second;
      if (n.phase() == NodePhase::Revoked)
        return trace(a.node, "adversary", Detail().add("action", "compromise").add("result", "noop_revoked").str());
      CompromiseRecord rec{a.node, now_, n.store(), n.store().bootstrap_erased(), std::nullopt, n.neighbors()};
      trace(a.node, "adversary",
            Detail().add("action", "compromise").add("post_erasure", rec.post_erasure ? 1 : 0).str());
      compromises_.push_back(std::move(rec));
      n.mark_compromised(now_);
      return;
    }
    case AttackKind::HelloFlood: {
      std::optional<KeyMaterial> kin;
      if (a.kin_from)
        for (const auto& rec : compromises_)
          if (rec.node == *a.kin_from && rec.snapshot.initial_key()) kin = rec.snapshot.initial_key();
      const KeyMaterial ack_key = kin ? master_key(*kin, a.fake_id) : KeyMaterial::random(rng_);
      trace(a.fake_id, "adversary",
            Detail().add("action", "hello_flood").add("boost", a.power_boost_db).add("insider", kin ? 1 : 0).str());
      const double gain = kAttackerBaseGainDbm + a.power_boost_db;
      for (const auto& [id, _] : nodes_) {
        if (id == a.fake_id) continue;
        Packet hello{PacketType::Hello, a.fake_id, kBroadcast, payload::id(a.fake_id), {}};
        Packet ack{PacketType::Ack, a.fake_id, id, payload::id(a.fake_id), {}};
        ack.sign(ack_key);
        if (radio_.delivered_with_gain(gain, id, now_))
          schedule(now_ + radio_.latency(hello.frame_size()), {EventKind::Inject, id, a.fake_id, {}, 0, hello.encode()});
        if (radio_.delivered_with_gain(gain, id, now_ + kForgedAckDelay))
          schedule(now_ + kForgedAckDelay, {EventKind::Inject, id, a.fake_id, {}, 0, ack.encode()});
      }
      return;
    }
    case AttackKind::Clone: {
      std::optional<KeyMaterial> master;
      for (const auto& rec : compromises_)
        if (rec.node == a.node) master = rec.snapshot.own_master();
      const KeyMaterial ack_key = master.value_or(KeyMaterial::random(rng_));
      trace(a.node, "adversary",
            Detail().add("action", "clone").add("position", a.position).add("keys", master ? 1 : 0).str());
      std::vector<std::pair<NodeId, double>> targets = radio_.topology().out_links(a.position);
      targets.emplace_back(a.position, kClonePositionGainDbm);
      for (const auto& [target, gain] : targets) {
        if (target == a.node || !nodes_.count(target)) continue;
        Packet hello{PacketType::Hello, a.node, kBroadcast, payload::id(a.node), {}};
        Packet ack{PacketType::Ack, a.node, target, payload::id(a.node), {}};
        ack.sign(ack_key);
        if (radio_.delivered_with_gain(gain, target, now_))
          schedule(now_ + radio_.latency(hello.frame_size()), {EventKind::Inject, target, a.node, {}, 0, hello.encode()});
        if (radio_.delivered_with_gain(gain, target, now_ + kForgedAckDelay))
          schedule(now_ + kForgedAckDelay, {EventKind::Inject, target, a.node, {}, 0, ack.encode()});
      }
      return;
    }
    case AttackKind::Alter:
      trace(a.link_src, "adversary",
            Detail().add("action", "alter").add("dst", a.link_dst).add("mask", static_cast<int>(a.mask)).str());
      return;
    case AttackKind::Replay: {
      for (auto it = air_log_.rbegin(); it != air_log_.rend(); ++it) {
        if (it->at > now_) continue;
        auto pkt = Packet::decode(it->frame);
        if (!pkt || pkt->type != a.replay_type || pkt->src != a.replay_src) continue;
        if (a.replay_dst && pkt->dst != *a.replay_dst) continue;
        const NodeId to = a.replay_to.value_or(pkt->dst);
        if (to == kBroadcast || (to != kBaseStation && !nodes_.count(to))) continue;
        trace(a.replay_src, "adversary",
              Detail().add("action", "replay").add("type", to_string(pkt->type)).add("to", to).str());
        schedule(now_, {EventKind::Inject, to, kBroadcast, {}, 0, it->frame});
        return;
      }
      trace(a.replay_src, "adversary", Detail().add("action", "replay").add("result", "nothing_recorded").str());
      return;
    }
  }
}

InvariantCounters Simulator::invariants() const {
  InvariantCounters c;
  c.erasure_violations = erasure_violations_;
  c.causality_violations = causality_violations_;
  for (const auto& [_, n] : nodes_) c.installs_without_verify += n.stats().installs_without_verify;
  return c;
}

std::set<NodeId> Simulator::node_ids() const {
  std::set<NodeId> ids;
  for (const auto& [id, _] : nodes_) ids.insert(id);
  return ids;
}

NetworkKeys Simulator::network_keys(const std::set<NodeId>& exclude) const {
  NetworkKeys net;
  for (const auto& [id, n] : nodes_)
    if (!exclude.count(id)) net.add(n.store());
  return net;
}

std::size_t Simulator::adjacent_pairs() const {
  std::size_t count = 0;
  for (const auto& [a, b] : radio_.topology().adjacent_pairs())
    if (nodes_.count(a) && nodes_.count(b)) ++count;
  return count;
}

std::size_t Simulator::agreeing_adjacent_pairs() const {
  std::size_t count = 0;
  for (const auto& [a, b] : radio_.topology().adjacent_pairs()) {
    if (!nodes_.count(a) || !nodes_.count(b)) continue;
    auto ka = nodes_.at(a).store().pairwise(b);
    auto kb = nodes_.at(b).store().pairwise(a);
    if (ka && kb && *ka == *kb) ++count;
  }
  return count;
}

std::size_t Simulator::disagreeing_pairs() const {
  std::size_t count = 0;
  for (const auto& [a, n] : nodes_)
    for (const auto& [b, k] : n.store().pairwise_keys()) {
      if (!(a < b) || !nodes_.count(b)) continue;
      auto other = nodes_.at(b).store().pairwise(a);
      if (other && *other != k) ++count;
    }
  return count;
}

std::size_t Simulator::installs_for(NodeId id) const {
  std::size_t count = 0;
  const std::string peer = std::to_string(id.value);
  for (const auto& l : trace_) {
    if (l.find("ev=install_pairwise") == std::string::npos) continue;
    auto line = parse_trace_line(l);
    if (line && line->get("peer") == peer) ++count;
  }
  return count;
}

DetectionReport Simulator::evaluate_detection(const CompromiseRecord& rec) const {
  DetectionReport r;
  r.victim = rec.node;
  r.compromise_at = rec.at;
  if (rec.help_at) r.detect_latency = *rec.help_at - rec.at;

  std::set<NodeId> compromised;
  for (const auto& c : compromises_) compromised.insert(c.node);

  std::size_t honest = 0, covered = 0;
  std::optional<Ticks> last;
  for (auto nb : rec.neighbors_at_capture) {
    if (compromised.count(nb)) continue;
    ++honest;
    auto it = revocations_.find({nb, rec.node});
    if (it == revocations_.end()) continue;
    ++covered;
    last = std::max(last.value_or(0), it->second);
  }
  r.coverage = honest ? static_cast<double>(covered) / static_cast<double>(honest) : 1.0;
  if (rec.help_at && last && covered == honest) r.revocation_latency = *last - *rec.help_at;

  const auto result = derivable_traffic_keys(rec.snapshot.all_keys(), network_keys(compromised), node_ids());
  r.residual_pairs = result.pairwise;
  r.residual_empty = result.empty();
  return r;
}

std::vector<DetectionReport> Simulator::evaluate_detection() const {
  std::vector<DetectionReport> out;
  for (const auto& rec : compromises_) out.push_back(evaluate_detection(rec));
  return out;
}

ExperimentResult summarize(const Simulator& sim) {
  ExperimentResult r;
  r.n = sim.nodes().size();
  r.seed = sim.config().seed;
  const auto adjacent = sim.adjacent_pairs();
  r.success_rate = adjacent ? static_cast<double>(sim.agreeing_adjacent_pairs()) / static_cast<double>(adjacent) : 1.0;
  double sum = 0.0;
  for (const auto& [id, n] : sim.nodes()) {
    if (!n.stats().last_pairwise_install) continue;
    const Ticks t = *n.stats().last_pairwise_install - n.boot_time();
    r.pairwise_completion_us[id] = t;
    sum += static_cast<double>(t);
  }
  if (!r.pairwise_completion_us.empty()) r.mean_pairwise_us = sum / static_cast<double>(r.pairwise_completion_us.size());
  r.individual_key_us = sim.base_station().individual_key_latency();
  r.max_msgs = sim.ledger().max_frames_received();
  r.energy_units = sim.ledger().total_energy();
  return r;
}

}  // namespace wsnkm
