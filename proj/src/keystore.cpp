#include "wsnkm/keystore.hpp"

#include <sstream>

namespace wsnkm {

StorageReport StorageReport::compute(std::size_t d, std::size_t l, std::size_t accounting_key_size) {
  StorageReport r;
  r.neighbors = d;
  r.chain_length = l;
  r.total_keys = l + d + 2 * d + 1 + 1;
  r.total_octets = r.total_keys * accounting_key_size;
  return r;
}

KeyStore KeyStore::preload(NodeId self, const Provisioning& p, const KeyMaterial& chain_seed) {
  KeyStore s;
  s.self_ = self;
  s.initial_ = p.initial;
  s.own_master_ = master_key(p.initial, self);
  s.individual_ = individual_key(p.base_master, self);
  s.global_ = p.global;
  s.chain_ = KeyChain::generate(chain_seed, p.chain_length);
  s.neighbor_masters_.emplace();
  return s;
}

std::optional<KeyMaterial> KeyStore::pairwise(NodeId peer) const {
  auto it = pairwise_.find(peer);
  if (it == pairwise_.end()) return std::nullopt;
  return it->second;
}

void KeyStore::install_pairwise(NodeId peer, const KeyMaterial& key, Ticks now) {
  if (is_blocked(peer, now)) throw BlockedPeer(peer);
  pairwise_[peer] = key;
}

std::optional<KeyMaterial> KeyStore::cluster_from(NodeId peer) const {
  auto it = cluster_received_.find(peer);
  if (it == cluster_received_.end()) return std::nullopt;
  return it->second;
}

void KeyStore::remember_neighbor_master(NodeId peer, const KeyMaterial& key) {
  if (neighbor_masters_) (*neighbor_masters_)[peer] = key;
}

std::optional<KeyMaterial> KeyStore::neighbor_master(NodeId peer) const {
  if (!neighbor_masters_) return std::nullopt;
  auto it = neighbor_masters_->find(peer);
  if (it == neighbor_masters_->end()) return std::nullopt;
  return it->second;
}

void KeyStore::erase_bootstrap() {
  initial_.reset();
  neighbor_masters_.reset();
}

void KeyStore::revoke_peer(NodeId victim, Ticks now, Ticks block_duration) {
  pairwise_.erase(victim);
  cluster_received_.erase(victim);
  if (neighbor_masters_) neighbor_masters_->erase(victim);
  blocklist_[victim] = now + block_duration;
}

bool KeyStore::is_blocked(NodeId peer, Ticks now) const {
  auto it = blocklist_.find(peer);
  return it != blocklist_.end() && now < it->second;
}

StorageReport KeyStore::storage_report(std::size_t accounting_key_size) const {
  return StorageReport::compute(pairwise_.size(), chain_.length(), accounting_key_size);
}

std::vector<KeyMaterial> KeyStore::all_keys() const {
  std::vector<KeyMaterial> keys;
  if (initial_) keys.push_back(*initial_);
  keys.push_back(own_master_);
  keys.push_back(individual_);
  keys.push_back(global_);
  if (cluster_sent_) keys.push_back(*cluster_sent_);
  for (const auto& link : chain_.links()) keys.push_back(link);
  for (const auto& [_, k] : pairwise_) keys.push_back(k);
  for (const auto& [_, k] : cluster_received_) keys.push_back(k);
  if (neighbor_masters_)
    for (const auto& [_, k] : *neighbor_masters_) keys.push_back(k);
  return keys;
}

std::string KeyStore::dump() const {
  const KeyMaterial absent{};
  auto hex = [](const KeyMaterial& k) { return to_hex(k.view()); };
  std::ostringstream os;
  os << "node=" << self_.value << '\n';
  os << "initial_key=" << hex(initial_.value_or(absent)) << '\n';
  os << "own_master=" << hex(own_master_) << '\n';
  os << "individual=" << hex(individual_) << '\n';
  os << "global=" << hex(global_) << '\n';
  os << "cluster_sent=" << hex(cluster_sent_.value_or(absent)) << '\n';
  os << "chain_length=" << chain_.length() << '\n';
  os << "chain_anchor=" << hex(chain_.length() ? chain_.anchor() : absent) << '\n';
  os << "neighbor_masters=" << (neighbor_masters_ ? "present" : "absent") << '\n';
  if (neighbor_masters_)
    for (const auto& [id, k] : *neighbor_masters_) os << "neighbor_master." << id.value << '=' << hex(k) << '\n';
  for (const auto& [id, k] : pairwise_) os << "pairwise." << id.value << '=' << hex(k) << '\n';
  for (const auto& [id, k] : cluster_received_) os << "cluster_received." << id.value << '=' << hex(k) << '\n';
  for (const auto& [id, t] : blocklist_) os << "blocked." << id.value << '=' << t << '\n';
  return os.str();
}

}  // namespace wsnkm
