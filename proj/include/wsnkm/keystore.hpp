#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsnkm/crypto.hpp"
#include "wsnkm/types.hpp"

namespace wsnkm {

// Thrown when a pairwise key is offered for a peer that is on the active blocklist.
class BlockedPeer : public std::runtime_error {
 public:
  explicit BlockedPeer(NodeId peer)
      : std::runtime_error("peer " + std::to_string(peer.value) + " is blocklisted"), peer_(peer) {}
  NodeId peer() const { return peer_; }

 private:
  NodeId peer_;
};

// What the controller loads into a node before deployment.
struct Provisioning {
  KeyMaterial initial;      // Kin, network wide
  KeyMaterial base_master;  // Km, never leaves the controller
  KeyMaterial global;
  std::size_t chain_length = 20;
};

struct StorageReport {
  std::size_t neighbors = 0;     // D
  std::size_t chain_length = 0;  // L
  std::size_t total_keys = 0;
  std::size_t total_octets = 0;

  // L + D + 2D + 1 + 1: chain, received cluster keys, pairwise plus per-neighbor
  // wrapped state, individual key, global key.
  static StorageReport compute(std::size_t d, std::size_t l, std::size_t accounting_key_size);
};

class KeyStore {
 public:
  // own_master = prf(Kin, self); individual = prf(Km, self).
  static KeyStore preload(NodeId self, const Provisioning& p, const KeyMaterial& chain_seed);

  NodeId self() const { return self_; }

  const std::optional<KeyMaterial>& initial_key() const { return initial_; }
  const KeyMaterial& own_master() const { return own_master_; }
  const KeyMaterial& individual() const { return individual_; }
  const KeyMaterial& global() const { return global_; }
  void set_global(const KeyMaterial& k) { global_ = k; }
  const KeyChain& chain() const { return chain_; }

  const std::optional<KeyMaterial>& cluster_sent() const { return cluster_sent_; }
  void set_cluster_sent(const KeyMaterial& k) { cluster_sent_ = k; }

  std::optional<KeyMaterial> pairwise(NodeId peer) const;
  const std::map<NodeId, KeyMaterial>& pairwise_keys() const { return pairwise_; }
  void install_pairwise(NodeId peer, const KeyMaterial& key, Ticks now);

  std::optional<KeyMaterial> cluster_from(NodeId peer) const;
  const std::map<NodeId, KeyMaterial>& cluster_received() const { return cluster_received_; }
  void install_cluster(NodeId peer, const KeyMaterial& key) { cluster_received_[peer] = key; }

  // Transient, discovery only. Ignored once the bootstrap material is erased.
  void remember_neighbor_master(NodeId peer, const KeyMaterial& key);
  const std::optional<std::map<NodeId, KeyMaterial>>& neighbor_masters() const { return neighbor_masters_; }
  std::optional<KeyMaterial> neighbor_master(NodeId peer) const;

  // Drops Kin and every neighbor master key. Idempotent.
  void erase_bootstrap();
  bool bootstrap_erased() const { return !initial_.has_value(); }

  void revoke_peer(NodeId victim, Ticks now, Ticks block_duration);
  bool is_blocked(NodeId peer, Ticks now) const;
  const std::map<NodeId, Ticks>& blocklist() const { return blocklist_; }

  StorageReport storage_report(std::size_t accounting_key_size) const;

  // Every key currently held, in no particular order.
  std::vector<KeyMaterial> all_keys() const;

  // Key-value text, one item per line, keys hex encoded, absent keys all-zero.
  std::string dump() const;

 private:
  NodeId self_;
  std::optional<KeyMaterial> initial_;
  KeyMaterial own_master_;
  KeyMaterial individual_;
  KeyMaterial global_;
  KeyChain chain_;
  std::optional<KeyMaterial> cluster_sent_;
  std::map<NodeId, KeyMaterial> pairwise_;
  std::map<NodeId, KeyMaterial> cluster_received_;
  std::optional<std::map<NodeId, KeyMaterial>> neighbor_masters_;
  std::map<NodeId, Ticks> blocklist_;
};

}  // namespace wsnkm
