#pragma once

// Symmetric primitives for the key hierarchy: keyed PRF, MAC, a length-preserving
// stream cipher and the one-way key chain. Everything here is a pure function.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wsnkm/types.hpp"

namespace wsnkm {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

constexpr std::size_t kKeySize = 16;
constexpr std::size_t kMacSize = 8;
constexpr std::size_t kNonceSize = 8;

template <std::size_t N>
struct FixedBytes {
  std::array<std::uint8_t, N> bytes{};

  static constexpr std::size_t size() { return N; }
  bool is_zero() const {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }
  ByteView view() const { return {bytes.data(), bytes.size()}; }
  auto operator<=>(const FixedBytes&) const = default;
};

// All-zero is reserved as the "absent" sentinel in dumps.
struct KeyMaterial : FixedBytes<kKeySize> {
  static KeyMaterial from(ByteView b);
  // Fresh random key from a simulation RNG; never all-zero.
  static KeyMaterial random(std::mt19937_64& rng);
};

struct MacTag : FixedBytes<kMacSize> {
  static MacTag from(ByteView b);
};

using Nonce = std::array<std::uint8_t, kNonceSize>;

// Prefix octets separating every use of the PRF.
enum class Domain : std::uint8_t {
  Individual = 0x01,
  Master = 0x02,
  Pairwise = 0x03,
  ClusterWrap = 0x04,
  Mac = 0x05,
  Stream = 0x06,
  Chain = 0x07,
  Digest = 0x08,
};

// Raw HMAC-SHA256 (full 32 octets). Exposed for known-answer tests.
std::array<std::uint8_t, 32> hmac_sha256(ByteView key, ByteView message);

// Keyed PRF, HMAC-SHA256 truncated to kKeySize.
KeyMaterial prf(const KeyMaterial& key, ByteView input);

// prf(key, domain || encode(id)), id encoded as 2 octets big-endian.
KeyMaterial derive(Domain domain, const KeyMaterial& key, NodeId id);

inline KeyMaterial master_key(const KeyMaterial& initial, NodeId id) {
  return derive(Domain::Master, initial, id);
}
inline KeyMaterial individual_key(const KeyMaterial& km, NodeId id) {
  return derive(Domain::Individual, km, id);
}
// Canonical pairwise key: PRF under the higher id's master key over the lower id.
KeyMaterial pairwise_key(const KeyMaterial& higher_master, NodeId lower);

MacTag mac(const KeyMaterial& key, ByteView message);
// Constant-time comparison.
bool verify(const KeyMaterial& key, ByteView message, const MacTag& tag);

Bytes encrypt(const KeyMaterial& key, ByteView plaintext, const Nonce& nonce);
inline Bytes decrypt(const KeyMaterial& key, ByteView ciphertext, const Nonce& nonce) {
  return encrypt(key, ciphertext, nonce);
}

Nonce make_nonce(std::uint64_t counter);

// The chain's one-way function: SHA-256(0x07 || key) truncated.
KeyMaterial one_way(const KeyMaterial& key);

class KeyChain {
 public:
  // links[L-1] = one_way(seed), links[i-1] = one_way(links[i]). links[0] is the anchor.
  static KeyChain generate(const KeyMaterial& seed, std::size_t length);

  KeyChain() = default;
  std::size_t length() const { return links_.size(); }
  const KeyMaterial& anchor() const { return links_.front(); }
  const KeyMaterial& at(std::size_t i) const { return links_.at(i); }
  const std::vector<KeyMaterial>& links() const { return links_; }
  bool verify() const;

 private:
  std::vector<KeyMaterial> links_;
};

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

inline void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}
inline std::uint16_t get_u16(ByteView b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}
inline std::uint32_t get_u32(ByteView b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

}  // namespace wsnkm
