#include "wsnkm/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <algorithm>
#include <stdexcept>

namespace wsnkm {

namespace {

template <typename T>
T truncate_into(const std::uint8_t* data) {
  T out;
  std::copy_n(data, T::size(), out.bytes.begin());
  return out;
}

}  // namespace

KeyMaterial KeyMaterial::from(ByteView b) {
  if (b.size() != kKeySize) throw std::invalid_argument("key material must be 16 octets");
  return truncate_into<KeyMaterial>(b.data());
}

KeyMaterial KeyMaterial::random(std::mt19937_64& rng) {
  KeyMaterial k;
  do {
    for (std::size_t i = 0; i < kKeySize; i += 8) {
      auto word = rng();
      for (std::size_t j = 0; j < 8; ++j) k.bytes[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
    }
  } while (k.is_zero());
  return k;
}

MacTag MacTag::from(ByteView b) {
  if (b.size() != kMacSize) throw std::invalid_argument("mac tag must be 8 octets");
  return truncate_into<MacTag>(b.data());
}

std::array<std::uint8_t, 32> hmac_sha256(ByteView key, ByteView message) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(),
       out.data(), &len);
  return out;
}

KeyMaterial prf(const KeyMaterial& key, ByteView input) {
  auto full = hmac_sha256(key.view(), input);
  return truncate_into<KeyMaterial>(full.data());
}

KeyMaterial derive(Domain domain, const KeyMaterial& key, NodeId id) {
  const std::array<std::uint8_t, 3> input{static_cast<std::uint8_t>(domain),
                                          static_cast<std::uint8_t>(id.value >> 8),
                                          static_cast<std::uint8_t>(id.value)};
  return prf(key, input);
}

KeyMaterial pairwise_key(const KeyMaterial& higher_master, NodeId lower) {
  return derive(Domain::Pairwise, higher_master, lower);
}

MacTag mac(const KeyMaterial& key, ByteView message) {
  Bytes input;
  input.reserve(message.size() + 1);
  input.push_back(static_cast<std::uint8_t>(Domain::Mac));
  input.insert(input.end(), message.begin(), message.end());
  auto full = hmac_sha256(key.view(), input);
  return truncate_into<MacTag>(full.data());
}

bool verify(const KeyMaterial& key, ByteView message, const MacTag& tag) {
  const MacTag expected = mac(key, message);
  return CRYPTO_memcmp(expected.bytes.data(), tag.bytes.data(), kMacSize) == 0;
}

Bytes encrypt(const KeyMaterial& key, ByteView plaintext, const Nonce& nonce) {
  Bytes out(plaintext.begin(), plaintext.end());
  std::array<std::uint8_t, 1 + kNonceSize + 4> block_input{};
  block_input[0] = static_cast<std::uint8_t>(Domain::Stream);
  std::copy(nonce.begin(), nonce.end(), block_input.begin() + 1);
  for (std::size_t offset = 0, block = 0; offset < out.size(); offset += kKeySize, ++block) {
    for (int s = 0; s < 4; ++s)
      block_input[1 + kNonceSize + s] = static_cast<std::uint8_t>(block >> (24 - 8 * s));
    const KeyMaterial pad = prf(key, block_input);
    for (std::size_t i = 0; i < kKeySize && offset + i < out.size(); ++i) out[offset + i] ^= pad.bytes[i];
  }
  return out;
}

Nonce make_nonce(std::uint64_t counter) {
  Nonce n{};
  for (std::size_t i = 0; i < kNonceSize; ++i) n[i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
  return n;
}

KeyMaterial one_way(const KeyMaterial& key) {
  std::array<std::uint8_t, 1 + kKeySize> input{};
  input[0] = static_cast<std::uint8_t>(Domain::Chain);
  std::copy(key.bytes.begin(), key.bytes.end(), input.begin() + 1);
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest{};
  SHA256(input.data(), input.size(), digest.data());
  return truncate_into<KeyMaterial>(digest.data());
}

KeyChain KeyChain::generate(const KeyMaterial& seed, std::size_t length) {
  if (length == 0) throw std::invalid_argument("key chain length must be at least 1");
  KeyChain chain;
  chain.links_.resize(length);
  chain.links_[length - 1] = one_way(seed);
  for (std::size_t i = length - 1; i > 0; --i) chain.links_[i - 1] = one_way(chain.links_[i]);
  return chain;
}

bool KeyChain::verify() const {
  for (std::size_t i = 1; i < links_.size(); ++i)
    if (one_way(links_[i]) != links_[i - 1]) return false;
  return true;
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0x0F]);
  }
  return s;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  return out;
}

}  // namespace wsnkm
