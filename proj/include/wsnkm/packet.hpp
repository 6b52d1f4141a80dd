#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "wsnkm/crypto.hpp"
#include "wsnkm/types.hpp"

namespace wsnkm {

enum class PacketType : std::uint8_t {
  Hello = 0x01,
  Ack = 0x02,
  ClusterKey = 0x03,
  Data = 0x04,
  Help = 0x05,
  Alert = 0x06,
  Report = 0x07,
  GlobalRekey = 0x08,
};

std::string_view to_string(PacketType t);
std::optional<PacketType> packet_type_from_string(std::string_view name);

// Wire frame: [type:1][src:2][dst:2][len:1][payload:len][mac:8], big-endian.
struct Packet {
  static constexpr std::size_t kHeaderSize = 6;
  static constexpr std::size_t kMaxPayload = 64;
  static constexpr std::size_t kMaxFrame = kHeaderSize + kMaxPayload + kMacSize;

  PacketType type = PacketType::Hello;
  NodeId src;
  NodeId dst;
  Bytes payload;
  MacTag mac;  // all-zero on unauthenticated frames

  std::size_t frame_size() const { return kHeaderSize + payload.size() + kMacSize; }

  // Header plus payload; the octets covered by the MAC.
  Bytes authenticated_bytes() const;
  Bytes encode() const;
  // nullopt on any framing violation.
  static std::optional<Packet> decode(ByteView frame);

  void sign(const KeyMaterial& key) { mac = wsnkm::mac(key, authenticated_bytes()); }
  bool verify_with(const KeyMaterial& key) const { return wsnkm::verify(key, authenticated_bytes(), mac); }

  bool operator==(const Packet&) const = default;
};

}  // namespace wsnkm
