#include "wsnkm/packet.hpp"

#include <array>
#include <stdexcept>

namespace wsnkm {

namespace {

constexpr std::array<std::string_view, 8> kNames{"HELLO", "ACK",    "CLUSTER_KEY", "DATA",
                                                 "HELP",  "ALERT", "REPORT",      "GLOBAL_REKEY"};

}  // namespace

std::string_view to_string(PacketType t) {
  const auto i = static_cast<std::size_t>(t);
  return (i >= 1 && i <= kNames.size()) ? kNames[i - 1] : "UNKNOWN";
}

std::optional<PacketType> packet_type_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<PacketType>(i + 1);
  return std::nullopt;
}

Bytes Packet::authenticated_bytes() const {
  if (payload.size() > kMaxPayload) throw std::length_error("payload exceeds 64 octets");
  Bytes out;
  out.reserve(kHeaderSize + payload.size());
  out.push_back(static_cast<std::uint8_t>(type));
  put_u16(out, src.value);
  put_u16(out, dst.value);
  out.push_back(static_cast<std::uint8_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Bytes Packet::encode() const {
  Bytes out = authenticated_bytes();
  out.insert(out.end(), mac.bytes.begin(), mac.bytes.end());
  return out;
}

std::optional<Packet> Packet::decode(ByteView frame) {
  if (frame.size() < kHeaderSize + kMacSize) return std::nullopt;
  const auto type = frame[0];
  if (type < 0x01 || type > 0x08) return std::nullopt;
  const std::size_t len = frame[5];
  if (len > kMaxPayload || frame.size() != kHeaderSize + len + kMacSize) return std::nullopt;
  Packet p;
  p.type = static_cast<PacketType>(type);
  p.src = NodeId{get_u16(frame, 1)};
  p.dst = NodeId{get_u16(frame, 3)};
  p.payload.assign(frame.begin() + kHeaderSize, frame.begin() + kHeaderSize + len);
  p.mac = MacTag::from(frame.subspan(kHeaderSize + len, kMacSize));
  return p;
}

}  // namespace wsnkm
