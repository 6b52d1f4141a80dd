#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace wsnkm {

// Simulated time. One tick is one microsecond.
using Ticks = std::uint64_t;

constexpr Ticks kTicksPerSecond = 1'000'000;

// Sensor node identifier. 0 is the base station, 0xFFFF the broadcast address.
struct NodeId {
  std::uint16_t value{0};

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint16_t v) : value(v) {}

  constexpr auto operator<=>(const NodeId&) const = default;
};

constexpr NodeId kBaseStation{0};
constexpr NodeId kBroadcast{0xFFFF};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

}  // namespace wsnkm

template <>
struct std::hash<wsnkm::NodeId> {
  std::size_t operator()(wsnkm::NodeId id) const noexcept { return id.value; }
};
