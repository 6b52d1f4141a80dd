#pragma once

// Trace line format: `t=<ticks> node=<id> ev=<name> detail=<k=v,...>`.
// Base-station verdicts use `t=<ticks> bs verdict node=<id> <CONSISTENT|SUSPICIOUS> reason=<code>`.

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsnkm/types.hpp"

namespace wsnkm {

class Detail {
 public:
  template <typename T>
  Detail& add(std::string_view key, const T& value) {
    if (!text_.empty()) text_ += ',';
    std::ostringstream os;
    os << value;
    text_.append(key).append("=").append(os.str());
    return *this;
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

struct TraceLine {
  Ticks t = 0;
  NodeId node;
  std::string ev;
  std::map<std::string, std::string> detail;

  std::optional<std::string> get(const std::string& key) const {
    auto it = detail.find(key);
    if (it == detail.end()) return std::nullopt;
    return it->second;
  }
};

std::string format_trace(Ticks t, NodeId node, std::string_view ev, std::string_view detail);
std::string format_verdict(Ticks t, NodeId node, bool consistent, std::string_view reason);

// Parses event lines; verdict lines parse with ev="verdict" and detail keys
// "verdict" and "reason". Returns nullopt for anything else.
std::optional<TraceLine> parse_trace_line(std::string_view line);

}  // namespace wsnkm
