#include "wsnkm/trace.hpp"

#include <charconv>

namespace wsnkm {

namespace {

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

bool strip_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

std::string_view next_token(std::string_view& s) {
  auto sp = s.find(' ');
  auto tok = s.substr(0, sp);
  s = sp == std::string_view::npos ? std::string_view{} : s.substr(sp + 1);
  return tok;
}

}  // namespace

std::string format_trace(Ticks t, NodeId node, std::string_view ev, std::string_view detail) {
  std::string s = "t=" + std::to_string(t) + " node=" + std::to_string(node.value) + " ev=";
  s.append(ev).append(" detail=").append(detail);
  return s;
}

std::string format_verdict(Ticks t, NodeId node, bool consistent, std::string_view reason) {
  std::string s = "t=" + std::to_string(t) + " bs verdict node=" + std::to_string(node.value) + ' ';
  s.append(consistent ? "CONSISTENT" : "SUSPICIOUS").append(" reason=").append(reason);
  return s;
}

std::optional<TraceLine> parse_trace_line(std::string_view line) {
  TraceLine out;
  auto tok = next_token(line);
  if (!strip_prefix(tok, "t=") || !parse_uint(tok, out.t)) return std::nullopt;
  tok = next_token(line);
  if (tok == "bs") {
    if (next_token(line) != "verdict") return std::nullopt;
    tok = next_token(line);
    std::uint16_t id = 0;
    if (!strip_prefix(tok, "node=") || !parse_uint(tok, id)) return std::nullopt;
    out.node = NodeId{id};
    out.ev = "verdict";
    out.detail["verdict"] = std::string(next_token(line));
    tok = next_token(line);
    if (!strip_prefix(tok, "reason=")) return std::nullopt;
    out.detail["reason"] = std::string(tok);
    return out;
  }
  std::uint16_t id = 0;
  if (!strip_prefix(tok, "node=") || !parse_uint(tok, id)) return std::nullopt;
  out.node = NodeId{id};
  tok = next_token(line);
  if (!strip_prefix(tok, "ev=")) return std::nullopt;
  out.ev = std::string(tok);
  if (!strip_prefix(line, "detail=")) return std::nullopt;
  while (!line.empty()) {
    auto comma = line.find(',');
    auto kv = line.substr(0, comma);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    out.detail[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
    line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
  }
  return out;
}

}  // namespace wsnkm
