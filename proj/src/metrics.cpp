#include "wsnkm/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wsnkm {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename T>
T parse_number(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::invalid_argument("bad number '" + std::string(s) + "' in results");
  return v;
}

}  // namespace

LedgerKind ledger_kind_from_string(std::string_view name) {
  if (name == "tx") return LedgerKind::Tx;
  if (name == "rx") return LedgerKind::Rx;
  if (name == "mac" || name == "verify") return LedgerKind::Mac;
  if (name == "prf") return LedgerKind::Prf;
  if (name == "enc" || name == "dec") return LedgerKind::Enc;
  return LedgerKind::Unknown;
}

void EnergyLedger::record(const LedgerEvent& ev) {
  if (ev.kind == LedgerKind::Unknown) {
    ++warnings_;
    return;
  }
  auto& c = nodes_[ev.node];
  switch (ev.kind) {
    case LedgerKind::Tx:
      c.tx_octets += ev.octets;
      ++c.frames_tx;
      break;
    case LedgerKind::Rx:
      c.rx_octets += ev.octets;
      ++c.frames_rx;
      break;
    case LedgerKind::Mac: ++c.mac_ops; break;
    case LedgerKind::Prf: ++c.prf_ops; break;
    case LedgerKind::Enc: ++c.enc_ops; break;
    case LedgerKind::Unknown: break;
  }
}

const NodeCounters& EnergyLedger::counters(NodeId node) const {
  static const NodeCounters kEmpty{};
  auto it = nodes_.find(node);
  return it == nodes_.end() ? kEmpty : it->second;
}

double EnergyLedger::total_energy() const {
  double sum = 0.0;
  for (const auto& [_, c] : nodes_) sum += c.energy(costs_);
  return sum;
}

std::uint64_t EnergyLedger::total_tx_octets() const {
  std::uint64_t sum = 0;
  for (const auto& [_, c] : nodes_) sum += c.tx_octets;
  return sum;
}

std::uint64_t EnergyLedger::total_rx_octets() const {
  std::uint64_t sum = 0;
  for (const auto& [_, c] : nodes_) sum += c.rx_octets;
  return sum;
}

std::uint64_t EnergyLedger::max_frames_received() const {
  std::uint64_t m = 0;
  for (const auto& [_, c] : nodes_) m = std::max(m, c.frames_rx);
  return m;
}

std::string to_csv(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("no results to export");
  std::ostringstream os;
  os << kResultCsvHeader << '\n';
  for (const auto& r : results)
    os << r.n << ',' << r.seed << ',' << fmt_double(r.success_rate) << ',' << fmt_double(r.mean_pairwise_us) << ','
       << r.max_msgs << ',' << fmt_double(r.energy_units) << '\n';
  return os.str();
}

std::string to_json(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("no results to export");
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["n"] = r.n;
    row["seed"] = r.seed;
    row["success_rate"] = r.success_rate;
    row["mean_pairwise_us"] = r.mean_pairwise_us;
    row["max_msgs"] = r.max_msgs;
    row["energy_units"] = r.energy_units;
    arr.push_back(std::move(row));
  }
  return arr.dump(2) + "\n";
}

std::vector<ExperimentResult> results_from_csv(std::string_view text) {
  std::vector<ExperimentResult> out;
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || line != kResultCsvHeader) throw std::invalid_argument("unexpected CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view rest = line;
    while (true) {
      auto c = rest.find(',');
      cols.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (cols.size() != 6) throw std::invalid_argument("expected 6 CSV columns");
    ExperimentResult r;
    r.n = parse_number<std::size_t>(cols[0]);
    r.seed = parse_number<std::uint64_t>(cols[1]);
    r.success_rate = parse_number<double>(cols[2]);
    r.mean_pairwise_us = parse_number<double>(cols[3]);
    r.max_msgs = parse_number<std::uint64_t>(cols[4]);
    r.energy_units = parse_number<double>(cols[5]);
    out.push_back(r);
  }
  return out;
}

std::vector<ExperimentResult> results_from_json(std::string_view text) {
  auto arr = nlohmann::json::parse(text);
  std::vector<ExperimentResult> out;
  for (const auto& row : arr) {
    ExperimentResult r;
    r.n = row.at("n").get<std::size_t>();
    r.seed = row.at("seed").get<std::uint64_t>();
    r.success_rate = row.at("success_rate").get<double>();
    r.mean_pairwise_us = row.at("mean_pairwise_us").get<double>();
    r.max_msgs = row.at("max_msgs").get<std::uint64_t>();
    r.energy_units = row.at("energy_units").get<double>();
    out.push_back(r);
  }
  return out;
}

void export_results(const std::vector<ExperimentResult>& results, ExportFormat format,
                    const std::filesystem::path& path) {
  const std::string body = format == ExportFormat::Csv ? to_csv(results) : to_json(results);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << body;
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace wsnkm
