#include "pcast/metrics.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace pcast {

namespace {

constexpr const char* kVersionLine = "# pcast-metrics-v1";

std::string fmt(double v) {
  std::array<char, 64> buf;
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return buf.data();
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string{}; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double to_double(const std::string& s, long line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw ParseError("metrics csv: bad number '" + s + "'", line);
  return v;
}

std::optional<double> to_opt(const std::string& s, long line) {
  if (s.empty()) return std::nullopt;
  return to_double(s, line);
}

long to_long(const std::string& s, long line) {
  return static_cast<long>(to_double(s, line));
}

const char* kHeader =
    "policy,p1,p2,p3,delta,seed,k,trace,sweep_key,sweep_value,packets,delivered,dropped,blocked,"
    "expired,delivery_ratio,mean_delay,mean_hops,total_transmissions,ack_messages,storage_overhead,"
    "malicious,detected,mean_detection_time,retransmit_timer,retransmit_blocking,credit_threshold,"
    "credit_initial,rep_c1,rep_c2,rep_c3,rep_c4,rep_match_threshold,rep_aging_seconds,"
    "rep_max_entries,game_gamma,game_payoff";

} // namespace

MetricsRow aggregate(const SimResult& result, const RowEcho& echo,
                     const MaliciousAssignment* adversary) {
  if (result.outcomes.empty()) throw ValidationError("aggregate: no packet outcomes");
  MetricsRow row;
  row.echo = echo;
  row.packets = static_cast<long>(result.outcomes.size());
  double delay_sum = 0.0, hops_sum = 0.0;
  for (const auto& po : result.outcomes) {
    switch (po.state) {
      case PacketState::Delivered:
        ++row.delivered;
        delay_sum += static_cast<double>(po.delay());
        hops_sum += po.hops;
        break;
      case PacketState::Dropped: ++row.dropped; break;
      case PacketState::Blocked: ++row.blocked; break;
      case PacketState::Expired: ++row.expired; break;
      case PacketState::InTransit:
        throw ValidationError("aggregate: packet still in transit");
    }
    row.total_transmissions += po.transmissions;
  }
  row.total_transmissions += result.ack_messages;
  row.ack_messages = result.ack_messages;
  row.storage_overhead = result.storage_peak;
  row.delivery_ratio = static_cast<double>(row.delivered) / static_cast<double>(row.packets);
  if (row.delivered > 0) {
    row.mean_delay = delay_sum / static_cast<double>(row.delivered);
    row.mean_hops = hops_sum / static_cast<double>(row.delivered);
  }
  if (adversary) {
    const DetectionStats d = detection_stats(result.first_drop, result.first_flag, *adversary);
    row.malicious = d.malicious;
    row.detected = d.detected;
    if (d.detected > 0) row.mean_detection_time = d.mean_detection_time;
  }
  return row;
}

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kVersionLine << '\n' << kHeader << '\n';
  for (const auto& r : rows) {
    const auto& e = r.echo;
    out << e.policy << ',' << fmt(e.p1) << ',' << fmt(e.p2) << ',' << fmt(e.p3) << ',' << fmt(e.delta)
        << ',' << e.seed << ',' << e.k << ',' << e.trace << ',' << e.sweep_key << ',' << e.sweep_value
        << ',' << r.packets << ',' << r.delivered << ',' << r.dropped << ',' << r.blocked << ','
        << r.expired << ',' << fmt(r.delivery_ratio) << ',' << fmt(r.mean_delay) << ','
        << fmt(r.mean_hops) << ',' << r.total_transmissions << ',' << r.ack_messages << ','
        << r.storage_overhead << ',' << r.malicious << ',' << r.detected << ','
        << fmt(r.mean_detection_time) << ',' << e.retransmit_timer << ','
        << (e.retransmit_blocking ? 1 : 0) << ',' << e.credit_threshold << ',' << e.credit_initial
        << ',' << fmt(e.rep_c1) << ',' << fmt(e.rep_c2) << ',' << fmt(e.rep_c3) << ',' << fmt(e.rep_c4)
        << ',' << fmt(e.rep_match_threshold) << ',' << e.rep_aging_seconds << ',' << e.rep_max_entries
        << ',' << fmt(e.game_gamma) << ',' << e.game_payoff << '\n';
  }
}

std::vector<MetricsRow> read_csv(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line) || line != kVersionLine)
    throw ParseError("metrics csv: missing version line", 1);
  ++lineno;
  if (!std::getline(in, line) || line != kHeader)
    throw ParseError("metrics csv: unexpected header", 2);
  ++lineno;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 37) throw ParseError("metrics csv: expected 37 fields", lineno);
    MetricsRow r;
    auto& e = r.echo;
    int i = 0;
    e.policy = f[i++];
    e.p1 = to_double(f[i++], lineno);
    e.p2 = to_double(f[i++], lineno);
    e.p3 = to_double(f[i++], lineno);
    e.delta = to_double(f[i++], lineno);
    e.seed = static_cast<std::uint64_t>(std::strtoull(f[i++].c_str(), nullptr, 10));
    e.k = static_cast<int>(to_long(f[i++], lineno));
    e.trace = f[i++];
    e.sweep_key = f[i++];
    e.sweep_value = f[i++];
    r.packets = to_long(f[i++], lineno);
    r.delivered = to_long(f[i++], lineno);
    r.dropped = to_long(f[i++], lineno);
    r.blocked = to_long(f[i++], lineno);
    r.expired = to_long(f[i++], lineno);
    r.delivery_ratio = to_double(f[i++], lineno);
    r.mean_delay = to_opt(f[i++], lineno);
    r.mean_hops = to_opt(f[i++], lineno);
    r.total_transmissions = to_long(f[i++], lineno);
    r.ack_messages = to_long(f[i++], lineno);
    r.storage_overhead = to_long(f[i++], lineno);
    r.malicious = to_long(f[i++], lineno);
    r.detected = to_long(f[i++], lineno);
    r.mean_detection_time = to_opt(f[i++], lineno);
    e.retransmit_timer = to_long(f[i++], lineno);
    e.retransmit_blocking = to_long(f[i++], lineno) != 0;
    e.credit_threshold = to_long(f[i++], lineno);
    e.credit_initial = to_long(f[i++], lineno);
    e.rep_c1 = to_double(f[i++], lineno);
    e.rep_c2 = to_double(f[i++], lineno);
    e.rep_c3 = to_double(f[i++], lineno);
    e.rep_c4 = to_double(f[i++], lineno);
    e.rep_match_threshold = to_double(f[i++], lineno);
    e.rep_aging_seconds = to_long(f[i++], lineno);
    e.rep_max_entries = static_cast<int>(to_long(f[i++], lineno));
    e.game_gamma = to_double(f[i++], lineno);
    e.game_payoff = f[i++];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ComparisonRow> compare(const std::vector<MetricsRow>& a,
                                   const std::vector<MetricsRow>& b) {
  using Key = std::tuple<std::string, std::string, std::uint64_t, double, double, double>;
  auto key_of = [](const MetricsRow& r) {
    return Key{r.echo.sweep_key, r.echo.sweep_value, r.echo.seed, r.echo.p1, r.echo.p2, r.echo.p3};
  };
  std::map<Key, const MetricsRow*> index;
  for (const auto& r : b)
    if (!index.emplace(key_of(r), &r).second)
      throw ValidationError("compare: duplicate sweep point in the second result set");
  if (index.size() != a.size())
    throw ValidationError("compare: result sets cover different sweep points");
  std::vector<ComparisonRow> out;
  for (const auto& ra : a) {
    auto it = index.find(key_of(ra));
    if (it == index.end())
      throw ValidationError("compare: no matching row for a sweep point (key/value/seed/p1/p2/p3)");
    const MetricsRow& rb = *it->second;
    ComparisonRow c;
    c.sweep_key = ra.echo.sweep_key;
    c.sweep_value = ra.echo.sweep_value;
    c.seed = ra.echo.seed;
    c.policy_a = ra.echo.policy;
    c.policy_b = rb.echo.policy;
    c.ratio_a = ra.delivery_ratio;
    c.ratio_b = rb.delivery_ratio;
    c.ratio_delta = rb.delivery_ratio - ra.delivery_ratio;
    c.delay_a = ra.mean_delay;
    c.delay_b = rb.mean_delay;
    if (ra.mean_delay && rb.mean_delay && *ra.mean_delay > 0.0)
      c.delay_ratio = *rb.mean_delay / *ra.mean_delay;
    out.push_back(std::move(c));
  }
  return out;
}

void write_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "# pcast-compare-v1\n"
      << "sweep_key,sweep_value,seed,policy_a,policy_b,ratio_a,ratio_b,ratio_delta,delay_a,delay_b,"
         "delay_ratio\n";
  for (const auto& r : rows)
    out << r.sweep_key << ',' << r.sweep_value << ',' << r.seed << ',' << r.policy_a << ','
        << r.policy_b << ',' << fmt(r.ratio_a) << ',' << fmt(r.ratio_b) << ',' << fmt(r.ratio_delta)
        << ',' << fmt(r.delay_a) << ',' << fmt(r.delay_b) << ',' << fmt(r.delay_ratio) << '\n';
}

const char* to_string(PacketState s) {
  switch (s) {
    case PacketState::InTransit: return "in_transit";
    case PacketState::Delivered: return "delivered";
    case PacketState::Dropped: return "dropped";
    case PacketState::Blocked: return "blocked";
    case PacketState::Expired: return "expired";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Offer: return "offer";
    case EventKind::Accept: return "accept";
    case EventKind::Drop: return "drop";
    case EventKind::Deliver: return "deliver";
    case EventKind::Expire: return "expire";
    case EventKind::Block: return "block";
    case EventKind::Retransmit: return "retransmit";
  }
  return "?";
}

void write_event_log(std::ostream& out, const std::vector<PacketOutcome>& outcomes) {
  out << "# packet_id,time,event,from,to\n";
  for (const auto& po : outcomes)
    for (const auto& ev : po.log)
      out << po.packet_id << ',' << ev.time << ',' << to_string(ev.kind) << ',' << ev.from << ','
          << ev.to << '\n';
}

} // namespace pcast
