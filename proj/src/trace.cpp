#include "pcast/trace.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "pcast/rng.hpp"

namespace pcast {

namespace {

std::int64_t parse_int(std::string_view field, long line) {
  std::int64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError("bad integer field '" + std::string(field) + "'", line);
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

} // namespace

std::vector<AssociationRecord> parse_trace(std::istream& in) {
  std::vector<AssociationRecord> records;
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    AssociationRecord rec;
    std::int64_t* fields[4] = {&rec.node, &rec.location, &rec.start, &rec.end};
    std::size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      std::size_t comma = s.find(',', pos);
      if (f < 3 && comma == std::string_view::npos)
        throw ParseError("expected 4 comma-separated fields", line);
      std::size_t len = (f < 3 ? comma : s.size()) - pos;
      if (f == 3 && s.find(',', pos) != std::string_view::npos)
        throw ParseError("expected 4 comma-separated fields", line);
      *fields[f] = parse_int(trim(s.substr(pos, len)), line);
      pos = (f < 3 ? comma + 1 : s.size());
    }
    if (rec.start >= rec.end)
      throw ParseError("session start must precede end", line);
    records.push_back(rec);
  }
  return records;
}

void write_trace(std::ostream& out, const std::vector<AssociationRecord>& records) {
  for (const auto& r : records)
    out << r.node << ',' << r.location << ',' << r.start << ',' << r.end << '\n';
}

std::vector<AssociationRecord> filter_regular_nodes(const std::vector<AssociationRecord>& records,
                                                    long min_sessions, Timestamp min_total_duration,
                                                    FilterStats* stats) {
  struct Tally {
    long sessions = 0;
    Timestamp duration = 0;
  };
  std::map<NodeId, Tally> tally;
  for (const auto& r : records) {
    auto& t = tally[r.node];
    ++t.sessions;
    t.duration += r.end - r.start;
  }
  std::vector<AssociationRecord> kept;
  kept.reserve(records.size());
  long nodes_kept = 0;
  for (const auto& [node, t] : tally)
    if (t.sessions > min_sessions || t.duration >= min_total_duration) ++nodes_kept;
  for (const auto& r : records) {
    const auto& t = tally[r.node];
    if (t.sessions > min_sessions || t.duration >= min_total_duration) kept.push_back(r);
  }
  if (stats) {
    stats->nodes_in = static_cast<long>(tally.size());
    stats->nodes_kept = nodes_kept;
  }
  return kept;
}

std::vector<AssociationRecord> resolve_node_overlaps(std::vector<AssociationRecord> records,
                                                     OverlapStats* stats) {
  std::sort(records.begin(), records.end(), [](const AssociationRecord& x, const AssociationRecord& y) {
    return std::tie(x.node, x.start, x.end, x.location) < std::tie(y.node, y.start, y.end, y.location);
  });
  std::vector<AssociationRecord> out;
  out.reserve(records.size());
  OverlapStats local;
  for (const auto& r : records) {
    if (!out.empty() && out.back().node == r.node && out.back().end > r.start) {
      out.back().end = r.start;
      ++local.truncated;
      if (out.back().start >= out.back().end) {
        out.pop_back();
        ++local.dropped;
      }
    }
    out.push_back(r);
  }
  if (stats) *stats = local;
  return out;
}

std::vector<AssociationRecord> generate_synthetic(const SyntheticTraceConfig& cfg) {
  if (cfg.nodes <= 0 || cfg.locations <= 0 || cfg.days <= 0 || cfg.communities <= 0)
    throw ValidationError("synthetic trace: nodes, locations, days, communities must be positive");
  if (cfg.communities > cfg.locations)
    throw ValidationError("synthetic trace: more communities than locations");
  if (cfg.bias < 0.0 || cfg.bias > 1.0)
    throw ValidationError("synthetic trace: bias must be in [0, 1]");
  if (cfg.sessions_per_day <= 0 || cfg.mean_session_seconds <= 0.0)
    throw ValidationError("synthetic trace: sessions_per_day and mean_session_seconds must be positive");
  const Timestamp day = 86400;
  const Timestamp slot = day / cfg.sessions_per_day;
  if (slot < 2)
    throw ValidationError("synthetic trace: sessions_per_day leaves slots under 2 seconds");

  // Communities own contiguous home-location blocks; the remainder locations
  // go to the first communities so every location is someone's home.
  const int base = cfg.locations / cfg.communities;
  const int extra = cfg.locations % cfg.communities;
  std::vector<std::pair<int, int>> home(cfg.communities); // [first, count)
  int at = 0;
  for (int c = 0; c < cfg.communities; ++c) {
    int count = base + (c < extra ? 1 : 0);
    home[c] = {at, count};
    at += count;
  }

  std::vector<AssociationRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.nodes) * cfg.days * cfg.sessions_per_day);
  for (int n = 0; n < cfg.nodes; ++n) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n)));
    const auto [home_first, home_count] = home[n % cfg.communities];
    for (int d = 0; d < cfg.days; ++d) {
      for (int s = 0; s < cfg.sessions_per_day; ++s) {
        const Timestamp slot_start = static_cast<Timestamp>(d) * day + static_cast<Timestamp>(s) * slot;
        // duration drawn exponential, clamped into the slot so sessions of
        // one node can never overlap
        Timestamp dur = static_cast<Timestamp>(rng.exponential(cfg.mean_session_seconds));
        dur = std::clamp<Timestamp>(dur, 1, slot - 1);
        const Timestamp offset = static_cast<Timestamp>(rng.uniform_int(static_cast<std::uint64_t>(slot - dur)));
        LocationId loc;
        if (rng.uniform() < cfg.bias)
          loc = home_first + static_cast<LocationId>(rng.uniform_int(static_cast<std::uint64_t>(home_count)));
        else
          loc = static_cast<LocationId>(rng.uniform_int(static_cast<std::uint64_t>(cfg.locations)));
        records.push_back({n, loc, slot_start + offset, slot_start + offset + dur});
      }
    }
  }
  return records;
}

AssociationMatrix build_association_matrix(const std::vector<AssociationRecord>& records, NodeId node,
                                           Timestamp day_length, int day_count, int location_count) {
  if (day_length <= 0 || day_count <= 0 || location_count <= 0)
    throw ValidationError("association matrix: day_length, day_count, location_count must be positive");
  AssociationMatrix m;
  m.node = node;
  m.cells = Matrix::Zero(day_count, location_count);
  const Timestamp horizon = day_length * day_count;
  for (const auto& r : records) {
    if (r.node != node) continue;
    if (r.location < 0 || r.location >= location_count)
      throw ValidationError("association matrix: location " + std::to_string(r.location) + " out of range");
    if (r.start < 0 || r.end > horizon)
      throw ValidationError("association matrix: session outside the trace window");
    // split across the days the session touches
    for (Timestamp d = r.start / day_length; d * day_length < r.end; ++d) {
      const Timestamp lo = std::max(r.start, d * day_length);
      const Timestamp hi = std::min(r.end, (d + 1) * day_length);
      m.cells(static_cast<int>(d), static_cast<int>(r.location)) +=
          static_cast<double>(hi - lo) / static_cast<double>(day_length);
    }
  }
  return m;
}

std::vector<EncounterEvent> extract_encounters(const std::vector<AssociationRecord>& records) {
  // Merge each node's own sessions per location first (touching or
  // overlapping intervals become one presence interval), so every pairwise
  // intersection afterwards is automatically maximal.
  struct Presence {
    NodeId node;
    Timestamp start, end;
  };
  std::map<LocationId, std::vector<Presence>> by_location;
  {
    std::map<std::pair<LocationId, NodeId>, std::vector<std::pair<Timestamp, Timestamp>>> raw;
    for (const auto& r : records) raw[{r.location, r.node}].push_back({r.start, r.end});
    for (auto& [key, spans] : raw) {
      std::sort(spans.begin(), spans.end());
      std::vector<std::pair<Timestamp, Timestamp>> merged;
      for (const auto& s : spans) {
        if (!merged.empty() && merged.back().second >= s.first)
          merged.back().second = std::max(merged.back().second, s.second);
        else
          merged.push_back(s);
      }
      auto& out = by_location[key.first];
      for (const auto& s : merged) out.push_back({key.second, s.first, s.second});
    }
  }

  std::vector<EncounterEvent> events;
  for (auto& [loc, presences] : by_location) {
    std::sort(presences.begin(), presences.end(), [](const Presence& x, const Presence& y) {
      return std::tie(x.start, x.end, x.node) < std::tie(y.start, y.end, y.node);
    });
    // sweep with an active set ordered by end time
    std::vector<const Presence*> active;
    for (const auto& p : presences) {
      std::erase_if(active, [&](const Presence* q) { return q->end <= p.start; });
      for (const Presence* q : active) {
        const Timestamp lo = std::max(p.start, q->start);
        const Timestamp hi = std::min(p.end, q->end);
        if (lo >= hi || p.node == q->node) continue;
        EncounterEvent e;
        e.a = std::min(p.node, q->node);
        e.b = std::max(p.node, q->node);
        e.location = loc;
        e.start = lo;
        e.end = hi;
        events.push_back(e);
      }
      active.push_back(&p);
    }
  }
  std::sort(events.begin(), events.end(), [](const EncounterEvent& x, const EncounterEvent& y) {
    return std::tie(x.start, x.a, x.b, x.location) < std::tie(y.start, y.a, y.b, y.location);
  });
  return events;
}

} // namespace pcast
