#pragma once

#include <iosfwd>
#include <vector>

#include "pcast/types.hpp"

namespace pcast {

// One association session: node was attached to location for [start, end).
struct AssociationRecord {
  NodeId node = 0;
  LocationId location = 0;
  Timestamp start = 0;
  Timestamp end = 0;
};

// Maximal interval during which two nodes were attached to the same
// location at the same time. Canonical form has a < b.
struct EncounterEvent {
  NodeId a = 0;
  NodeId b = 0;
  LocationId location = 0;
  Timestamp start = 0;
  Timestamp end = 0;
};

// day x location matrix of time fractions for one node; row sums <= 1.
struct AssociationMatrix {
  NodeId node = 0;
  Matrix cells; // day_count x location_count
};

struct SyntheticTraceConfig {
  int nodes = 200;
  int locations = 10;
  int days = 28;
  int communities = 8;
  double bias = 0.95;           // probability a session lands on a home location
  int sessions_per_day = 4;
  double mean_session_seconds = 43200.0; // clamped to the slot, so most sessions fill it
  std::uint64_t seed = 1;
};

// Text format, one record per line: node_id,location_id,start_seconds,end_seconds.
// '#' starts a comment, blank lines ignored. Throws ParseError with the
// offending line number on malformed input or start >= end.
std::vector<AssociationRecord> parse_trace(std::istream& in);
void write_trace(std::ostream& out, const std::vector<AssociationRecord>& records);

struct FilterStats {
  long nodes_in = 0;
  long nodes_kept = 0;
};

// Keeps the records of nodes with more than min_sessions sessions OR at
// least min_total_duration accumulated seconds. Occasional visitors fall
// below both and are removed wholesale.
std::vector<AssociationRecord> filter_regular_nodes(const std::vector<AssociationRecord>& records,
                                                    long min_sessions, Timestamp min_total_duration,
                                                    FilterStats* stats = nullptr);

struct OverlapStats {
  long truncated = 0;
  long dropped = 0;
};

// A node cannot be in two sessions at once. Earlier records are truncated at
// the start of the overlapping later record; records emptied by truncation
// are dropped. Output is sorted by (node, start, end, location).
std::vector<AssociationRecord> resolve_node_overlaps(std::vector<AssociationRecord> records,
                                                     OverlapStats* stats = nullptr);

// Community-structured synthetic trace: nodes are assigned round-robin to
// communities, each community owns a contiguous block of home locations, and
// each session picks a home location with probability `bias` (uniform over
// all locations otherwise). Sessions of one node never overlap.
std::vector<AssociationRecord> generate_synthetic(const SyntheticTraceConfig& cfg);

// Fractions of each day the node spent at each location. Sessions crossing a
// day boundary contribute to every day they touch. Records outside
// [0, day_count * day_length) or with unknown location >= location_count throw.
AssociationMatrix build_association_matrix(const std::vector<AssociationRecord>& records, NodeId node,
                                           Timestamp day_length, int day_count, int location_count);

// All pairwise co-location intervals, merged to maximal extent per
// (a, b, location), sorted by (start, a, b, location). Zero-length
// intersections (touching endpoints) do not count.
std::vector<EncounterEvent> extract_encounters(const std::vector<AssociationRecord>& records);

} // namespace pcast
