#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcast/simcore.hpp"

namespace pcast {

// Full configuration echo carried on every row so a CSV line alone
// reproduces its run.
struct RowEcho {
  std::string policy = "none";
  double p1 = 0.0, p2 = 0.5, p3 = 0.2, delta = 0.8;
  std::uint64_t seed = 0;
  int k = 5;
  std::string trace; // input file or synthetic descriptor
  std::string sweep_key, sweep_value;
  Timestamp retransmit_timer = 1000;
  bool retransmit_blocking = false;
  long credit_threshold = 4, credit_initial = 4;
  double rep_c1 = 6.0, rep_c2 = 3.0, rep_c3 = 2.0, rep_c4 = 6.0, rep_match_threshold = 0.7;
  Timestamp rep_aging_seconds = 7 * 86400;
  int rep_max_entries = 32;
  double game_gamma = 0.9;
  std::string game_payoff = "4;4;3;0;0;3;1;1";
};

struct MetricsRow {
  RowEcho echo;
  long packets = 0, delivered = 0, dropped = 0, blocked = 0, expired = 0;
  double delivery_ratio = 0.0;
  std::optional<double> mean_delay; // seconds, over delivered packets
  std::optional<double> mean_hops;  // over delivered packets
  long total_transmissions = 0;     // offers plus acknowledgement messages
  long ack_messages = 0;
  long storage_overhead = 0; // peak per-node policy-table entries
  long malicious = 0, detected = 0;
  std::optional<double> mean_detection_time; // seconds, over detected nodes
};

// Collapses one simulation into a row. Errors on an empty outcome list.
MetricsRow aggregate(const SimResult& result, const RowEcho& echo,
                     const MaliciousAssignment* adversary);

// Fixed, versioned column order; floats printed to 6 significant digits;
// undefined means are empty cells. Identical rows serialize to identical
// bytes.
void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_csv(std::istream& in);

struct ComparisonRow {
  std::string sweep_key, sweep_value;
  std::uint64_t seed = 0;
  std::string policy_a, policy_b;
  double ratio_a = 0.0, ratio_b = 0.0, ratio_delta = 0.0; // b - a
  std::optional<double> delay_a, delay_b, delay_ratio;    // b / a
};

// Pairs rows of two result sets by (sweep_key, sweep_value, seed, p1, p2,
// p3). Errors when the keys do not line up one to one.
std::vector<ComparisonRow> compare(const std::vector<MetricsRow>& a,
                                   const std::vector<MetricsRow>& b);
void write_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows);

const char* to_string(PacketState s);
const char* to_string(EventKind k);

// Event log, one line per event: packet_id,time,event,from,to; grouped by
// packet, time-ascending within a packet.
void write_event_log(std::ostream& out, const std::vector<PacketOutcome>& outcomes);

} // namespace pcast
