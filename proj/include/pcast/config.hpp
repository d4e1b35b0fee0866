#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcast/policies.hpp"
#include "pcast/trace.hpp"
#include "pcast/types.hpp"

namespace pcast {

// Every knob of a run. Config files use `key = value` lines with '#'
// comments; the CLI exposes each key as a flag with dots and underscores
// turned into dashes (trace.sessions_per_day -> --trace-sessions-per-day).
struct RunConfig {
  std::string trace_file;       // trace.file; empty = synthetic
  SyntheticTraceConfig synth;   // trace.nodes .locations .days .communities .bias
                                // .sessions_per_day .mean_session_seconds .seed
  bool filter_enabled = true;   // filter.enabled
  long filter_min_sessions = 40;          // filter.min_sessions
  Timestamp filter_min_duration = 100000; // filter.min_duration, seconds

  int k = 5;                    // profile.rank
  Timestamp day_length = 86400; // profile.day_seconds
  std::string profile_cache;    // profile.cache; load if present, else write

  std::string target_mode = "anchor"; // target.mode: anchor | perturbed
  double target_noise = 0.1;          // target.noise

  long packet_count = 1000;    // packets.count
  std::string packets_file;    // packets.file; overrides generation
  double packet_rate = 0.0;    // packets.rate per second; 0 = uniform random times
  std::uint64_t packets_seed = 0; // packets.seed; 0 = derive from seed

  double delta = 0.8; // delta
  double p1 = 0.0, p2 = 0.5, p3 = 0.2;
  std::string policy = "none"; // none | retransmit | credit | reputation | game
  std::uint64_t seed = 1;

  Timestamp retransmit_timer = 1000; // retransmit.timer
  bool retransmit_blocking = false;  // retransmit.blocking
  long credit_threshold = 4;         // credit.threshold
  long credit_initial = -1;          // credit.initial; -1 follows the threshold
  double rep_c1 = 6.0, rep_c2 = 3.0, rep_c3 = 2.0, rep_c4 = 6.0;
  double rep_match_threshold = 0.7; // reputation.match_threshold
  double rep_aging_days = 7.0;      // reputation.aging_days
  int rep_max_entries = 32;         // reputation.max_entries
  double game_gamma = 0.9;          // game.gamma
  std::string game_payoff = "4,4,3,0,0,3,1,1"; // game.payoff, row-major (present,past)
  std::string game_initial_history = "forward"; // game.initial_history: forward | drop

  std::string output;          // output; empty = stdout
  std::string log_file;        // log.file; per-event trace of the run
  std::string assignment_load; // assignment.load
  std::string assignment_dump; // assignment.dump
  int jobs = 1;                // jobs
};

// Canonical key list, in dump order.
const std::vector<std::string>& config_keys();

// Sets one key; throws ValidationError on an unknown key or unparsable value.
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_kv(const RunConfig& cfg, const std::string& key);

RunConfig parse_config_file(std::istream& in);
void dump_config(std::ostream& out, const RunConfig& cfg);

// Cross-field checks (ranges, p3 <= delta, known policy names, ...).
void validate(const RunConfig& cfg);

PolicyKind parse_policy(const std::string& name);
PolicyConfig make_policy_config(const RunConfig& cfg);

} // namespace pcast
