#include "pcast/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace pcast {

namespace {

struct KeyDef {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

long parse_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ValidationError("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ValidationError("config: " + key + " expects an unsigned integer, got '" + v + "'");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ValidationError("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: " + key + " expects true/false, got '" + v + "'");
}

std::string show(double v) {
  std::ostringstream s;
  s.precision(15);
  s << v;
  return s.str();
}

#define STR_KEY(NAME, FIELD) \
  KeyDef{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = v; }, \
         [](const RunConfig& c) { return c.FIELD; }}
#define LONG_KEY(NAME, FIELD) \
  KeyDef{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = parse_long(NAME, v); }, \
         [](const RunConfig& c) { return std::to_string(c.FIELD); }}
#define INT_KEY(NAME, FIELD) \
  KeyDef{NAME, \
         [](RunConfig& c, const std::string& v) { c.FIELD = static_cast<int>(parse_long(NAME, v)); }, \
         [](const RunConfig& c) { return std::to_string(c.FIELD); }}
#define U64_KEY(NAME, FIELD) \
  KeyDef{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = parse_u64(NAME, v); }, \
         [](const RunConfig& c) { return std::to_string(c.FIELD); }}
#define DBL_KEY(NAME, FIELD) \
  KeyDef{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = parse_double(NAME, v); }, \
         [](const RunConfig& c) { return show(c.FIELD); }}
#define BOOL_KEY(NAME, FIELD) \
  KeyDef{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = parse_bool(NAME, v); }, \
         [](const RunConfig& c) { return c.FIELD ? "true" : "false"; }}

const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = {
      STR_KEY("trace.file", trace_file),
      INT_KEY("trace.nodes", synth.nodes),
      INT_KEY("trace.locations", synth.locations),
      INT_KEY("trace.days", synth.days),
      INT_KEY("trace.communities", synth.communities),
      DBL_KEY("trace.bias", synth.bias),
      INT_KEY("trace.sessions_per_day", synth.sessions_per_day),
      DBL_KEY("trace.mean_session_seconds", synth.mean_session_seconds),
      U64_KEY("trace.seed", synth.seed),
      BOOL_KEY("filter.enabled", filter_enabled),
      LONG_KEY("filter.min_sessions", filter_min_sessions),
      LONG_KEY("filter.min_duration", filter_min_duration),
      INT_KEY("profile.rank", k),
      LONG_KEY("profile.day_seconds", day_length),
      STR_KEY("profile.cache", profile_cache),
      STR_KEY("target.mode", target_mode),
      DBL_KEY("target.noise", target_noise),
      LONG_KEY("packets.count", packet_count),
      STR_KEY("packets.file", packets_file),
      DBL_KEY("packets.rate", packet_rate),
      U64_KEY("packets.seed", packets_seed),
      DBL_KEY("delta", delta),
      DBL_KEY("p1", p1),
      DBL_KEY("p2", p2),
      DBL_KEY("p3", p3),
      STR_KEY("policy", policy),
      U64_KEY("seed", seed),
      LONG_KEY("retransmit.timer", retransmit_timer),
      BOOL_KEY("retransmit.blocking", retransmit_blocking),
      LONG_KEY("credit.threshold", credit_threshold),
      LONG_KEY("credit.initial", credit_initial),
      DBL_KEY("reputation.c1", rep_c1),
      DBL_KEY("reputation.c2", rep_c2),
      DBL_KEY("reputation.c3", rep_c3),
      DBL_KEY("reputation.c4", rep_c4),
      DBL_KEY("reputation.match_threshold", rep_match_threshold),
      DBL_KEY("reputation.aging_days", rep_aging_days),
      INT_KEY("reputation.max_entries", rep_max_entries),
      DBL_KEY("game.gamma", game_gamma),
      STR_KEY("game.payoff", game_payoff),
      STR_KEY("game.initial_history", game_initial_history),
      STR_KEY("output", output),
      STR_KEY("log.file", log_file),
      STR_KEY("assignment.load", assignment_load),
      STR_KEY("assignment.dump", assignment_dump),
      INT_KEY("jobs", jobs),
  };
  return defs;
}

#undef STR_KEY
#undef LONG_KEY
#undef INT_KEY
#undef U64_KEY
#undef DBL_KEY
#undef BOOL_KEY

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_payoff(const std::string& spec) {
  std::vector<int> cells;
  std::string item;
  std::istringstream in(spec);
  while (std::getline(in, item, ',')) cells.push_back(static_cast<int>(parse_long("game.payoff", trim(item))));
  if (cells.size() != 8)
    throw ValidationError("config: game.payoff expects 8 comma-separated integers");
  return cells;
}

} // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& d : key_defs()) v.push_back(d.name);
    return v;
  }();
  return names;
}

void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& d : key_defs())
    if (key == d.name) {
      d.set(cfg, value);
      return;
    }
  throw ValidationError("config: unknown key '" + key + "'");
}

std::string get_kv(const RunConfig& cfg, const std::string& key) {
  for (const auto& d : key_defs())
    if (key == d.name) return d.get(cfg);
  throw ValidationError("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(std::istream& in) {
  RunConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key = value", lineno);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    try {
      apply_kv(cfg, key, value);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return cfg;
}

void dump_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& d : key_defs()) out << d.name << " = " << d.get(cfg) << '\n';
}

void validate(const RunConfig& cfg) {
  parse_policy(cfg.policy);
  if (cfg.target_mode != "anchor" && cfg.target_mode != "perturbed")
    throw ValidationError("config: target.mode must be anchor or perturbed");
  if (cfg.target_noise < 0.0) throw ValidationError("config: target.noise must be non-negative");
  if (cfg.delta <= 0.0 || cfg.delta > 1.0) throw ValidationError("config: delta must be in (0, 1]");
  for (auto [name, v] : {std::pair<const char*, double>{"p1", cfg.p1}, {"p2", cfg.p2}, {"p3", cfg.p3}})
    if (v < 0.0 || v > 1.0)
      throw ValidationError(std::string("config: ") + name + " must be in [0, 1]");
  if (cfg.p3 > cfg.delta)
    throw ValidationError("config: p3 must not exceed delta (misbehaving nodes forward at the "
                          "delivery threshold already)");
  if (cfg.k < 1) throw ValidationError("config: profile.rank must be at least 1");
  if (cfg.day_length <= 0) throw ValidationError("config: profile.day_seconds must be positive");
  if (cfg.packets_file.empty() && cfg.packet_count < 1)
    throw ValidationError("config: packets.count must be at least 1");
  if (cfg.packet_rate < 0.0) throw ValidationError("config: packets.rate must be non-negative");
  if (cfg.filter_min_sessions < 0 || cfg.filter_min_duration < 0)
    throw ValidationError("config: filter thresholds must be non-negative");
  if (cfg.retransmit_timer <= 0) throw ValidationError("config: retransmit.timer must be positive");
  if (cfg.credit_threshold < 0) throw ValidationError("config: credit.threshold must be non-negative");
  if (cfg.credit_initial < -1) throw ValidationError("config: credit.initial must be >= 0 (or -1)");
  if (!(cfg.rep_c1 >= cfg.rep_c2 && cfg.rep_c2 >= cfg.rep_c3 && cfg.rep_c3 > 0.0))
    throw ValidationError("config: reputation constants need c1 >= c2 >= c3 > 0");
  if (cfg.rep_c4 <= 0.0) throw ValidationError("config: reputation.c4 must be positive");
  if (cfg.rep_match_threshold < 0.0 || cfg.rep_match_threshold > 1.0)
    throw ValidationError("config: reputation.match_threshold must be in [0, 1]");
  if (cfg.rep_aging_days <= 0.0) throw ValidationError("config: reputation.aging_days must be positive");
  if (cfg.rep_max_entries < 1) throw ValidationError("config: reputation.max_entries must be >= 1");
  if (cfg.game_gamma <= 0.0 || cfg.game_gamma > 1.0)
    throw ValidationError("config: game.gamma must be in (0, 1]");
  if (cfg.game_initial_history != "forward" && cfg.game_initial_history != "drop")
    throw ValidationError("config: game.initial_history must be forward or drop");
  parse_payoff(cfg.game_payoff);
  if (cfg.jobs < 1) throw ValidationError("config: jobs must be at least 1");
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "none") return PolicyKind::None;
  if (name == "retransmit") return PolicyKind::Retransmit;
  if (name == "credit") return PolicyKind::Credit;
  if (name == "reputation") return PolicyKind::Reputation;
  if (name == "game") return PolicyKind::Game;
  throw ValidationError("config: unknown policy '" + name +
                        "' (none, retransmit, credit, reputation, game)");
}

PolicyConfig make_policy_config(const RunConfig& cfg) {
  PolicyConfig pc;
  pc.kind = parse_policy(cfg.policy);
  pc.retransmit.timer = cfg.retransmit_timer;
  pc.retransmit.blocking = cfg.retransmit_blocking;
  pc.credit.threshold = cfg.credit_threshold;
  pc.credit.initial = cfg.credit_initial < 0 ? cfg.credit_threshold : cfg.credit_initial;
  pc.reputation.c1 = cfg.rep_c1;
  pc.reputation.c2 = cfg.rep_c2;
  pc.reputation.c3 = cfg.rep_c3;
  pc.reputation.c4 = cfg.rep_c4;
  pc.reputation.match_threshold = cfg.rep_match_threshold;
  pc.reputation.aging_period = static_cast<Timestamp>(cfg.rep_aging_days * 86400.0);
  pc.reputation.max_entries = cfg.rep_max_entries;
  pc.game.gamma = cfg.game_gamma;
  const auto cells = parse_payoff(cfg.game_payoff);
  int i = 0;
  for (int present = 0; present < 2; ++present)
    for (int past = 0; past < 2; ++past)
      for (int who = 0; who < 2; ++who) pc.game.payoff[present][past][who] = cells[i++];
  pc.game.initial_history_forward = cfg.game_initial_history == "forward";
  return pc;
}

} // namespace pcast
