#include "pcast/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

namespace pcast {

namespace {

// stream salts under the run seed
constexpr std::uint64_t kAssignmentSalt = 1;
constexpr std::uint64_t kSimSalt = 2;
constexpr std::uint64_t kPacketsSalt = 3;

std::string synthetic_descriptor(const SyntheticTraceConfig& s) {
  std::ostringstream out;
  out << "synthetic;n=" << s.nodes << ";l=" << s.locations << ";d=" << s.days << ";c=" << s.communities
      << ";b=" << s.bias << ";spd=" << s.sessions_per_day << ";mss=" << s.mean_session_seconds
      << ";seed=" << s.seed;
  return out.str();
}

ProfileSet build_profiles(const std::vector<AssociationRecord>& records, Timestamp day_length,
                          int day_count, int location_count, int k) {
  std::set<NodeId> ids;
  for (const auto& r : records) ids.insert(r.node);
  ProfileSet set;
  for (NodeId n : ids) set.nodes.push_back(n);
  // per-node record slices; records arrive sorted by node
  set.profiles.reserve(set.nodes.size());
  for (NodeId n : set.nodes) {
    std::vector<AssociationRecord> mine;
    for (const auto& r : records)
      if (r.node == n) mine.push_back(r);
    const AssociationMatrix m = build_association_matrix(mine, n, day_length, day_count, location_count);
    set.profiles.push_back(build_profile(svd(m, k)));
  }
  return set;
}

} // namespace

World build_world(const RunConfig& cfg) {
  World w;
  std::vector<AssociationRecord> records;
  if (!cfg.trace_file.empty()) {
    std::ifstream in(cfg.trace_file);
    if (!in) throw IoError("cannot open trace file " + cfg.trace_file);
    records = parse_trace(in);
    w.descriptor = cfg.trace_file;
  } else {
    records = generate_synthetic(cfg.synth);
    w.descriptor = synthetic_descriptor(cfg.synth);
  }
  if (cfg.filter_enabled)
    records = filter_regular_nodes(records, cfg.filter_min_sessions, cfg.filter_min_duration,
                                   &w.filter_stats);
  records = resolve_node_overlaps(std::move(records), &w.overlap_stats);
  if (records.empty())
    throw ValidationError("build_world: no association records survive filtering");

  LocationId max_loc = 0;
  Timestamp max_end = 0;
  for (const auto& r : records) {
    if (r.location < 0) throw ValidationError("build_world: negative location id");
    max_loc = std::max(max_loc, r.location);
    max_end = std::max(max_end, r.end);
  }
  w.location_count = static_cast<int>(max_loc) + 1;
  w.day_count = static_cast<int>((max_end + cfg.day_length - 1) / cfg.day_length);
  w.horizon = static_cast<Timestamp>(w.day_count) * cfg.day_length;

  bool loaded = false;
  if (!cfg.profile_cache.empty() && std::filesystem::exists(cfg.profile_cache)) {
    std::ifstream in(cfg.profile_cache);
    if (!in) throw IoError("cannot open profile cache " + cfg.profile_cache);
    w.profiles = load_profiles(in);
    std::set<NodeId> have(w.profiles.nodes.begin(), w.profiles.nodes.end());
    for (const auto& r : records)
      if (!have.count(r.node))
        throw ValidationError("profile cache " + cfg.profile_cache + " does not cover node " +
                              std::to_string(r.node));
    loaded = true;
  }
  if (!loaded) {
    w.profiles = build_profiles(records, cfg.day_length, w.day_count, w.location_count, cfg.k);
    if (!cfg.profile_cache.empty()) {
      std::ofstream out(cfg.profile_cache);
      if (!out) throw IoError("cannot write profile cache " + cfg.profile_cache);
      save_profiles(out, w.profiles);
    }
  }
  w.encounters = extract_encounters(records);
  w.records = std::move(records);
  return w;
}

std::vector<Packet> generate_packets(const World& world, const RunConfig& cfg) {
  if (!cfg.packets_file.empty()) {
    std::ifstream in(cfg.packets_file);
    if (!in) throw IoError("cannot open packets file " + cfg.packets_file);
    return load_packets(in, world);
  }
  const bool perturbed = cfg.target_mode == "perturbed";
  const std::uint64_t pseed =
      cfg.packets_seed != 0 ? cfg.packets_seed : derive_seed(cfg.seed, kPacketsSalt);
  Rng rng(derive_seed(pseed, 0));
  std::vector<Packet> packets;
  packets.reserve(static_cast<std::size_t>(cfg.packet_count));
  const auto n = world.profiles.nodes.size();
  for (long i = 0; i < cfg.packet_count; ++i) {
    Packet p;
    p.id = static_cast<int>(i);
    p.origin = world.profiles.nodes[rng.uniform_int(n)];
    if (cfg.packet_rate > 0.0) {
      p.created_at = static_cast<Timestamp>(static_cast<double>(i) / cfg.packet_rate);
      if (p.created_at >= world.horizon)
        throw ValidationError("generate_packets: packets.rate places packet " + std::to_string(i) +
                              " beyond the horizon");
    } else {
      p.created_at = static_cast<Timestamp>(rng.uniform_int(static_cast<std::uint64_t>(world.horizon)));
    }
    TargetDraw draw = generate_target_profile(world.profiles.nodes, world.profiles.profiles,
                                              perturbed ? TargetMode::Perturbed : TargetMode::Anchor,
                                              cfg.target_noise, derive_seed(pseed, 1 + static_cast<std::uint64_t>(i)));
    p.target = std::move(draw.profile);
    p.target_anchor = perturbed ? -1 : draw.anchor;
    packets.push_back(std::move(p));
  }
  return packets;
}

void save_packets(std::ostream& out, const std::vector<Packet>& packets) {
  out << "# packet_id,origin,created_at,target_anchor_node\n";
  for (const auto& p : packets) {
    if (p.target_anchor < 0)
      throw ValidationError("save_packets: packet " + std::to_string(p.id) +
                            " has a perturbed target, which a packets file cannot carry");
    out << p.id << ',' << p.origin << ',' << p.created_at << ',' << p.target_anchor << '\n';
  }
}

std::vector<Packet> load_packets(std::istream& in, const World& world) {
  std::vector<Packet> packets;
  std::set<int> seen;
  std::string line;
  long lineno = 0;
  auto index_of = [&](NodeId n) -> int {
    auto it = std::lower_bound(world.profiles.nodes.begin(), world.profiles.nodes.end(), n);
    if (it == world.profiles.nodes.end() || *it != n) return -1;
    return static_cast<int>(it - world.profiles.nodes.begin());
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Packet p;
    NodeId anchor;
    if (!(row >> p.id >> p.origin >> p.created_at >> anchor))
      throw ParseError("packets: expected packet_id,origin,created_at,target_anchor_node", lineno);
    if (!seen.insert(p.id).second) throw ParseError("packets: duplicate packet id", lineno);
    if (index_of(p.origin) < 0)
      throw ParseError("packets: origin " + std::to_string(p.origin) + " has no profile", lineno);
    const int ai = index_of(anchor);
    if (ai < 0)
      throw ParseError("packets: anchor " + std::to_string(anchor) + " has no profile", lineno);
    p.target = world.profiles.profiles[ai];
    p.target_anchor = anchor;
    packets.push_back(std::move(p));
  }
  return packets;
}

SimConfig make_sim_config(const RunConfig& cfg, const World& world) {
  SimConfig sc;
  sc.delta = cfg.delta;
  sc.horizon = world.horizon;
  sc.seed = derive_seed(cfg.seed, kSimSalt);
  sc.collect_logs = !cfg.log_file.empty();
  sc.policy = make_policy_config(cfg);
  return sc;
}

RowEcho make_echo(const RunConfig& cfg, const World& world) {
  RowEcho e;
  e.policy = cfg.policy;
  e.p1 = cfg.p1;
  e.p2 = cfg.p2;
  e.p3 = cfg.p3;
  e.delta = cfg.delta;
  e.seed = cfg.seed;
  e.k = cfg.k;
  e.trace = world.descriptor;
  e.retransmit_timer = cfg.retransmit_timer;
  e.retransmit_blocking = cfg.retransmit_blocking;
  const PolicyConfig pc = make_policy_config(cfg);
  e.credit_threshold = pc.credit.threshold;
  e.credit_initial = pc.credit.initial;
  e.rep_c1 = cfg.rep_c1;
  e.rep_c2 = cfg.rep_c2;
  e.rep_c3 = cfg.rep_c3;
  e.rep_c4 = cfg.rep_c4;
  e.rep_match_threshold = cfg.rep_match_threshold;
  e.rep_aging_seconds = pc.reputation.aging_period;
  e.rep_max_entries = cfg.rep_max_entries;
  e.game_gamma = cfg.game_gamma;
  std::string payoff = cfg.game_payoff;
  std::replace(payoff.begin(), payoff.end(), ',', ';');
  payoff.erase(std::remove(payoff.begin(), payoff.end(), ' '), payoff.end());
  e.game_payoff = payoff;
  return e;
}

RunArtifacts simulate_once(const World& world, const std::vector<Packet>& packets,
                           const RunConfig& cfg, const MaliciousAssignment* preset) {
  validate(cfg);
  RunArtifacts art;
  if (preset) {
    art.assignment = *preset;
    art.assignment.p3 = cfg.p3;
  } else {
    AdversaryConfig ac;
    ac.p1 = cfg.p1;
    ac.p2 = cfg.p2;
    ac.p3 = cfg.p3;
    ac.seed = derive_seed(cfg.seed, kAssignmentSalt);
    art.assignment = assign_malicious(world.profiles.nodes, ac);
  }
  SimInputs in;
  in.packets = &packets;
  in.encounters = &world.encounters;
  in.profiles = &world.profiles;
  in.adversary = &art.assignment;
  in.associations = &world.records;
  art.result = run(in, make_sim_config(cfg, world));
  art.row = aggregate(art.result, make_echo(cfg, world), &art.assignment);
  return art;
}

std::vector<MetricsRow> run_sweep(const RunConfig& base, const SweepSpec& spec) {
  if (spec.key == "seed")
    throw ValidationError("sweep: vary seeds via the seed count, not --param seed");
  if (spec.values.empty()) throw ValidationError("sweep: no values given");
  if (spec.seeds < 1) throw ValidationError("sweep: seed count must be at least 1");
  {
    // reject unknown keys and bad values before any expensive work
    RunConfig probe = base;
    for (const auto& v : spec.values) apply_kv(probe, spec.key, v);
  }
  std::vector<std::string> values = spec.values;
  {
    std::set<std::string> uniq;
    std::vector<std::string> dedup;
    for (const auto& v : values)
      if (uniq.insert(v).second) dedup.push_back(v);
    values = std::move(dedup);
  }

  const bool world_varies = spec.key.rfind("trace.", 0) == 0 || spec.key.rfind("filter.", 0) == 0 ||
                            spec.key.rfind("profile.", 0) == 0;

  struct Task {
    RunConfig cfg;
    std::string value;
    const World* world = nullptr;
  };
  std::vector<Task> tasks;
  std::vector<std::unique_ptr<World>> worlds;
  World shared;
  if (!world_varies) shared = build_world(base);
  for (const auto& v : values) {
    RunConfig cfg = base;
    apply_kv(cfg, spec.key, v);
    validate(cfg);
    const World* w = &shared;
    if (world_varies) {
      worlds.push_back(std::make_unique<World>(build_world(cfg)));
      w = worlds.back().get();
    }
    for (int s = 0; s < spec.seeds; ++s) {
      Task t;
      t.cfg = cfg;
      t.cfg.seed = base.seed + static_cast<std::uint64_t>(s);
      t.value = v;
      t.world = w;
      tasks.push_back(std::move(t));
    }
  }

  std::vector<MetricsRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const Task& t = tasks[i];
        const std::vector<Packet> packets = generate_packets(*t.world, t.cfg);
        RunArtifacts art = simulate_once(*t.world, packets, t.cfg);
        art.row.echo.sweep_key = spec.key;
        art.row.echo.sweep_value = t.value;
        rows[i] = std::move(art.row);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(base.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

} // namespace pcast
