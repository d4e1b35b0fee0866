#pragma once

#include <iosfwd>

#include "pcast/config.hpp"
#include "pcast/metrics.hpp"
#include "pcast/simcore.hpp"

namespace pcast {

// Everything derived from a trace: cleaned records, one profile per regular
// node, the encounter stream, and the simulated window.
struct World {
  std::vector<AssociationRecord> records;
  ProfileSet profiles;
  std::vector<EncounterEvent> encounters;
  Timestamp horizon = 0;
  int day_count = 0;
  int location_count = 0;
  FilterStats filter_stats;
  OverlapStats overlap_stats;
  std::string descriptor; // identifies the trace in metric rows
};

// Loads or generates the trace, filters irregular nodes, resolves per-node
// overlaps, builds profiles (through the cache when configured), and
// extracts encounters.
World build_world(const RunConfig& cfg);

// Packets from packets.file when set, otherwise generated: uniform origins,
// uniform creation times over the horizon (or fixed-rate spacing), targets
// drawn per target.mode.
std::vector<Packet> generate_packets(const World& world, const RunConfig& cfg);

// Text round-trip, one line per packet: packet_id,origin,created_at,anchor.
// Only anchor-mode targets are representable.
void save_packets(std::ostream& out, const std::vector<Packet>& packets);
std::vector<Packet> load_packets(std::istream& in, const World& world);

SimConfig make_sim_config(const RunConfig& cfg, const World& world);
RowEcho make_echo(const RunConfig& cfg, const World& world);

struct RunArtifacts {
  MetricsRow row;
  SimResult result;
  MaliciousAssignment assignment;
};

// One full simulation under cfg. A preloaded assignment (assignment.load)
// can be passed in; otherwise one is drawn from the run seed.
RunArtifacts simulate_once(const World& world, const std::vector<Packet>& packets,
                           const RunConfig& cfg, const MaliciousAssignment* preset = nullptr);

struct SweepSpec {
  std::string key;                 // any config key except seed
  std::vector<std::string> values; // applied via apply_kv
  int seeds = 1;                   // seeds base.seed .. base.seed + seeds - 1
};

// Cartesian product of values x seeds, one row each, in deterministic
// (value-major, then seed) order regardless of cfg.jobs. The world is
// rebuilt per value only when the swept key affects it.
std::vector<MetricsRow> run_sweep(const RunConfig& base, const SweepSpec& spec);

} // namespace pcast
