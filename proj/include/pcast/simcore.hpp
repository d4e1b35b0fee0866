#pragma once

#include <map>
#include <vector>

#include "pcast/adversary.hpp"
#include "pcast/policies.hpp"
#include "pcast/profile.hpp"
#include "pcast/trace.hpp"
#include "pcast/types.hpp"

namespace pcast {

struct Packet {
  int id = 0;
  NodeId origin = 0;
  Timestamp created_at = 0;
  TargetProfile target;
  NodeId target_anchor = -1; // -1 when the target is not a node's own profile
};

enum class PacketState { InTransit, Delivered, Dropped, Blocked, Expired };

enum class EventKind { Offer, Accept, Drop, Deliver, Expire, Block, Retransmit };

struct LogEntry {
  Timestamp time = 0;
  EventKind kind = EventKind::Offer;
  NodeId from = 0;
  NodeId to = 0;
};

struct PacketOutcome {
  int packet_id = 0;
  PacketState state = PacketState::InTransit;
  Timestamp created_at = 0;
  Timestamp delivered_at = -1; // valid when Delivered; delay = delivered_at - created_at
  int hops = 0;                // custody transfers on the reported path (= footer length)
  long transmissions = 0;      // offers made across all copies
  long drops = 0;
  std::vector<NodeId> footer;  // delivery path; deepest surviving path if undelivered
  std::vector<LogEntry> log;   // populated when SimConfig.collect_logs

  Timestamp delay() const { return delivered_at - created_at; }
};

struct SimConfig {
  double delta = 0.8;     // similarity at which a packet counts as delivered
  Timestamp horizon = 0;  // end of the simulated window, seconds
  std::uint64_t seed = 0; // per-packet decision streams derive from this
  bool collect_logs = false;
  PolicyConfig policy;
};

struct SimInputs {
  const std::vector<Packet>* packets = nullptr;
  const std::vector<EncounterEvent>* encounters = nullptr;
  const ProfileSet* profiles = nullptr;
  const MaliciousAssignment* adversary = nullptr;            // null: nobody misbehaves
  const std::vector<AssociationRecord>* associations = nullptr; // required by the reputation scheme
};

struct SimResult {
  std::vector<PacketOutcome> outcomes; // same order as the input packets
  long ack_messages = 0;               // acknowledgement traffic (retransmission, reputation)
  long storage_peak = 0;               // peak per-node policy-table entries
  std::map<NodeId, Timestamp> first_drop; // node -> first time it dropped a transfer
  std::map<NodeId, Timestamp> first_flag; // node -> first time the scheme marked it
};

// Replays the encounter stream once, moving packet custody along strictly
// increasing similarity to the target, under the configured scheme and
// adversary. Deterministic for fixed inputs, config, and seed. When
// `persistent` is given its policy state carries across calls (and its
// config wins over cfg.policy); otherwise a fresh runtime is used.
SimResult run(const SimInputs& in, const SimConfig& cfg, PolicyRuntime* persistent = nullptr);

// The subset of packets an adversary-free, policy-free run delivers.
// Screening keeps experiment failures attributable to misbehavior instead
// of plain unreachability.
std::vector<Packet> screen_deliverable(const SimInputs& in, const SimConfig& cfg);

} // namespace pcast
