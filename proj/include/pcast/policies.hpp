#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "pcast/adversary.hpp"
#include "pcast/profile.hpp"
#include "pcast/trace.hpp"
#include "pcast/types.hpp"

namespace pcast {

enum class PolicyKind { None, Retransmit, Credit, Reputation, Game };

struct RetransmitConfig {
  Timestamp timer = 1000;  // seconds until a missing ACK marks the transfer failed
  bool blocking = false;   // blacklist receivers whose ACK timed out
};

struct CreditConfig {
  long threshold = 4; // credit spent per origination, and the misbehaving gate
  long initial = 4;
};

struct ReputationConfig {
  double c1 = 6.0; // delivery-factor increment for a fully trusted neighbor
  double c2 = 3.0; // for a neighbor with partial trust
  double c3 = 2.0; // for an unknown neighbor
  double c4 = 6.0; // spread budget: holder stops forwarding once reached
  double match_threshold = 0.7; // profile similarity to reuse a trust entry
  Timestamp aging_period = 7 * 86400;
  int max_entries = 32;
};

struct GameConfig {
  double gamma = 0.9; // misbehaving probability multiplier per forward performed
  // payoff[present][past] -> (present actor, counterpart); 0 = forward, 1 = drop
  int payoff[2][2][2] = {{{4, 4}, {3, 0}}, {{0, 3}, {1, 1}}};
  bool initial_history_forward = true;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::None;
  RetransmitConfig retransmit;
  CreditConfig credit;
  ReputationConfig reputation;
  GameConfig game;
};

// Sorted association starts per node, for scheduling when a node next hears
// from the infrastructure (reputation ACK delivery).
struct AssociationIndex {
  std::map<NodeId, std::vector<Timestamp>> starts;
  static AssociationIndex build(const std::vector<AssociationRecord>& records);
  // smallest start strictly after t, or nullopt
  std::optional<Timestamp> next_after(NodeId node, Timestamp t) const;
};

// ---- credit-based scheme ----

class CreditLedger {
 public:
  explicit CreditLedger(const CreditConfig& cfg) : cfg_(cfg) {}

  long balance(NodeId n) { return touch(n); }
  // origination costs `threshold` credits; false = refused (packet Blocked)
  bool try_originate(NodeId n);
  void reward_forward(NodeId n) { ++touch(n); }
  // a misbehaving node short on credit forwards anyway to earn some
  bool allow_drop(NodeId n) { return touch(n) >= cfg_.threshold; }
  long node_entries(NodeId n) const { return credit_.count(n) ? 1 : 0; }
  const std::map<NodeId, long>& balances() const { return credit_; }

 private:
  long& touch(NodeId n);
  CreditConfig cfg_;
  std::map<NodeId, long> credit_;
};

// ---- retransmission scheme ----

class RetransmitState {
 public:
  explicit RetransmitState(const RetransmitConfig& cfg) : cfg_(cfg) {}

  const RetransmitConfig& config() const { return cfg_; }
  // records that `sender` learned (at ACK timeout) about a drop by `victim`
  void flag(NodeId sender, NodeId victim, Timestamp effective);
  bool blocked(NodeId sender, NodeId victim, Timestamp now) const;
  long node_entries(NodeId sender) const;
  void shift_times(Timestamp delta);

 private:
  RetransmitConfig cfg_;
  std::map<NodeId, std::map<NodeId, Timestamp>> blacklist_; // sender -> victim -> effective time
};

// ---- reputation scheme ----

enum class TrustTier { Trusted, Known, Unknown }; // c1 / c2 / c3 increments

class ReputationState {
 public:
  explicit ReputationState(const ReputationConfig& cfg) : cfg_(cfg) {}

  const ReputationConfig& config() const { return cfg_; }
  double increment(TrustTier t) const;

  // Ages the matching entry, then classifies the neighbor. Unknown when no
  // stored profile matches the target or the neighbor has no (surviving)
  // trust cell.
  TrustTier lookup(NodeId holder, const TargetProfile& target, NodeId neighbor, Timestamp now);

  // One acknowledgement per footer entry of a delivered copy; each reader
  // credits its successor on the path once it next associates.
  void schedule_acks(const std::vector<NodeId>& footer, NodeId deliverer, int packet_id,
                     std::shared_ptr<const TargetProfile> target, Timestamp delivered_at,
                     const AssociationIndex& schedule);

  // Applies every acknowledgement readable at `now`; returns the readers
  // touched so the caller can account storage.
  std::vector<NodeId> tick(Timestamp now);

  // Sequential-experiment support: shifts all stored times back by
  // epoch_length and re-schedules acknowledgements that never became
  // readable, against the (repeating) association schedule.
  void advance_epoch(Timestamp epoch_length, const AssociationIndex& schedule);

  long node_entries(NodeId n) const;
  long pending_count() const { return static_cast<long>(readable_.size() + unreadable_.size()); }
  // exposed for tests: trust level of neighbor in the best entry for target
  int trust_level(NodeId holder, const TargetProfile& target, NodeId neighbor) const;

 private:
  struct TrustCell {
    int level = 0; // 1, 2, 4, 8
    Timestamp last_update = 0;
  };
  struct ProfileEntry {
    TargetProfile profile;
    Timestamp last_ack = 0;
    std::map<NodeId, TrustCell> trust;
  };
  struct PendingAck {
    Timestamp ready = 0;
    NodeId reader = 0;
    int packet_id = 0;
    NodeId successor = 0;
    Timestamp delivered_at = 0;
    std::shared_ptr<const TargetProfile> target;

    // min-heap order with full tie-break so application order is reproducible
    bool operator>(const PendingAck& o) const {
      return std::tie(ready, reader, packet_id, successor) >
             std::tie(o.ready, o.reader, o.packet_id, o.successor);
    }
  };

  ProfileEntry* find_entry(NodeId holder, const TargetProfile& target, Timestamp now);
  void age_entry(ProfileEntry& e, Timestamp now);
  void apply_ack(const PendingAck& ack);

  ReputationConfig cfg_;
  std::map<NodeId, std::vector<ProfileEntry>> tables_;
  std::priority_queue<PendingAck, std::vector<PendingAck>, std::greater<>> readable_;
  std::vector<PendingAck> unreadable_; // no association left in this epoch
};

// ---- game-theoretic scheme ----

class GameRuntime {
 public:
  explicit GameRuntime(const GameConfig& cfg) : cfg_(cfg) {}

  const GameConfig& config() const { return cfg_; }

  // Receiver's forwarding decision under the evolved misbehaving
  // probability. Honest nodes and targets above p3 always forward; only the
  // probabilistic branch draws from rng.
  bool decide_drop(NodeId receiver, double similarity_to_target, const MaliciousAssignment* adversary,
                   Rng& rng);

  // Records one transaction: holder asked receiver, receiver forwarded or
  // dropped. Updates both history tables, pays both scores, and decays the
  // receiver's misbehaving probability on a forward it performed.
  void on_transaction(NodeId holder, NodeId receiver, bool receiver_forwarded,
                      const MaliciousAssignment* adversary);

  long score(NodeId n) const;
  double probability(NodeId n, const MaliciousAssignment* adversary);
  long node_entries(NodeId n) const;

 private:
  struct NodeState {
    std::map<NodeId, int> received; // counterpart -> last action it performed for me (0 fwd, 1 drop)
    std::map<NodeId, int> given;    // counterpart -> last action I performed for it
    long score = 0;
    double prob = 0.0;
    bool prob_set = false;
  };
  NodeState& touch(NodeId n, const MaliciousAssignment* adversary);

  GameConfig cfg_;
  std::map<NodeId, NodeState> nodes_;
};

// ---- shared runtime handle ----

// Owns one scheme's mutable state. run() creates a fresh one internally
// unless a persistent handle is passed (sequential experiments keep trust,
// credit, history across runs).
struct PolicyRuntime {
  explicit PolicyRuntime(const PolicyConfig& cfg)
      : config(cfg), credit(cfg.credit), retransmit(cfg.retransmit), reputation(cfg.reputation),
        game(cfg.game) {}

  PolicyConfig config;
  CreditLedger credit;
  RetransmitState retransmit;
  ReputationState reputation;
  GameRuntime game;
  long storage_peak = 0;

  // per-node policy-table entry count under the active scheme
  long node_entries(NodeId n) const;
  void note_storage(NodeId n) { storage_peak = std::max(storage_peak, node_entries(n)); }
  void advance_epoch(Timestamp epoch_length, const AssociationIndex& schedule);
};

struct DetectionStats {
  long malicious = 0;
  long detected = 0; // flagged after (or when) actually dropping
  double mean_detection_time = 0.0; // over detected nodes, seconds
};

// first_drop: node -> first time it dropped a transfer; first_flag: node ->
// first time the scheme marked it (blacklist effective time or trust bypass).
DetectionStats detection_stats(const std::map<NodeId, Timestamp>& first_drop,
                               const std::map<NodeId, Timestamp>& first_flag,
                               const MaliciousAssignment& assignment);

} // namespace pcast
