#include "pcast/policies.hpp"

#include <algorithm>

namespace pcast {

AssociationIndex AssociationIndex::build(const std::vector<AssociationRecord>& records) {
  AssociationIndex idx;
  for (const auto& r : records) idx.starts[r.node].push_back(r.start);
  for (auto& [node, v] : idx.starts) std::sort(v.begin(), v.end());
  return idx;
}

std::optional<Timestamp> AssociationIndex::next_after(NodeId node, Timestamp t) const {
  auto it = starts.find(node);
  if (it == starts.end()) return std::nullopt;
  auto pos = std::upper_bound(it->second.begin(), it->second.end(), t);
  if (pos == it->second.end()) return std::nullopt;
  return *pos;
}

// ---- credit ----

long& CreditLedger::touch(NodeId n) {
  auto it = credit_.find(n);
  if (it == credit_.end()) it = credit_.emplace(n, cfg_.initial).first;
  return it->second;
}

bool CreditLedger::try_originate(NodeId n) {
  long& c = touch(n);
  if (c < cfg_.threshold) return false;
  c -= cfg_.threshold;
  return true;
}

// ---- retransmit ----

void RetransmitState::flag(NodeId sender, NodeId victim, Timestamp effective) {
  auto& row = blacklist_[sender];
  auto it = row.find(victim);
  if (it == row.end() || it->second > effective) row[victim] = effective;
}

bool RetransmitState::blocked(NodeId sender, NodeId victim, Timestamp now) const {
  auto row = blacklist_.find(sender);
  if (row == blacklist_.end()) return false;
  auto it = row->second.find(victim);
  return it != row->second.end() && it->second <= now;
}

long RetransmitState::node_entries(NodeId sender) const {
  auto row = blacklist_.find(sender);
  return row == blacklist_.end() ? 0 : static_cast<long>(row->second.size());
}

void RetransmitState::shift_times(Timestamp delta) {
  for (auto& [sender, row] : blacklist_)
    for (auto& [victim, t] : row) t -= delta;
}

// ---- reputation ----

double ReputationState::increment(TrustTier t) const {
  switch (t) {
    case TrustTier::Trusted: return cfg_.c1;
    case TrustTier::Known: return cfg_.c2;
    default: return cfg_.c3;
  }
}

void ReputationState::age_entry(ProfileEntry& e, Timestamp now) {
  for (auto it = e.trust.begin(); it != e.trust.end();) {
    TrustCell& cell = it->second;
    while (cell.level > 0 && now - cell.last_update >= cfg_.aging_period) {
      cell.last_update += cfg_.aging_period;
      cell.level /= 2; // 8 -> 4 -> 2 -> 1 -> 0 (forgotten)
    }
    if (cell.level == 0)
      it = e.trust.erase(it);
    else
      ++it;
  }
}

ReputationState::ProfileEntry* ReputationState::find_entry(NodeId holder, const TargetProfile& target,
                                                           Timestamp now) {
  auto table = tables_.find(holder);
  if (table == tables_.end()) return nullptr;
  ProfileEntry* best = nullptr;
  double best_sim = 0.0;
  for (auto& e : table->second) {
    const double sim = similarity(e.profile, target);
    if (sim >= cfg_.match_threshold && (best == nullptr || sim > best_sim)) {
      best = &e;
      best_sim = sim;
    }
  }
  if (best) age_entry(*best, now);
  return best;
}

TrustTier ReputationState::lookup(NodeId holder, const TargetProfile& target, NodeId neighbor,
                                  Timestamp now) {
  ProfileEntry* e = find_entry(holder, target, now);
  if (!e) return TrustTier::Unknown;
  auto cell = e->trust.find(neighbor);
  if (cell == e->trust.end()) return TrustTier::Unknown;
  return cell->second.level >= 8 ? TrustTier::Trusted : TrustTier::Known;
}

void ReputationState::schedule_acks(const std::vector<NodeId>& footer, NodeId deliverer, int packet_id,
                                    std::shared_ptr<const TargetProfile> target, Timestamp delivered_at,
                                    const AssociationIndex& schedule) {
  for (std::size_t i = 0; i < footer.size(); ++i) {
    PendingAck ack;
    ack.reader = footer[i];
    ack.successor = i + 1 < footer.size() ? footer[i + 1] : deliverer;
    ack.packet_id = packet_id;
    ack.delivered_at = delivered_at;
    ack.target = target;
    if (auto next = schedule.next_after(ack.reader, delivered_at)) {
      ack.ready = *next;
      readable_.push(std::move(ack));
    } else {
      unreadable_.push_back(std::move(ack));
    }
  }
}

void ReputationState::apply_ack(const PendingAck& ack) {
  const Timestamp now = ack.ready;
  ProfileEntry* e = find_entry(ack.reader, *ack.target, now);
  auto& table = tables_[ack.reader];
  if (!e) {
    table.push_back(ProfileEntry{*ack.target, now, {}});
    e = &table.back();
    if (static_cast<int>(table.size()) > cfg_.max_entries) {
      // evict the entry longest without an acknowledgement
      auto oldest = std::min_element(table.begin(), table.end(), [](const auto& x, const auto& y) {
        return x.last_ack < y.last_ack;
      });
      const bool evicted_self = &*oldest == e;
      table.erase(oldest);
      if (evicted_self) return;
      e = &table.back();
    }
  }
  TrustCell& cell = e->trust[ack.successor];
  cell.level = cell.level == 0 ? 1 : std::min(8, cell.level * 2);
  cell.last_update = now;
  e->last_ack = now;
}

std::vector<NodeId> ReputationState::tick(Timestamp now) {
  std::vector<NodeId> touched;
  while (!readable_.empty() && readable_.top().ready <= now) {
    const PendingAck ack = readable_.top();
    readable_.pop();
    apply_ack(ack);
    touched.push_back(ack.reader);
  }
  return touched;
}

void ReputationState::advance_epoch(Timestamp epoch_length, const AssociationIndex& schedule) {
  for (auto& [node, table] : tables_)
    for (auto& e : table) {
      e.last_ack -= epoch_length;
      for (auto& [neighbor, cell] : e.trust) cell.last_update -= epoch_length;
    }
  std::vector<PendingAck> all = std::move(unreadable_);
  unreadable_.clear();
  while (!readable_.empty()) {
    all.push_back(readable_.top());
    readable_.pop();
  }
  for (auto& ack : all) {
    ack.delivered_at -= epoch_length;
    if (auto next = schedule.next_after(ack.reader, ack.delivered_at)) {
      ack.ready = *next;
      readable_.push(std::move(ack));
    } else {
      unreadable_.push_back(std::move(ack));
    }
  }
}

long ReputationState::node_entries(NodeId n) const {
  auto table = tables_.find(n);
  if (table == tables_.end()) return 0;
  long count = 0;
  for (const auto& e : table->second) count += 1 + static_cast<long>(e.trust.size());
  return count;
}

int ReputationState::trust_level(NodeId holder, const TargetProfile& target, NodeId neighbor) const {
  auto table = tables_.find(holder);
  if (table == tables_.end()) return 0;
  const ProfileEntry* best = nullptr;
  double best_sim = 0.0;
  for (const auto& e : table->second) {
    const double sim = similarity(e.profile, target);
    if (sim >= cfg_.match_threshold && (best == nullptr || sim > best_sim)) {
      best = &e;
      best_sim = sim;
    }
  }
  if (!best) return 0;
  auto cell = best->trust.find(neighbor);
  return cell == best->trust.end() ? 0 : cell->second.level;
}

// ---- game ----

GameRuntime::NodeState& GameRuntime::touch(NodeId n, const MaliciousAssignment* adversary) {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) it = nodes_.emplace(n, NodeState{}).first;
  NodeState& s = it->second;
  if (!s.prob_set) {
    s.prob = adversary ? adversary->probability(n) : 0.0;
    s.prob_set = true;
  }
  return s;
}

bool GameRuntime::decide_drop(NodeId receiver, double similarity_to_target,
                              const MaliciousAssignment* adversary, Rng& rng) {
  if (!adversary || !adversary->is_malicious(receiver)) return false;
  if (similarity_to_target >= adversary->p3) return false;
  return rng.uniform() < touch(receiver, adversary).prob;
}

void GameRuntime::on_transaction(NodeId holder, NodeId receiver, bool receiver_forwarded,
                                 const MaliciousAssignment* adversary) {
  NodeState& h = touch(holder, adversary);
  NodeState& r = touch(receiver, adversary);
  const int present = receiver_forwarded ? 0 : 1;
  int past = cfg_.initial_history_forward ? 0 : 1;
  if (auto it = r.received.find(holder); it != r.received.end()) past = it->second;
  r.score += cfg_.payoff[present][past][0];
  h.score += cfg_.payoff[present][past][1];
  h.received[receiver] = present;
  r.given[holder] = present;
  if (receiver_forwarded && adversary && adversary->is_malicious(receiver)) r.prob *= cfg_.gamma;
}

long GameRuntime::score(NodeId n) const {
  auto it = nodes_.find(n);
  return it == nodes_.end() ? 0 : it->second.score;
}

double GameRuntime::probability(NodeId n, const MaliciousAssignment* adversary) {
  return touch(n, adversary).prob;
}

long GameRuntime::node_entries(NodeId n) const {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) return 0;
  return static_cast<long>(it->second.received.size() + it->second.given.size());
}

// ---- runtime ----

long PolicyRuntime::node_entries(NodeId n) const {
  switch (config.kind) {
    case PolicyKind::Retransmit: return retransmit.node_entries(n);
    case PolicyKind::Credit: return credit.node_entries(n);
    case PolicyKind::Reputation: return reputation.node_entries(n);
    case PolicyKind::Game: return game.node_entries(n);
    default: return 0;
  }
}

void PolicyRuntime::advance_epoch(Timestamp epoch_length, const AssociationIndex& schedule) {
  retransmit.shift_times(epoch_length);
  reputation.advance_epoch(epoch_length, schedule);
}

DetectionStats detection_stats(const std::map<NodeId, Timestamp>& first_drop,
                               const std::map<NodeId, Timestamp>& first_flag,
                               const MaliciousAssignment& assignment) {
  DetectionStats out;
  out.malicious = static_cast<long>(assignment.misbehave.size());
  double total = 0.0;
  for (const auto& [node, p] : assignment.misbehave) {
    auto drop = first_drop.find(node);
    auto flag = first_flag.find(node);
    if (drop == first_drop.end() || flag == first_flag.end()) continue;
    ++out.detected;
    total += static_cast<double>(flag->second - drop->second);
  }
  if (out.detected > 0) out.mean_detection_time = total / static_cast<double>(out.detected);
  return out;
}

} // namespace pcast
