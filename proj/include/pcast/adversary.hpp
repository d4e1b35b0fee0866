#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "pcast/rng.hpp"
#include "pcast/types.hpp"

namespace pcast {

struct AdversaryConfig {
  double p1 = 0.0;  // fraction of nodes that misbehave
  double p2 = 0.5;  // lower bound of the per-node misbehaving probability
  double p3 = 0.2;  // similarity threshold above which even misbehaving nodes forward
  std::uint64_t seed = 0;
};

struct MaliciousAssignment {
  double p3 = 0.2;
  std::unordered_map<NodeId, double> misbehave; // malicious nodes -> drop probability

  bool is_malicious(NodeId n) const { return misbehave.count(n) != 0; }
  double probability(NodeId n) const {
    auto it = misbehave.find(n);
    return it == misbehave.end() ? 0.0 : it->second;
  }
};

// Picks round(p1 * n) nodes uniformly without replacement (round half up)
// and draws each one's drop probability uniformly from [p2, 1]. p1, p2 in
// [0, 1]; p3 in [0, 1] and conventionally below the delivery threshold.
MaliciousAssignment assign_malicious(std::vector<NodeId> nodes, const AdversaryConfig& cfg);

// True when the node drops the transfer it was just offered. Honest nodes
// never drop; a misbehaving node forwards anyway when the candidate's
// similarity to the target reaches p3. Only the remaining probabilistic
// branch consumes randomness, so honest-heavy runs stay reproducible when
// p1 changes elsewhere.
bool decide_drop(NodeId node, double similarity_to_target, const MaliciousAssignment& assignment,
                 Rng& rng);

// Text round-trip, one line per node: node_id,flag,probability.
void save_assignment(std::ostream& out, const std::vector<NodeId>& nodes,
                     const MaliciousAssignment& assignment);
MaliciousAssignment load_assignment(std::istream& in, double p3);

} // namespace pcast
