#include "pcast/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace pcast {

MaliciousAssignment assign_malicious(std::vector<NodeId> nodes, const AdversaryConfig& cfg) {
  if (cfg.p1 < 0.0 || cfg.p1 > 1.0) throw ValidationError("adversary: p1 must be in [0, 1]");
  if (cfg.p2 < 0.0 || cfg.p2 > 1.0) throw ValidationError("adversary: p2 must be in [0, 1]");
  if (cfg.p3 < 0.0 || cfg.p3 > 1.0) throw ValidationError("adversary: p3 must be in [0, 1]");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  const auto n = nodes.size();
  const auto count = static_cast<std::size_t>(std::floor(cfg.p1 * static_cast<double>(n) + 0.5));

  MaliciousAssignment out;
  out.p3 = cfg.p3;
  Rng rng(derive_seed(cfg.seed, 0xadbeef));
  // partial Fisher-Yates over the sorted ids picks `count` uniformly
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_int(n - i);
    std::swap(nodes[i], nodes[j]);
    out.misbehave[nodes[i]] = cfg.p2 + (1.0 - cfg.p2) * rng.uniform();
  }
  return out;
}

bool decide_drop(NodeId node, double similarity_to_target, const MaliciousAssignment& assignment,
                 Rng& rng) {
  auto it = assignment.misbehave.find(node);
  if (it == assignment.misbehave.end()) return false;
  if (similarity_to_target >= assignment.p3) return false;
  return rng.uniform() < it->second;
}

void save_assignment(std::ostream& out, const std::vector<NodeId>& nodes,
                     const MaliciousAssignment& assignment) {
  std::vector<NodeId> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  out.precision(17);
  for (NodeId n : sorted)
    out << n << ',' << (assignment.is_malicious(n) ? 1 : 0) << ',' << assignment.probability(n) << '\n';
}

MaliciousAssignment load_assignment(std::istream& in, double p3) {
  MaliciousAssignment out;
  out.p3 = p3;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    NodeId node;
    int flag;
    double p;
    if (!(row >> node >> flag >> p) || (flag != 0 && flag != 1))
      throw ParseError("assignment: expected node_id,flag,probability", lineno);
    if (flag == 1) out.misbehave[node] = p;
  }
  return out;
}

} // namespace pcast
