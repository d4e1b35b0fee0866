#pragma once

#include <iosfwd>
#include <vector>

#include "pcast/trace.hpp"
#include "pcast/types.hpp"

namespace pcast {

struct SvdResult {
  Vector s;  // singular values, descending, length = numerical rank (<= k)
  Matrix v;  // right singular vectors, one column per kept value
};

// Compact behavioral summary: the dominant location-association directions
// and their normalized weights. vectors is location_count x rank with
// orthonormal columns; weights sums to 1 and is descending.
struct BehavioralProfile {
  Matrix vectors;
  Vector weights;
  int rank() const { return static_cast<int>(vectors.cols()); }
};

using TargetProfile = BehavioralProfile;

// Truncated SVD of the association matrix, keeping at most k singular
// values above the numerical-rank cutoff (1e-12 relative to the largest).
// Columns of v carry a deterministic sign: the largest-magnitude component
// is positive, ties resolved to the lowest row index. Throws on an all-zero
// matrix ("zero profile") or k <= 0.
SvdResult svd(const Matrix& a, int k);

inline SvdResult svd(const AssociationMatrix& a, int k) { return svd(a.cells, k); }

// weights_i = s_i / sum(s)
BehavioralProfile build_profile(const SvdResult& svd);

// Weighted absolute inner products between all vector pairs:
//   sum_ij w_i^x * w_j^y * |v_i^x . v_j^y|
// Symmetric to the last bit (terms are sorted before summation), in [0, 1]
// up to rounding, and 1 for identical profiles.
double similarity(const BehavioralProfile& x, const BehavioralProfile& y);

enum class TargetMode { Anchor, Perturbed };

struct TargetDraw {
  TargetProfile profile;
  NodeId anchor = -1;
};

// Draws a target profile for a packet. Anchor mode returns a uniformly
// chosen node's own profile; perturbed mode adds bounded uniform noise to
// the anchor's vectors and re-orthonormalizes (noise 0 returns the anchor
// profile exactly). nodes and profiles run parallel and must be non-empty.
TargetDraw generate_target_profile(const std::vector<NodeId>& nodes,
                                   const std::vector<BehavioralProfile>& profiles, TargetMode mode,
                                   double noise, std::uint64_t seed);

struct ProfileSet {
  std::vector<NodeId> nodes; // sorted ascending
  std::vector<BehavioralProfile> profiles;
};

// Plain-text cache, lossless to full double precision. The loader rejects
// files whose version header it does not know.
void save_profiles(std::ostream& out, const ProfileSet& set);
ProfileSet load_profiles(std::istream& in);

} // namespace pcast
