#include "pcast/profile.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pcast/rng.hpp"

namespace pcast {

namespace {

// Largest-|component| entry of each column made positive, ties to the
// lowest row index, so the decomposition is reproducible across backends.
void fix_signs(Matrix& v) {
  for (int c = 0; c < v.cols(); ++c) {
    int pivot = 0;
    for (int r = 1; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > std::abs(v(pivot, c))) pivot = r;
    if (v(pivot, c) < 0.0) v.col(c) = -v.col(c);
  }
}

} // namespace

SvdResult svd(const Matrix& a, int k) {
  if (k <= 0) throw ValidationError("svd: rank bound must be positive");
  if (a.rows() == 0 || a.cols() == 0) throw ValidationError("svd: empty matrix");
  if (a.isZero(0.0)) throw ValidationError("svd: zero profile");

  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinV);
  const Vector& s = dec.singularValues();
  const double cutoff = 1e-12 * s(0);
  int rank = 0;
  while (rank < s.size() && rank < k && s(rank) > cutoff) ++rank;

  SvdResult out;
  out.s = s.head(rank);
  out.v = dec.matrixV().leftCols(rank);
  fix_signs(out.v);
  return out;
}

BehavioralProfile build_profile(const SvdResult& svd) {
  if (svd.s.size() == 0) throw ValidationError("build_profile: empty decomposition");
  BehavioralProfile p;
  p.vectors = svd.v;
  p.weights = svd.s / svd.s.sum();
  return p;
}

double similarity(const BehavioralProfile& x, const BehavioralProfile& y) {
  // Collect all weighted terms and sum them in sorted order: addition order
  // is then independent of argument order, so similarity(x, y) is exactly
  // similarity(y, x).
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(x.rank()) * y.rank());
  for (int i = 0; i < x.rank(); ++i)
    for (int j = 0; j < y.rank(); ++j)
      terms.push_back(x.weights(i) * y.weights(j) * std::abs(x.vectors.col(i).dot(y.vectors.col(j))));
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

TargetDraw generate_target_profile(const std::vector<NodeId>& nodes,
                                   const std::vector<BehavioralProfile>& profiles, TargetMode mode,
                                   double noise, std::uint64_t seed) {
  if (nodes.empty() || nodes.size() != profiles.size())
    throw ValidationError("generate_target_profile: need non-empty parallel node/profile lists");
  if (noise < 0.0) throw ValidationError("generate_target_profile: negative noise");
  Rng rng(seed);
  const std::size_t pick = rng.uniform_int(nodes.size());
  TargetDraw draw;
  draw.anchor = nodes[pick];
  draw.profile = profiles[pick];
  if (mode == TargetMode::Anchor || noise == 0.0) return draw;

  Matrix& v = draw.profile.vectors;
  for (int c = 0; c < v.cols(); ++c)
    for (int r = 0; r < v.rows(); ++r) v(r, c) += noise * (2.0 * rng.uniform() - 1.0);
  // modified Gram-Schmidt keeps the columns a valid orthonormal system
  for (int c = 0; c < v.cols(); ++c) {
    for (int p = 0; p < c; ++p) v.col(c) -= v.col(p).dot(v.col(c)) * v.col(p);
    const double norm = v.col(c).norm();
    if (norm < 1e-12)
      throw ValidationError("generate_target_profile: perturbation collapsed a basis vector");
    v.col(c) /= norm;
  }
  return draw;
}

void save_profiles(std::ostream& out, const ProfileSet& set) {
  if (set.nodes.size() != set.profiles.size())
    throw ValidationError("save_profiles: node/profile lists differ in length");
  out << "pcast-profiles 1\n";
  out.precision(17);
  for (std::size_t i = 0; i < set.nodes.size(); ++i) {
    const auto& p = set.profiles[i];
    out << "node " << set.nodes[i] << ' ' << p.rank() << ' ' << p.vectors.rows() << '\n';
    for (int j = 0; j < p.rank(); ++j) out << (j ? " " : "") << p.weights(j);
    out << '\n';
    for (int j = 0; j < p.rank(); ++j) {
      for (int r = 0; r < p.vectors.rows(); ++r) out << (r ? " " : "") << p.vectors(r, j);
      out << '\n';
    }
  }
}

ProfileSet load_profiles(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header != "pcast-profiles 1")
    throw ValidationError("load_profiles: unknown cache format '" + header + "'");
  ProfileSet set;
  std::string line;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream head(line);
    std::string tag;
    NodeId node;
    int rank, rows;
    if (!(head >> tag >> node >> rank >> rows) || tag != "node" || rank <= 0 || rows <= 0)
      throw ParseError("load_profiles: bad node header", lineno);
    BehavioralProfile p;
    p.weights = Vector(rank);
    p.vectors = Matrix(rows, rank);
    if (!std::getline(in, line)) throw ParseError("load_profiles: truncated weights", lineno);
    ++lineno;
    std::istringstream ws(line);
    for (int j = 0; j < rank; ++j)
      if (!(ws >> p.weights(j))) throw ParseError("load_profiles: bad weights", lineno);
    for (int j = 0; j < rank; ++j) {
      if (!std::getline(in, line)) throw ParseError("load_profiles: truncated vectors", lineno);
      ++lineno;
      std::istringstream vs(line);
      for (int r = 0; r < rows; ++r)
        if (!(vs >> p.vectors(r, j))) throw ParseError("load_profiles: bad vector row", lineno);
    }
    if (!set.nodes.empty() && set.nodes.back() >= node)
      throw ParseError("load_profiles: node ids must be strictly ascending", lineno);
    set.nodes.push_back(node);
    set.profiles.push_back(std::move(p));
  }
  return set;
}

} // namespace pcast
