#pragma once

// Independent re-implementations the tests check the library against. They
// share no code with src/: the SVD oracle diagonalizes A^T A with cyclic
// Jacobi rotations, encounters are recounted second by second, similarity is
// the naive double sum, and the credit oracle re-states the ledger laws.

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "pcast/profile.hpp"
#include "pcast/rng.hpp"
#include "pcast/trace.hpp"
#include "pcast/types.hpp"

namespace oracle {

struct Spectrum {
  pcast::Vector values;  // singular values of A, descending
  pcast::Matrix vectors; // right singular vectors, one column per value
};

// Cyclic Jacobi eigensolve of the Gram matrix A^T A. Eigenvalues of A^T A
// are the squared singular values of A; eigenvectors are A's right singular
// vectors. Independent of any SVD routine.
inline Spectrum gram_jacobi(const pcast::Matrix& a, int sweeps = 64) {
  const int n = static_cast<int>(a.cols());
  pcast::Matrix b = a.transpose() * a;
  pcast::Matrix v = pcast::Matrix::Identity(n, n);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += b(p, q) * b(p, q);
    if (off < 1e-28 * b.norm() * b.norm() || off == 0.0) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (b(p, q) == 0.0) continue;
        const double theta = (b(q, q) - b(p, p)) / (2.0 * b(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        pcast::Matrix rot = pcast::Matrix::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        b = rot.transpose() * b * rot;
        v = v * rot;
      }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return b(x, x) > b(y, y); });
  Spectrum out;
  out.values = pcast::Vector(n);
  out.vectors = pcast::Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = std::sqrt(std::max(0.0, b(order[i], order[i])));
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

// Naive similarity: plain nested loops, natural summation order.
inline double similarity(const pcast::BehavioralProfile& x, const pcast::BehavioralProfile& y) {
  double sum = 0.0;
  for (int i = 0; i < x.rank(); ++i)
    for (int j = 0; j < y.rank(); ++j)
      sum += x.weights(i) * y.weights(j) * std::abs(x.vectors.col(i).dot(y.vectors.col(j)));
  return sum;
}

// Seconds each node pair spends co-located, recounted one second at a time.
// Only usable for small integer fixtures.
inline std::map<std::tuple<pcast::NodeId, pcast::NodeId, pcast::LocationId>, long>
co_location_seconds(const std::vector<pcast::AssociationRecord>& records) {
  std::map<std::tuple<pcast::NodeId, pcast::NodeId, pcast::LocationId>, long> seconds;
  pcast::Timestamp max_end = 0;
  for (const auto& r : records) max_end = std::max(max_end, r.end);
  for (pcast::Timestamp t = 0; t < max_end; ++t) {
    std::map<pcast::LocationId, std::vector<pcast::NodeId>> present;
    for (const auto& r : records)
      if (r.start <= t && t < r.end) present[r.location].push_back(r.node);
    for (auto& [loc, nodes] : present) {
      std::sort(nodes.begin(), nodes.end());
      nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
          ++seconds[{nodes[i], nodes[j], loc}];
    }
  }
  return seconds;
}

// The credit laws, restated: balances start at `initial`, origination costs
// `threshold` and is refused below it, each forward earns 1, and a drop is
// only affordable at or above the threshold.
struct CreditOracle {
  long threshold = 4;
  long initial = 4;
  std::map<pcast::NodeId, long> balance;

  long& at(pcast::NodeId n) {
    auto it = balance.find(n);
    if (it == balance.end()) it = balance.emplace(n, initial).first;
    return it->second;
  }
  bool originate(pcast::NodeId n) {
    long& b = at(n);
    if (b < threshold) return false;
    b -= threshold;
    return true;
  }
  void forward(pcast::NodeId n) { ++at(n); }
  bool can_drop(pcast::NodeId n) { return at(n) >= threshold; }
};

// Rank-1 profile whose similarity to direction(0) is exactly `cosine`:
// weights = (1), vector = (cosine, sqrt(1 - cosine^2), 0, ...).
inline pcast::BehavioralProfile direction_profile(double cosine, int dims = 3) {
  pcast::BehavioralProfile p;
  p.weights = pcast::Vector::Ones(1);
  p.vectors = pcast::Matrix::Zero(dims, 1);
  p.vectors(0, 0) = cosine;
  p.vectors(1, 0) = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  return p;
}

// Random profile with orthonormal columns (Gram-Schmidt over uniform noise)
// and normalized descending weights.
inline pcast::BehavioralProfile random_profile(pcast::Rng& rng, int dims, int rank) {
  pcast::Matrix v(dims, rank);
  for (int c = 0; c < rank; ++c) {
    for (int r = 0; r < dims; ++r) v(r, c) = 2.0 * rng.uniform() - 1.0;
    for (int p = 0; p < c; ++p) v.col(c) -= v.col(p).dot(v.col(c)) * v.col(p);
    v.col(c) /= v.col(c).norm();
  }
  pcast::Vector w(rank);
  for (int i = 0; i < rank; ++i) w(i) = rng.uniform() + 0.05;
  std::sort(w.data(), w.data() + rank, std::greater<>());
  w /= w.sum();
  pcast::BehavioralProfile p;
  p.vectors = std::move(v);
  p.weights = std::move(w);
  return p;
}

inline pcast::Matrix random_matrix(pcast::Rng& rng, int rows, int cols) {
  pcast::Matrix a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = 2.0 * rng.uniform() - 1.0;
  return a;
}

} // namespace oracle
