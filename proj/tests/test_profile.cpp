#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pcast/profile.hpp"

using namespace pcast;

TEST_CASE("svd agrees with a Jacobi eigensolve of the Gram matrix") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng.uniform_int(12));
    const int cols = 2 + static_cast<int>(rng.uniform_int(8));
    const Matrix a = oracle::random_matrix(rng, rows, cols);
    const auto result = svd(a, cols);
    const auto ref = oracle::gram_jacobi(a);
    REQUIRE(result.s.size() <= ref.values.size());
    for (int i = 0; i < result.s.size(); ++i) {
      CHECK(result.s(i) == doctest::Approx(ref.values(i)).epsilon(1e-10));
      // vectors match up to sign
      const double cosine = std::abs(result.v.col(i).dot(ref.vectors.col(i)));
      CHECK(cosine == doctest::Approx(1.0).epsilon(1e-8));
    }
    // descending order
    for (int i = 1; i < result.s.size(); ++i) CHECK(result.s(i - 1) >= result.s(i));
  }
}

TEST_CASE("svd reconstructs the input matrix") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng.uniform_int(20));
    const int cols = 2 + static_cast<int>(rng.uniform_int(10));
    const Matrix a = oracle::random_matrix(rng, rows, cols);
    const auto result = svd(a, cols);
    // recover U columns as A v / s, then check A = U S V^T
    Matrix u(rows, result.s.size());
    for (int i = 0; i < result.s.size(); ++i) u.col(i) = a * result.v.col(i) / result.s(i);
    const Matrix back = u * result.s.asDiagonal() * result.v.transpose();
    CHECK((a - back).norm() < 1e-8);
    // right vectors orthonormal
    const Matrix gram = result.v.transpose() * result.v;
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).norm() < 1e-10);
  }
}

TEST_CASE("svd truncates to k values") {
  Rng rng(43);
  const Matrix a = oracle::random_matrix(rng, 9, 6);
  const auto full = svd(a, 6);
  REQUIRE(full.s.size() == 6);
  const auto cut = svd(a, 2);
  REQUIRE(cut.s.size() == 2);
  CHECK(cut.s(0) == doctest::Approx(full.s(0)).epsilon(1e-12));
  CHECK(cut.s(1) == doctest::Approx(full.s(1)).epsilon(1e-12));
  CHECK((cut.v.col(0) - full.v.col(0)).norm() < 1e-12);
}

TEST_CASE("svd drops numerically zero singular values") {
  // rank-1 matrix: only one value survives regardless of k
  Matrix a(4, 3);
  Vector u(4), v(3);
  u << 1, 2, 3, 4;
  v << 0.5, 0.5, 0.7;
  a = u * v.transpose();
  const auto result = svd(a, 3);
  CHECK(result.s.size() == 1);
  CHECK(result.s(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
}

TEST_CASE("svd sign convention makes the result deterministic") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = oracle::random_matrix(rng, 8, 5);
    const auto r1 = svd(a, 5);
    const auto r2 = svd(a, 5);
    CHECK(r1.v == r2.v);
    CHECK(r1.s == r2.s);
    for (int i = 0; i < r1.v.cols(); ++i) {
      int pivot = 0;
      for (int j = 1; j < r1.v.rows(); ++j)
        if (std::abs(r1.v(j, i)) > std::abs(r1.v(pivot, i))) pivot = j;
      CHECK(r1.v(pivot, i) > 0.0);
    }
  }
}

TEST_CASE("svd rejects degenerate input") {
  CHECK_THROWS_AS(svd(Matrix::Zero(3, 3), 2), ValidationError);
  CHECK_THROWS_AS(svd(Matrix(), 2), ValidationError);
  CHECK_THROWS_AS(svd(Matrix::Ones(2, 2), 0), ValidationError);
  CHECK_THROWS_AS(svd(Matrix::Ones(2, 2), -1), ValidationError);
}

TEST_CASE("build_profile normalizes weights") {
  Rng rng(45);
  const auto result = svd(oracle::random_matrix(rng, 7, 5), 4);
  const auto p = build_profile(result);
  CHECK(p.rank() == result.s.size());
  CHECK(p.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i < p.weights.size(); ++i) CHECK(p.weights(i - 1) >= p.weights(i));
  for (int i = 0; i < p.weights.size(); ++i)
    CHECK(p.weights(i) == doctest::Approx(result.s(i) / result.s.sum()).epsilon(1e-12));
  CHECK_THROWS_AS(build_profile(SvdResult{}), ValidationError);
}

TEST_CASE("similarity matches the naive double sum") {
  Rng rng(46);
  for (int trial = 0; trial < 50; ++trial) {
    const int dims = 3 + static_cast<int>(rng.uniform_int(8));
    const auto x = oracle::random_profile(rng, dims, 1 + static_cast<int>(rng.uniform_int(4)));
    const auto y = oracle::random_profile(rng, dims, 1 + static_cast<int>(rng.uniform_int(4)));
    const double got = similarity(x, y);
    CHECK(got == doctest::Approx(oracle::similarity(x, y)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0 + 1e-12);
    // symmetric to the last bit
    CHECK(similarity(x, y) == similarity(y, x));
  }
}

TEST_CASE("self-similarity is the squared weight norm, 1 only at rank one") {
  Rng rng(47);
  const auto single = oracle::random_profile(rng, 6, 1);
  CHECK(similarity(single, single) == doctest::Approx(1.0).epsilon(1e-12));
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = oracle::random_profile(rng, 6, 2 + static_cast<int>(rng.uniform_int(3)));
    const double expected = p.weights.squaredNorm();
    CHECK(similarity(p, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(similarity(p, p) < 1.0);
  }
}

TEST_CASE("aligned rank-one profiles hit exactly their cosine") {
  for (const double c : {0.0, 0.25, 0.8, 1.0}) {
    const auto x = oracle::direction_profile(c);
    const auto reference = oracle::direction_profile(1.0);
    CHECK(similarity(x, reference) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("anchor targets copy an existing profile") {
  Rng rng(48);
  std::vector<NodeId> nodes = {3, 7, 11};
  std::vector<BehavioralProfile> profiles;
  for (int i = 0; i < 3; ++i) profiles.push_back(oracle::random_profile(rng, 5, 2));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto draw = generate_target_profile(nodes, profiles, TargetMode::Anchor, 0.1, seed);
    const auto it = std::find(nodes.begin(), nodes.end(), draw.anchor);
    REQUIRE(it != nodes.end());
    const auto& src = profiles[it - nodes.begin()];
    CHECK(draw.profile.vectors == src.vectors);
    CHECK(draw.profile.weights == src.weights);
  }
}

TEST_CASE("perturbed targets stay orthonormal and deterministic") {
  Rng rng(49);
  std::vector<NodeId> nodes = {0, 1, 2, 3};
  std::vector<BehavioralProfile> profiles;
  for (int i = 0; i < 4; ++i) profiles.push_back(oracle::random_profile(rng, 6, 3));

  const auto zero = generate_target_profile(nodes, profiles, TargetMode::Perturbed, 0.0, 5);
  const auto& src = profiles[zero.anchor];
  CHECK(zero.profile.vectors == src.vectors);

  const auto a = generate_target_profile(nodes, profiles, TargetMode::Perturbed, 0.3, 5);
  const auto b = generate_target_profile(nodes, profiles, TargetMode::Perturbed, 0.3, 5);
  CHECK(a.anchor == b.anchor);
  CHECK(a.profile.vectors == b.profile.vectors);
  CHECK(a.profile.vectors != profiles[a.anchor].vectors);
  const Matrix gram = a.profile.vectors.transpose() * a.profile.vectors;
  CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).norm() < 1e-10);
  CHECK(a.profile.weights == profiles[a.anchor].weights);

  CHECK_THROWS_AS(generate_target_profile({}, {}, TargetMode::Anchor, 0.0, 1), ValidationError);
}

TEST_CASE("profile cache round-trips losslessly") {
  Rng rng(50);
  ProfileSet set;
  for (NodeId n : {2, 5, 6, 9}) {
    set.nodes.push_back(n);
    set.profiles.push_back(oracle::random_profile(rng, 7, 1 + static_cast<int>(rng.uniform_int(4))));
  }
  std::stringstream buf;
  save_profiles(buf, set);
  const auto back = load_profiles(buf);
  REQUIRE(back.nodes == set.nodes);
  REQUIRE(back.profiles.size() == set.profiles.size());
  for (std::size_t i = 0; i < set.profiles.size(); ++i) {
    CHECK(back.profiles[i].vectors == set.profiles[i].vectors);
    CHECK(back.profiles[i].weights == set.profiles[i].weights);
  }
}

TEST_CASE("profile cache loader rejects foreign or corrupt files") {
  std::istringstream wrong_version("pcast-profiles 9\n");
  CHECK_THROWS_AS(load_profiles(wrong_version), ValidationError);
  std::istringstream garbage("not a cache\n");
  CHECK_THROWS_AS(load_profiles(garbage), ValidationError);

  Rng rng(51);
  ProfileSet set;
  set.nodes = {4, 1}; // descending ids are refused on load
  set.profiles.push_back(oracle::random_profile(rng, 3, 1));
  set.profiles.push_back(oracle::random_profile(rng, 3, 1));
  std::stringstream buf;
  save_profiles(buf, set);
  CHECK_THROWS_AS(load_profiles(buf), ParseError);
}
