#include "tractmap/graph.hpp"
#include "tractmap/rng.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

using tractmap::Mapping;
using tractmap::Point3;
using tractmap::Streamline;
using tractmap::Tractography;

namespace {

Tractography two_point_pair() {
  Tractography t;
  Streamline s1(3, 1);
  s1.col(0) = Point3(0, 0, 0);
  Streamline s2(3, 1);
  s2.col(0) = Point3(3, 4, 0);
  t.streamlines = {s1, s2};
  return t;
}

}  // namespace

TEST_CASE("distance_matrix: single streamline gives [[0]]") {
  Tractography t;
  Streamline s(3, 2);
  s << 0, 1, 0, 0, 0, 0;
  t.streamlines = {s};
  const Eigen::MatrixXd m = tractmap::distance_matrix(t);
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 1);
  CHECK(m(0, 0) == 0.0);
}

TEST_CASE("distance_matrix: two single-point streamlines give [[0,5],[5,0]]") {
  const Eigen::MatrixXd m = tractmap::distance_matrix(two_point_pair());
  REQUIRE(m.rows() == 2);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 1) == 0.0);
  CHECK(m(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(m(1, 0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("distance_matrix: output satisfies the DistanceMatrix invariants") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "dm-invariants"));
  const Tractography t = testsupport::random_tractography(rng, 10, 8);
  const Eigen::MatrixXd m = tractmap::distance_matrix(t);
  CHECK(tractmap::is_valid_distance_matrix(m));
  CHECK((m - m.transpose()).norm() == 0.0);
  CHECK(m.diagonal().norm() == 0.0);
  CHECK(m.minCoeff() >= 0.0);
}

TEST_CASE("distance_matrix: bit-identical across thread counts") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "dm-threads"));
  const Tractography t = testsupport::random_tractography(rng, 12, 10);
  const Eigen::MatrixXd sequential = tractmap::distance_matrix(t, 1);
  const Eigen::MatrixXd pooled = tractmap::distance_matrix(t, 4);
  CHECK((sequential - pooled).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("distance_matrix: empty tractography throws") {
  CHECK_THROWS_AS(tractmap::distance_matrix(Tractography{}), std::invalid_argument);
}

TEST_CASE("cross_distance_matrix: rectangular MAM distances, thread-stable") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "cross"));
  const Tractography a = testsupport::random_tractography(rng, 5, 6);
  const Tractography b = testsupport::random_tractography(rng, 7, 6);
  const Eigen::MatrixXd c = tractmap::cross_distance_matrix(a, b);
  REQUIRE(c.rows() == 5);
  REQUIRE(c.cols() == 7);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 7; ++j)
      CHECK(c(i, j) == tractmap::mam_distance(a.streamlines[static_cast<std::size_t>(i)],
                                              b.streamlines[static_cast<std::size_t>(j)]));
  const Eigen::MatrixXd pooled = tractmap::cross_distance_matrix(a, b, 3);
  CHECK((c - pooled).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mapping_loss: identity on identical matrices is zero") {
  Eigen::MatrixXd a(3, 3);
  a << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  const Mapping identity{0, 1, 2};
  CHECK(tractmap::mapping_loss(a, a, identity) == 0.0);
}

TEST_CASE("mapping_loss: worked 2x2 example, identity mapping") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 0, 2, 2, 0;
  CHECK(tractmap::mapping_loss(a, b, {0, 1}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("mapping_loss: many-to-one collapse zeroes the image") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 0, 2, 2, 0;
  CHECK(tractmap::mapping_loss(a, b, {0, 0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("mapping_loss: dimension mismatches throw") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 0, 2, 2, 0;
  CHECK_THROWS_AS(tractmap::mapping_loss(a, b, {0}), std::invalid_argument);
  CHECK_THROWS_AS(tractmap::mapping_loss(a, b, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(tractmap::mapping_loss(a, b, {0, -1}), std::invalid_argument);
}

TEST_CASE("squared_mapping_loss equals the square of mapping_loss") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "squared"));
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(8));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform_index(8));
    const Eigen::MatrixXd a = testsupport::random_distance_matrix(rng, n);
    const Eigen::MatrixXd b = testsupport::random_distance_matrix(rng, m);
    const Mapping q = testsupport::random_mapping(rng, n, m);
    const double loss = tractmap::mapping_loss(a, b, q);
    CHECK(std::abs(tractmap::squared_mapping_loss(a, b, q) - loss * loss) <= 1e-12);
  }
}

TEST_CASE("normalized_loss: worked values and domain error") {
  CHECK(tractmap::normalized_loss(std::sqrt(2.0), 2) ==
        doctest::Approx(0.7071067811865476).epsilon(1e-12));
  CHECK(tractmap::normalized_loss(0.0, 60) == 0.0);
  CHECK(tractmap::normalized_loss(10.0, 1) == 10.0);
  CHECK_THROWS_AS(tractmap::normalized_loss(1.0, 0), std::invalid_argument);
}

TEST_CASE("remap_delta: reassigning to the current target is exactly zero") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "delta-noop"));
  const Eigen::MatrixXd a = testsupport::random_distance_matrix(rng, 6);
  const Eigen::MatrixXd b = testsupport::random_distance_matrix(rng, 7);
  const Mapping q = testsupport::random_mapping(rng, 6, 7);
  for (Eigen::Index i = 0; i < 6; ++i)
    CHECK(tractmap::remap_delta(a, b, q, i, q[static_cast<std::size_t>(i)]) == 0.0);
}

TEST_CASE("remap_delta: worked 2x2 example is zero between equal-loss mappings") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 0, 2, 2, 0;
  // q=(0,1) and q'=(0,0) both have squared loss 2, so the delta is 0.
  CHECK(tractmap::remap_delta(a, b, {0, 1}, 1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("remap_delta: strictly improving move on a 2x2 instance") {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  // b == a, collapsed start q=(0,0): moving source 1 to target 1 repairs the
  // isomorphism, squared loss 2 -> 0.
  CHECK(tractmap::remap_delta(a, a, {0, 0}, 1, 1) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("remap_delta: agrees with the full-recompute oracle on 200 random instances") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "delta-oracle"));
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(12));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform_index(12));
    const Eigen::MatrixXd a = testsupport::random_distance_matrix(rng, n);
    const Eigen::MatrixXd b = testsupport::random_distance_matrix(rng, m);
    const Mapping q = testsupport::random_mapping(rng, n, m);
    const Eigen::Index i = static_cast<Eigen::Index>(rng.uniform_index(n));
    const Eigen::Index j = static_cast<Eigen::Index>(rng.uniform_index(m));
    Mapping q2 = q;
    q2[static_cast<std::size_t>(i)] = j;
    const double expected =
        tractmap::squared_mapping_loss(a, b, q2) - tractmap::squared_mapping_loss(a, b, q);
    CHECK(std::abs(tractmap::remap_delta(a, b, q, i, j) - expected) <= 1e-9);
  }
}

TEST_CASE("remap_delta: out-of-range indices throw") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 1, 1, 0;
  b << 0, 2, 2, 0;
  CHECK_THROWS_AS(tractmap::remap_delta(a, b, {0, 1}, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(tractmap::remap_delta(a, b, {0, 1}, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(tractmap::remap_delta(a, b, {0, 1}, -1, 0), std::invalid_argument);
}

TEST_CASE("mapping_loss: invariant under simultaneous source relabeling") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "relabel"));
  const Eigen::Index n = 6;
  const Eigen::MatrixXd a = testsupport::random_distance_matrix(rng, n);
  const Eigen::MatrixXd b = testsupport::random_distance_matrix(rng, 9);
  const Mapping q = testsupport::random_mapping(rng, n, 9);

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t k = perm.size(); k > 1; --k)
    std::swap(perm[k - 1], perm[rng.uniform_index(static_cast<Eigen::Index>(k))]);

  Eigen::MatrixXd a2(n, n);
  Mapping q2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    q2[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    for (Eigen::Index j = 0; j < n; ++j)
      a2(i, j) = a(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  CHECK(std::abs(tractmap::mapping_loss(a2, b, q2) - tractmap::mapping_loss(a, b, q)) <= 1e-12);
}

TEST_CASE("mapping_loss: isomorphic matrices reach exactly zero") {
  tractmap::Xoshiro256 rng(tractmap::derive_seed(20240102, "isomorphism"));
  const Eigen::Index n = 7;
  const Eigen::MatrixXd a = testsupport::random_distance_matrix(rng, n);

  std::vector<Eigen::Index> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 0);
  for (std::size_t k = pi.size(); k > 1; --k)
    std::swap(pi[k - 1], pi[rng.uniform_index(static_cast<Eigen::Index>(k))]);

  // b(pi(i), pi(j)) = a(i, j), so mapping source i to pi(i) is lossless.
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      b(pi[static_cast<std::size_t>(i)], pi[static_cast<std::size_t>(j)]) = a(i, j);

  CHECK(tractmap::mapping_loss(a, b, pi) == 0.0);
}

TEST_CASE("is_valid_distance_matrix: accepts valid, rejects violations") {
  Eigen::MatrixXd good(2, 2);
  good << 0, 3, 3, 0;
  CHECK(tractmap::is_valid_distance_matrix(good));

  Eigen::MatrixXd asym = good;
  asym(0, 1) = 4;
  CHECK_FALSE(tractmap::is_valid_distance_matrix(asym));

  Eigen::MatrixXd diag = good;
  diag(0, 0) = 1;
  CHECK_FALSE(tractmap::is_valid_distance_matrix(diag));

  Eigen::MatrixXd negative = good;
  negative(0, 1) = negative(1, 0) = -1;
  CHECK_FALSE(tractmap::is_valid_distance_matrix(negative));

  CHECK_FALSE(tractmap::is_valid_distance_matrix(Eigen::MatrixXd::Zero(2, 3)));
}
