#include <cmath>
#include <random>

#include "doctest.h"
#include "dtomo/std_relaxation.hpp"
#include "dtomo/instance.hpp"
#include "test_util.hpp"

using namespace dtomo;
using dtomo_test::inf;

TEST_SUITE("std_oracle") {

TEST_CASE("zero-unary binary potts pair with target 1 is worth exactly 0") {
  ChainSubproblem sub = make_chain(2, 2);
  sub.pairwise[0] = make_pairwise_table(PairwiseKind::potts, 1.0, 2);
  sub.target = 1;
  const StdRayDual dual = std_ray_value(sub);
  CHECK(!dual.unbounded);
  CHECK(std::abs(dual.value) <= 1e-9);
  // the exact constrained optimum is 1, so the scalar price leaves a unit gap
  CHECK(solve_chain_dp_naive(sub).value == 1.0);
}

TEST_CASE("asymmetric unaries give a fractional scalar bound") {
  ChainSubproblem sub = make_chain(2, 2);
  sub.pairwise[0] = make_pairwise_table(PairwiseKind::potts, 1.0, 2);
  sub.unary(1, 1) = 0.5;
  sub.target = 1;
  // g(gamma) = min(-gamma, 1, 1.5, 0.5 + gamma) peaks at gamma = -1/4
  const StdRayDual dual = std_ray_value(sub);
  CHECK(!dual.unbounded);
  CHECK(dual.value == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(dual.gamma == doctest::Approx(-0.25).epsilon(1e-4));
}

TEST_CASE("forcing target hits the unique feasible labeling exactly") {
  ChainSubproblem sub = make_chain(2, 2);
  sub.unary(0, 0) = 3;
  sub.unary(0, 1) = 1;
  sub.unary(1, 0) = 2;
  sub.unary(1, 1) = 5;
  sub.target = 2;  // both labels forced to 1
  const StdRayDual dual = std_ray_value(sub);
  CHECK(!dual.unbounded);
  CHECK(dual.value == 6.0);
  CHECK(dual.witness == std::vector<int>{1, 1});
}

TEST_CASE("unreachable targets are reported unbounded") {
  ChainSubproblem sub = make_chain(2, 2);
  sub.target = 5;
  const StdRayDual dual = std_ray_value(sub);
  CHECK(dual.unbounded);
  CHECK(dual.value == inf);
}

TEST_CASE("a node with all-infinite unaries makes the dual unbounded") {
  ChainSubproblem sub = make_chain(3, 2);
  sub.unary(1, 0) = inf;
  sub.unary(1, 1) = inf;
  sub.target = 2;
  const StdRayDual dual = std_ray_value(sub);
  CHECK(dual.unbounded);
}

TEST_CASE("scalar bound never exceeds the exact constrained optimum") {
  std::mt19937_64 rng(99);
  for (int it = 0; it < 300; ++it) {
    const int n = 1 + static_cast<int>(rng() % 7);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const StdRayDual dual = std_ray_value(sub);
    const double exact = solve_chain_dp_naive(sub).value;
    REQUIRE(!dual.unbounded);
    CHECK(dual.value <= exact + 1e-9);
  }
}

TEST_CASE("the witness reproduces the dual value at the returned price") {
  std::mt19937_64 rng(100);
  for (int it = 0; it < 100; ++it) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const StdRayDual dual = std_ray_value(sub);
    REQUIRE(!dual.unbounded);
    REQUIRE(dual.witness.size() == static_cast<size_t>(n));
    long long sum = 0;
    for (const int x : dual.witness) {
      CHECK(x >= 0);
      CHECK(x < k);
      sum += x;
    }
    const double replay = dtomo_test::chain_cost(sub, dual.witness) +
                          dual.gamma * static_cast<double>(sum - *sub.target);
    CHECK(dual.value == doctest::Approx(replay).epsilon(1e-9));
  }
}

TEST_CASE("fixed labels via infinite unaries keep the oracle sound") {
  std::mt19937_64 rng(101);
  for (int it = 0; it < 120; ++it) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    // fix one node to one random label, as branching does
    const int u = static_cast<int>(rng() % n);
    const int keep = static_cast<int>(rng() % k);
    for (int x = 0; x < k; ++x)
      if (x != keep) sub.unary(u, x) = inf;
    const StdRayDual dual = std_ray_value(sub);
    const double exact = solve_chain_dp_naive(sub).value;
    if (dual.unbounded) {
      // unbounded certifies infeasibility of the restricted chain
      CHECK(exact == inf);
    } else {
      CHECK(dual.value <= exact + 1e-9);
    }
  }
}

}  // TEST_SUITE
