#include <random>
#include <vector>

#include "doctest.h"
#include "dtomo/chain.hpp"
#include "dtomo/instance.hpp"
#include "test_util.hpp"

using namespace dtomo;
using dtomo_test::inf;

namespace {

ChainSubproblem separating_chain() {
  ChainSubproblem sub = make_chain(2, 2);
  sub.pairwise[0] = make_pairwise_table(PairwiseKind::potts, 1.0, 2);
  sub.target = 1;
  return sub;
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("binary potts pair with target 1 costs exactly 1") {
  const ChainSubproblem sub = separating_chain();
  const ChainSolution sol = solve_chain_dp_naive(sub);
  REQUIRE(sol.feasible());
  CHECK(sol.value == 1.0);
  CHECK(sol.labels == std::vector<int>{0, 1});
}

TEST_CASE("constant-gradient chain reaches zero cost") {
  ChainSubproblem sub = make_chain(3, 3);
  for (auto& p : sub.pairwise) p = make_pairwise_table(PairwiseKind::abs_diff, 1.0, 3);
  sub.target = 3;
  const ChainSolution sol = solve_chain_dp_naive(sub);
  REQUIRE(sol.feasible());
  CHECK(sol.value == 0.0);
  CHECK(sol.labels == std::vector<int>{1, 1, 1});
}

TEST_CASE("single-node chain picks the label matching the target") {
  ChainSubproblem sub = make_chain(1, 3);
  sub.unary(0, 0) = 5;
  sub.unary(0, 1) = 2;
  sub.unary(0, 2) = 7;
  sub.target = 1;
  const ChainSolution sol = solve_chain_dp_naive(sub);
  CHECK(sol.value == 2.0);
  CHECK(sol.labels == std::vector<int>{1});
}

TEST_CASE("infeasible target reports no solution") {
  ChainSubproblem sub = separating_chain();
  sub.target = 5;
  const ChainSolution sol = solve_chain_dp_naive(sub);
  CHECK(!sol.feasible());
  CHECK(sol.value == inf);
  const matrix<double> mm = min_marginals(sub);
  for (int i = 0; i < 2; ++i)
    for (int x = 0; x < 2; ++x) CHECK(mm(i, x) == inf);
}

TEST_CASE("targeted min-marginals on the binary potts pair are all 1") {
  const matrix<double> mm = min_marginals(separating_chain());
  for (int i = 0; i < 2; ++i)
    for (int x = 0; x < 2; ++x) CHECK(mm(i, x) == 1.0);
}

TEST_CASE("unconstrained viterbi ignores the absent target") {
  ChainSubproblem sub = make_chain(2, 2);
  sub.pairwise[0] = make_pairwise_table(PairwiseKind::potts, 1.0, 2);
  sub.unary(1, 1) = -2.0;
  const ChainSolution sol = chain_map_dp(sub);
  CHECK(sol.value == -2.0);
  CHECK(sol.labels == std::vector<int>{1, 1});
}

TEST_CASE("targeted dp equals enumeration, including the lexicographic argmin") {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<int> nd(1, 7);
  std::uniform_int_distribution<int> kd(2, 4);
  for (int it = 0; it < 200; ++it) {
    const int n = nd(rng);
    const int k = kd(rng);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const ChainSolution dp = solve_chain_dp_naive(sub);
    const ChainSolution ref = dtomo_test::enumerate_chain(sub);
    REQUIRE(dp.feasible());
    CHECK(dp.value == ref.value);
    CHECK(dp.labels == ref.labels);
    long long sum = 0;
    for (const int x : dp.labels) sum += x;
    CHECK(sum == *sub.target);
  }
}

TEST_CASE("viterbi equals unconstrained enumeration") {
  std::mt19937_64 rng(315);
  for (int it = 0; it < 120; ++it) {
    ChainSubproblem sub = dtomo_test::random_chain(rng, 1 + static_cast<int>(rng() % 6), 2 + static_cast<int>(rng() % 3));
    const ChainSolution dp = chain_map_dp(sub);
    const ChainSolution ref = dtomo_test::enumerate_chain(sub);
    CHECK(dp.value == ref.value);
    CHECK(dp.labels == ref.labels);
  }
}

TEST_CASE("targeted min-marginals match per-label constrained enumeration") {
  std::mt19937_64 rng(316);
  for (int it = 0; it < 60; ++it) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const matrix<double> mm = min_marginals(sub);
    const double best = solve_chain_dp_naive(sub).value;
    double row_best = inf;
    for (int i = 0; i < n; ++i) {
      for (int x = 0; x < k; ++x) {
        ChainSubproblem fixed = sub;
        for (int y = 0; y < k; ++y)
          if (y != x) fixed.unary(i, y) = inf;
        const double ref = dtomo_test::enumerate_chain(fixed).value;
        CHECK(mm(i, x) == ref);
        if (i == 0) row_best = std::min(row_best, mm(i, x));
      }
    }
    CHECK(row_best == best);
  }
}

TEST_CASE("unconstrained min-marginals match per-label enumeration") {
  std::mt19937_64 rng(317);
  for (int it = 0; it < 60; ++it) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const int k = 2 + static_cast<int>(rng() % 3);
    const ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    const matrix<double> mm = min_marginals(sub);
    for (int i = 0; i < n; ++i)
      for (int x = 0; x < k; ++x) {
        ChainSubproblem fixed = sub;
        for (int y = 0; y < k; ++y)
          if (y != x) fixed.unary(i, y) = inf;
        CHECK(mm(i, x) == dtomo_test::enumerate_chain(fixed).value);
      }
  }
}

TEST_CASE("targeted dp tolerates infinite unaries from label fixing") {
  std::mt19937_64 rng(318);
  for (int it = 0; it < 80; ++it) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k, 10, 0.25);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const ChainSolution dp = solve_chain_dp_naive(sub);
    const ChainSolution ref = dtomo_test::enumerate_chain(sub);
    CHECK(dp.value == ref.value);
    if (ref.feasible()) CHECK(dp.labels == ref.labels);
  }
}

TEST_CASE("adding a constant to a unary row shifts the optimum by it") {
  std::mt19937_64 rng(319);
  ChainSubproblem sub = dtomo_test::random_chain(rng, 5, 3);
  sub.target = 7;
  const double base = solve_chain_dp_naive(sub).value;
  for (int x = 0; x < 3; ++x) sub.unary(2, x) += 4.0;
  CHECK(solve_chain_dp_naive(sub).value == base + 4.0);
}

}  // TEST_SUITE
