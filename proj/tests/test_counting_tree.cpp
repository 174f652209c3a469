#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "dtomo/counting_tree.hpp"
#include "dtomo/instance.hpp"
#include "test_util.hpp"

using namespace dtomo;
using dtomo_test::inf;

namespace {

// independent count of (x_left, s, x_right) states: walks the same split rule
// but enumerates the intermediate-sum range instead of using the closed form
long long reference_entries(int lo, int hi, int k) {
  const int len = hi - lo + 1;
  long long own = 0;
  if (len == 1) {
    own = k;
  } else {
    long long smax = 0;
    for (int i = 0; i < len - 2; ++i) smax += k - 1;
    for (long long s = 0; s <= smax; ++s) own += static_cast<long long>(k) * k;
  }
  if (len <= 2) return own;
  const int j = lo + len / 2 - 1;
  return own + reference_entries(lo, j, k) + reference_entries(j + 1, hi, k);
}

}  // namespace

TEST_SUITE("counting_tree") {

TEST_CASE("counting space sizes") {
  CHECK(counting_space_size(1, 3) == 3);
  CHECK(counting_space_size(2, 3) == 9);
  CHECK(counting_space_size(3, 2) == 8);
  CHECK(counting_space_size(4, 3) == 45);
  CHECK(counting_space_size(2, 5) == 25);
}

TEST_CASE("tree shape for tiny chains") {
  const CountingTree t2(2);
  CHECK(t2.num_nodes() == 1);
  CHECK(t2.node(t2.root()).is_leaf());
  CHECK(t2.node(t2.root()).length() == 2);

  const CountingTree t3(3);
  REQUIRE(t3.num_nodes() == 3);
  const auto& root = t3.node(t3.root());
  CHECK(root.length() == 3);
  CHECK(t3.node(root.left).lo == 0);
  CHECK(t3.node(root.left).hi == 0);
  CHECK(t3.node(root.right).lo == 1);
  CHECK(t3.node(root.right).hi == 2);
}

TEST_CASE("equipartition splits, leaf sizes, child order") {
  for (const int n : {1, 2, 3, 4, 5, 8, 13, 32, 100, 257}) {
    const CountingTree tree(n);
    CHECK(tree.node(tree.root()).lo == 0);
    CHECK(tree.node(tree.root()).hi == n - 1);
    for (int id = 0; id < tree.num_nodes(); ++id) {
      const auto& node = tree.node(id);
      CHECK(node.length() >= 1);
      if (node.is_leaf()) {
        CHECK(node.length() <= 2);
      } else {
        const auto& l = tree.node(node.left);
        const auto& r = tree.node(node.right);
        // children precede the parent, partition it, and split at lo + len/2 - 1
        CHECK(node.left < id);
        CHECK(node.right < id);
        CHECK(l.lo == node.lo);
        CHECK(l.hi == node.lo + node.length() / 2 - 1);
        CHECK(r.lo == l.hi + 1);
        CHECK(r.hi == node.hi);
        CHECK(r.length() >= 2);
        if (l.length() == 1) CHECK(node.length() == 3);
      }
    }
  }
}

TEST_CASE("total counting entries match the reference enumerator") {
  for (const int n : {2, 3, 4, 5, 7, 16, 33, 100}) {
    for (int k = 2; k <= 5; ++k) {
      const CountingTree tree(n);
      CHECK(tree.total_counting_entries(k) == reference_entries(0, n - 1, k));
    }
  }
}

TEST_CASE("tree solver equals naive dp on the frozen pair") {
  ChainSubproblem sub = make_chain(2, 2);
  sub.pairwise[0] = make_pairwise_table(PairwiseKind::potts, 1.0, 2);
  sub.target = 1;
  const ChainSolution sol = solve_chain_tomo_tree(sub);
  REQUIRE(sol.feasible());
  CHECK(sol.value == 1.0);
  long long sum = 0;
  for (const int x : sol.labels) sum += x;
  CHECK(sum == 1);
}

TEST_CASE("tree solver equals naive dp and enumeration on random chains") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> nd(1, 9);
  std::uniform_int_distribution<int> kd(2, 4);
  for (int it = 0; it < 200; ++it) {
    const int n = nd(rng);
    const int k = kd(rng);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const ChainSolution tree = solve_chain_tomo_tree(sub);
    const ChainSolution dp = solve_chain_dp_naive(sub);
    CHECK(tree.value == dp.value);
    if (n * k <= 4096) CHECK(tree.value == dtomo_test::enumerate_chain(sub).value);
    REQUIRE(tree.feasible());
    // the recovered labeling certifies the value: feasible and cost-consistent
    long long sum = 0;
    for (const int x : tree.labels) sum += x;
    CHECK(sum == *sub.target);
    CHECK(dtomo_test::chain_cost(sub, tree.labels) == tree.value);
  }
}

TEST_CASE("tree solver handles infinite unaries and infeasible targets") {
  std::mt19937_64 rng(43);
  for (int it = 0; it < 120; ++it) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k, 10, 0.3);
    sub.target = static_cast<long long>(rng() % (n * (k - 1) + 2));
    const ChainSolution tree = solve_chain_tomo_tree(sub);
    const ChainSolution dp = solve_chain_dp_naive(sub);
    CHECK(tree.value == dp.value);
    if (tree.feasible()) {
      long long sum = 0;
      for (const int x : tree.labels) sum += x;
      CHECK(sum == *sub.target);
      CHECK(dtomo_test::chain_cost(sub, tree.labels) == tree.value);
    }
  }
}

TEST_CASE("both convolution kernels produce bitwise-identical solver results") {
  std::mt19937_64 rng(44);
  for (int it = 0; it < 60; ++it) {
    const int n = 2 + static_cast<int>(rng() % 10);
    const int k = 2 + static_cast<int>(rng() % 3);
    ChainSubproblem sub = dtomo_test::random_chain(rng, n, k);
    sub.target = dtomo_test::random_feasible_target(rng, n, k);
    const CountingTreeSolver a(sub, MinConvKernel::naive);
    const CountingTreeSolver b(sub, MinConvKernel::fast);
    CHECK(a.value() == b.value());
    CHECK(a.labels() == b.labels());
    for (int id = 0; id < a.tree().num_nodes(); ++id) CHECK(a.up_table(id) == b.up_table(id));
  }
}

TEST_CASE("unary shift moves the tree value by the same amount") {
  std::mt19937_64 rng(46);
  ChainSubproblem sub = dtomo_test::random_chain(rng, 6, 3);
  sub.target = 8;
  const double base = solve_chain_tomo_tree(sub).value;
  for (int x = 0; x < 3; ++x) sub.unary(3, x) += 5.0;
  CHECK(solve_chain_tomo_tree(sub).value == base + 5.0);
}

}  // TEST_SUITE
