#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dtomo/matrix.hpp"

namespace dtomo {

// one-dimensional subproblem: a chain of nodes with an optional label-sum target
struct ChainSubproblem {
  std::vector<int> node_ids;             // global node ids, size n
  matrix<double> unary;                  // n x k
  std::vector<matrix<double>> pairwise;  // n-1 tables, each k x k
  std::optional<long long> target;

  int num_nodes() const { return static_cast<int>(unary.dim1()); }
  int num_labels() const { return static_cast<int>(unary.dim2()); }
};

ChainSubproblem make_chain(int n, int k);  // zero costs, identity node ids, no target

struct ChainSolution {
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> labels;  // empty iff infeasible

  bool feasible() const { return std::isfinite(value); }
};

// exact DP over (label, prefix sum) states for the sum-constrained chain;
// forward/completion tables are retained for min-marginal queries
class TargetedChainDP {
 public:
  explicit TargetedChainDP(const ChainSubproblem& sub);

  double value() const { return value_; }
  const std::vector<int>& labels() const { return labels_; }
  ChainSolution solution() const { return {value_, labels_}; }

  // entry (u, x) = optimal chain value with node u fixed to label x; +inf if infeasible
  matrix<double> min_marginals() const;

 private:
  int n_, k_;
  long long b_;
  std::vector<matrix<double>> forward_;     // per node: k x (b+1), prefix sum including the node
  std::vector<matrix<double>> completion_;  // per node: k x (b+1), required sum after the node
  double value_ = std::numeric_limits<double>::infinity();
  std::vector<int> labels_;
};

// optimal value and lexicographically smallest optimal labeling of the sum-constrained chain
ChainSolution solve_chain_dp_naive(const ChainSubproblem& sub);

// unconstrained chain optimum (Viterbi); ignores any target
ChainSolution chain_map_dp(const ChainSubproblem& sub);

// targeted chains use the sum-state DP, energy-only chains the unconstrained forward/backward
matrix<double> min_marginals(const ChainSubproblem& sub);

}  // namespace dtomo
