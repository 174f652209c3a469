#pragma once

#include <vector>

#include "dtomo/chain.hpp"
#include "dtomo/min_conv.hpp"

namespace dtomo {

// number of (left label, intermediate sum, right label) states of a chain interval
long long counting_space_size(int len, int k);

// balanced interval bisection of chain positions [0, n-1]; an interval of
// length l >= 3 splits after position lo + l/2 - 1, leaves have length <= 2
class CountingTree {
 public:
  struct Node {
    int lo, hi;      // inclusive position interval
    int left = -1;   // child indices into nodes(); -1 for leaves
    int right = -1;

    int length() const { return hi - lo + 1; }
    bool is_leaf() const { return left < 0; }
  };

  explicit CountingTree(int n);

  int root() const { return root_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  // children precede parents, so ascending index order is a valid up-pass order
  long long total_counting_entries(int k) const;

 private:
  int build(int lo, int hi);

  std::vector<Node> nodes_;
  int root_;
};

// exact solver for the sum-constrained chain via min-sum convolutions on the
// interval tree; equivalent to the naive sum-state DP but near-linear in n
class CountingTreeSolver {
 public:
  CountingTreeSolver(const ChainSubproblem& sub, MinConvKernel kernel = MinConvKernel::automatic);

  double value() const { return value_; }
  const std::vector<int>& labels() const { return labels_; }
  ChainSolution solution() const { return {value_, labels_}; }

  const CountingTree& tree() const { return tree_; }
  // counting-state costs after the up pass, indexed like counting_space_size
  const std::vector<double>& up_table(int node_id) const { return tables_[node_id]; }

 private:
  struct StatePick {
    int xl = -1;
    long long s = 0;
    int xr = -1;
  };

  void run_up_pass();
  void run_down_pass();
  void assign_interval(int node_id, const StatePick& pick);

  long long num_sums(int node_id) const;
  double& entry(int node_id, int xl, long long s, int xr);
  double entry(int node_id, int xl, long long s, int xr) const;

  const ChainSubproblem& sub_;
  MinConvKernel kernel_;
  CountingTree tree_;
  std::vector<std::vector<double>> tables_;
  double value_ = std::numeric_limits<double>::infinity();
  std::vector<int> labels_;
};

// convenience wrapper: solve the targeted chain with the tree solver
ChainSolution solve_chain_tomo_tree(const ChainSubproblem& sub,
                                    MinConvKernel kernel = MinConvKernel::automatic);

}  // namespace dtomo
