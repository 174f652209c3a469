#include "dtomo/counting_tree.hpp"

#include <cassert>
#include <limits>

namespace dtomo {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

long long counting_space_size(int len, int k) {
  assert(len >= 1 && k >= 2);
  if (len == 1) return k;
  const long long sums = 1 + static_cast<long long>(len - 2) * (k - 1);
  return static_cast<long long>(k) * k * sums;
}

CountingTree::CountingTree(int n) {
  assert(n >= 1);
  nodes_.reserve(2 * n);
  root_ = build(0, n - 1);
}

int CountingTree::build(int lo, int hi) {
  Node node{lo, hi};
  if (hi - lo + 1 >= 3) {
    const int split = lo + (hi - lo + 1) / 2 - 1;
    node.left = build(lo, split);
    node.right = build(split + 1, hi);
  }
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size()) - 1;
}

long long CountingTree::total_counting_entries(int k) const {
  long long total = 0;
  for (const auto& node : nodes_) total += counting_space_size(node.length(), k);
  return total;
}

CountingTreeSolver::CountingTreeSolver(const ChainSubproblem& sub, MinConvKernel kernel)
    : sub_(sub), kernel_(kernel), tree_(sub.num_nodes()) {
  assert(static_cast<int>(sub.pairwise.size()) == sub.num_nodes() - 1);
  run_up_pass();
  run_down_pass();
}

long long CountingTreeSolver::num_sums(int node_id) const {
  const auto& node = tree_.node(node_id);
  assert(node.length() >= 2);
  return 1 + static_cast<long long>(node.length() - 2) * (sub_.num_labels() - 1);
}

double& CountingTreeSolver::entry(int node_id, int xl, long long s, int xr) {
  const auto& node = tree_.node(node_id);
  const int k = sub_.num_labels();
  if (node.length() == 1) {
    assert(xl == xr && s == 0);
    return tables_[node_id][xl];
  }
  assert(s >= 0 && s < num_sums(node_id));
  return tables_[node_id][(xl * num_sums(node_id) + s) * k + xr];
}

double CountingTreeSolver::entry(int node_id, int xl, long long s, int xr) const {
  return const_cast<CountingTreeSolver*>(this)->entry(node_id, xl, s, xr);
}

void CountingTreeSolver::run_up_pass() {
  const int k = sub_.num_labels();
  tables_.resize(tree_.num_nodes());

  for (int id = 0; id < tree_.num_nodes(); ++id) {
    const auto& node = tree_.node(id);
    tables_[id].assign(counting_space_size(node.length(), k), inf);

    if (node.is_leaf()) {
      if (node.length() == 1) {
        for (int x = 0; x < k; ++x) tables_[id][x] = sub_.unary(node.lo, x);
      } else {
        const auto& pw = sub_.pairwise[node.lo];
        for (int xl = 0; xl < k; ++xl) {
          for (int xr = 0; xr < k; ++xr) {
            entry(id, xl, 0, xr) = sub_.unary(node.lo, xl) + sub_.unary(node.hi, xr) + pw(xl, xr);
          }
        }
      }
      continue;
    }

    const auto& left = tree_.node(node.left);
    const auto& right = tree_.node(node.right);
    const int j = left.hi;  // junction edge joins positions j and j+1
    const auto& pw = sub_.pairwise[j];
    const int llen = left.length();
    const int rlen = right.length();
    assert(rlen >= 2);  // bisection only produces length-1 intervals on the left

    // sum slices of the child tables, fixed endpoint labels
    const long long sl = llen == 1 ? 1 : num_sums(node.left);
    const long long sr = rlen == 1 ? 1 : num_sums(node.right);
    std::vector<std::vector<double>> a_slices(llen == 1 ? k : k * k);
    std::vector<std::vector<double>> b_slices(rlen == 1 ? k : k * k);
    for (int xi = 0; xi < k; ++xi) {
      if (llen == 1) {
        a_slices[xi] = {tables_[node.left][xi]};
      } else {
        for (int xj = 0; xj < k; ++xj) {
          auto& a = a_slices[xi * k + xj];
          a.resize(sl);
          for (long long s1 = 0; s1 < sl; ++s1) a[s1] = entry(node.left, xi, s1, xj);
        }
      }
    }
    for (int xj1 = 0; xj1 < k; ++xj1) {
      if (rlen == 1) {
        b_slices[xj1] = {tables_[node.right][xj1]};
      } else {
        for (int xr = 0; xr < k; ++xr) {
          auto& b = b_slices[xj1 * k + xr];
          b.resize(sr);
          for (long long s2 = 0; s2 < sr; ++s2) b[s2] = entry(node.right, xj1, s2, xr);
        }
      }
    }

    // parent intermediate sum counts the junction labels only when they are
    // interior to the parent interval
    for (int xi = 0; xi < k; ++xi) {
      for (int xj = (llen == 1 ? xi : 0); xj < (llen == 1 ? xi + 1 : k); ++xj) {
        const auto& a = a_slices[llen == 1 ? xi : xi * k + xj];
        for (int xj1 = 0; xj1 < k; ++xj1) {
          for (int xr = (rlen == 1 ? xj1 : 0); xr < (rlen == 1 ? xj1 + 1 : k); ++xr) {
            const auto& b = b_slices[rlen == 1 ? xj1 : xj1 * k + xr];
            const auto c = min_conv(a, b, kernel_);
            const long long shift =
                (j > node.lo ? xj : 0) + (j + 1 < node.hi ? xj1 : 0);
            for (std::size_t t = 0; t < c.size(); ++t) {
              if (c[t] == inf) continue;
              const double v = pw(xj, xj1) + c[t];
              double& slot = entry(id, xi, shift + static_cast<long long>(t), xr);
              if (v < slot) slot = v;
            }
          }
        }
      }
    }
  }
}

void CountingTreeSolver::run_down_pass() {
  const int k = sub_.num_labels();
  const int root = tree_.root();
  const auto& root_node = tree_.node(root);
  const bool targeted = sub_.target.has_value();
  const long long b = targeted ? *sub_.target : 0;

  if (targeted && (b < 0 || b > static_cast<long long>(k - 1) * sub_.num_nodes())) return;

  StatePick best_pick;
  if (root_node.length() == 1) {
    for (int x = 0; x < k; ++x) {
      if (targeted && x != b) continue;
      if (tables_[root][x] < value_) {
        value_ = tables_[root][x];
        best_pick = {x, 0, x};
      }
    }
  } else {
    const long long sums = num_sums(root);
    for (int xl = 0; xl < k; ++xl) {
      for (long long s = 0; s < sums; ++s) {
        for (int xr = 0; xr < k; ++xr) {
          if (targeted && xl + s + xr != b) continue;
          const double v = entry(root, xl, s, xr);
          if (v < value_) {
            value_ = v;
            best_pick = {xl, s, xr};
          }
        }
      }
    }
  }
  if (value_ == inf) return;

  labels_.assign(sub_.num_nodes(), -1);
  assign_interval(root, best_pick);
  for (const int x : labels_) assert(x >= 0);
}

void CountingTreeSolver::assign_interval(int node_id, const StatePick& pick) {
  const auto& node = tree_.node(node_id);
  const int k = sub_.num_labels();

  if (node.is_leaf()) {
    if (node.length() == 1) {
      assert(pick.xl == pick.xr && pick.s == 0);
      labels_[node.lo] = pick.xl;
    } else {
      assert(pick.s == 0);
      labels_[node.lo] = pick.xl;
      labels_[node.hi] = pick.xr;
    }
    return;
  }

  const auto& left = tree_.node(node.left);
  const auto& right = tree_.node(node.right);
  const int j = left.hi;
  const auto& pw = sub_.pairwise[j];
  const int llen = left.length();
  const int rlen = right.length();
  const long long sl = llen == 1 ? 1 : num_sums(node.left);
  const long long sr = rlen == 1 ? 1 : num_sums(node.right);
  const double stored = entry(node_id, pick.xl, pick.s, pick.xr);

  // recover a child state pair by exact value match; the candidate expression
  // mirrors the up-pass float associativity, so a match always exists
  for (int xj = (llen == 1 ? pick.xl : 0); xj < (llen == 1 ? pick.xl + 1 : k); ++xj) {
    for (int xj1 = (rlen == 1 ? pick.xr : 0); xj1 < (rlen == 1 ? pick.xr + 1 : k); ++xj1) {
      const long long shift = (j > node.lo ? xj : 0) + (j + 1 < node.hi ? xj1 : 0);
      for (long long s1 = 0; s1 < sl; ++s1) {
        const long long s2 = pick.s - shift - s1;
        if (s2 < 0 || s2 >= sr) continue;
        const double a = llen == 1 ? tables_[node.left][pick.xl]
                                   : entry(node.left, pick.xl, s1, xj);
        const double bval = rlen == 1 ? tables_[node.right][pick.xr]
                                      : entry(node.right, xj1, s2, pick.xr);
        if (a == inf || bval == inf) continue;
        if (pw(xj, xj1) + (a + bval) == stored) {
          assign_interval(node.left, {pick.xl, s1, llen == 1 ? pick.xl : xj});
          assign_interval(node.right, {rlen == 1 ? pick.xr : xj1, s2, pick.xr});
          return;
        }
      }
    }
  }
  assert(false && "no consistent child state matched the parent optimum");
}

ChainSolution solve_chain_tomo_tree(const ChainSubproblem& sub, MinConvKernel kernel) {
  return CountingTreeSolver(sub, kernel).solution();
}

}  // namespace dtomo
