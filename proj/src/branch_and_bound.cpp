#include "dtomo/branch_and_bound.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace dtomo {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct SearchNode {
  std::vector<int> fixed;  // node -> label, -1 while free
  LagrangeState warm;
  double parent_bound = -inf;
};

// priced-out labels: fixing a node forces its label in every subproblem
Decomposition apply_fixings(const Decomposition& base, const std::vector<int>& fixed) {
  Decomposition dec = base;
  const int k = base.subproblems.empty() ? 0 : base.subproblems.front().num_labels();
  for (std::size_t u = 0; u < fixed.size(); ++u) {
    if (fixed[u] < 0) continue;
    for (const auto& m : base.node_membership[u]) {
      auto& unary = dec.subproblems[m.subproblem].unary;
      for (int x = 0; x < k; ++x)
        if (x != fixed[u]) unary(m.position, x) = inf;
    }
  }
  return dec;
}

// cheap reachability check on the ray sums given the current fixings
bool rays_reachable(const TomographyInstance& inst, const std::vector<int>& fixed) {
  for (const auto& ray : inst.rays) {
    long long lo = 0, hi = 0;
    for (const int u : ray.nodes) {
      lo += fixed[u] < 0 ? 0 : fixed[u];
      hi += fixed[u] < 0 ? inst.k - 1 : fixed[u];
    }
    if (ray.target < lo || ray.target > hi) return false;
  }
  return true;
}

}  // namespace

BranchAndBoundResult branch_and_bound(const TomographyInstance& inst,
                                      const BranchAndBoundConfig& cfg) {
  const Decomposition dec = decompose(inst);
  const bool integral = inst.has_integral_costs();
  const auto start = std::chrono::steady_clock::now();
  const int n = inst.num_nodes();
  const int k = inst.k;

  BranchAndBoundResult result;
  auto prune_threshold = [&]() {
    if (result.best_primal == inf) return inf;
    return integral ? result.best_primal - 1.0 + 1e-9 : result.best_primal - 1e-9;
  };
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  std::vector<SearchNode> stack;
  stack.push_back({std::vector<int>(n, -1), LagrangeState::zeros(dec), -inf});

  bool root = true;
  while (!stack.empty()) {
    if (result.nodes_explored >= cfg.max_nodes ||
        (cfg.time_limit_seconds > 0 && elapsed() >= cfg.time_limit_seconds)) {
      result.hit_limit = true;
      break;
    }
    SearchNode node = std::move(stack.back());
    stack.pop_back();
    ++result.nodes_explored;

    if (!rays_reachable(inst, node.fixed)) continue;

    const Decomposition restricted = apply_fixings(dec, node.fixed);
    const DualAscentConfig& dual_cfg = root ? cfg.root_dual : cfg.child_dual;
    const DualAscentResult dual = run_dual_ascent(restricted, dual_cfg, &node.warm);
    const double bound = std::max(dual.best_dual, node.parent_bound);
    if (root) {
      result.root_bound = dual.best_dual;
      result.root_trace = dual.trace;
      root = false;
    }
    if (dual.infeasible) continue;
    if (bound >= prune_threshold()) continue;

    const auto marginals =
        subproblem_min_marginals(restricted, dual.best_state, dual_cfg.method);
    const PrimalResult primal = find_primal(inst, restricted, marginals, cfg.primal);
    if (primal.found && primal.energy < result.best_primal) {
      result.best_primal = primal.energy;
      result.best_labeling = primal.labeling;
      if (bound >= prune_threshold()) continue;
    }

    // aggregated reduced costs per node; the widest disagreement across the
    // subproblems picks the branching node
    std::vector<double> agg(k);
    int branch_node = -1;
    double branch_spread = -1.0;
    std::vector<double> branch_agg;
    bool dead_node = false;
    for (int u = 0; u < n && !dead_node; ++u) {
      if (node.fixed[u] >= 0) continue;
      std::fill(agg.begin(), agg.end(), 0.0);
      for (const auto& m : dec.node_membership[u]) {
        const auto& mm = marginals[m.subproblem];
        double rmin = inf;
        for (int x = 0; x < k; ++x) rmin = std::min(rmin, mm(m.position, x));
        if (rmin == inf) {
          std::fill(agg.begin(), agg.end(), inf);
          break;
        }
        for (int x = 0; x < k; ++x) agg[x] += mm(m.position, x) - rmin;
      }
      double lo = inf, hi = -inf;
      for (int x = 0; x < k; ++x) {
        if (agg[x] == inf) continue;
        lo = std::min(lo, agg[x]);
        hi = std::max(hi, agg[x]);
      }
      if (lo == inf) dead_node = true;  // no label of u survives, subtree infeasible
      const double spread = lo == inf ? -inf : hi - lo;
      if (spread > branch_spread) {
        branch_spread = spread;
        branch_node = u;
        branch_agg = agg;
      }
    }
    if (dead_node) continue;
    if (branch_node < 0) continue;  // no free node left, primal sweep covered the leaf

    std::vector<int> labels;
    for (int x = 0; x < k; ++x)
      if (branch_agg[x] < inf) labels.push_back(x);
    std::stable_sort(labels.begin(), labels.end(),
                     [&](int a, int b) { return branch_agg[a] < branch_agg[b]; });

    // push in reverse so the most promising label pops first
    for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
      SearchNode child{node.fixed, dual.best_state, bound};
      child.fixed[branch_node] = *it;
      stack.push_back(std::move(child));
    }
  }

  if (result.hit_limit) {
    double open = result.best_primal;
    for (const auto& pending : stack) open = std::min(open, pending.parent_bound);
    result.global_bound = open;
  } else if (result.best_primal < inf) {
    result.proved_optimal = true;
    result.global_bound = result.best_primal;
  } else {
    result.proved_infeasible = true;
    result.global_bound = inf;
  }
  return result;
}

}  // namespace dtomo
