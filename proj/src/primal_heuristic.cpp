#include "dtomo/primal_heuristic.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

#include "dtomo/std_relaxation.hpp"

namespace dtomo {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

std::vector<matrix<double>> subproblem_min_marginals(const Decomposition& dec,
                                                     const LagrangeState& state,
                                                     BoundMethod method) {
  std::vector<matrix<double>> out;
  out.reserve(dec.subproblems.size());
  for (std::size_t s = 0; s < dec.subproblems.size(); ++s) {
    ChainSubproblem work = dec.subproblems[s];
    for (std::size_t i = 0; i < work.unary.size(); ++i)
      work.unary.data()[i] += state.offsets[s].data()[i];

    if (!work.target.has_value() || method == BoundMethod::counting) {
      out.push_back(min_marginals(work));
      continue;
    }
    // scalar price: marginals of the tilted unconstrained chain at the optimal price
    const StdRayDual dual = std_ray_value(work);
    if (dual.unbounded) {
      out.emplace_back(work.num_nodes(), work.num_labels(), inf);
      continue;
    }
    const long long b = *work.target;
    ChainSubproblem tilted = work;
    tilted.target.reset();
    for (int i = 0; i < work.num_nodes(); ++i)
      for (int x = 0; x < work.num_labels(); ++x) tilted.unary(i, x) += dual.gamma * x;
    matrix<double> mm = min_marginals(tilted);
    for (double& v : mm.data()) v -= dual.gamma * static_cast<double>(b);
    out.push_back(std::move(mm));
  }
  return out;
}

LabelSupport prune_labels(const Decomposition& dec, const std::vector<matrix<double>>& marginals,
                          double eps) {
  assert(marginals.size() == dec.subproblems.size());
  const int k = dec.subproblems.empty() ? 0 : dec.subproblems.front().num_labels();
  LabelSupport support;
  support.allowed.resize(dec.node_membership.size());

  std::vector<bool> keep(k);
  for (std::size_t u = 0; u < dec.node_membership.size(); ++u) {
    const auto& members = dec.node_membership[u];
    assert(!members.empty());
    std::fill(keep.begin(), keep.end(), true);
    for (const auto& m : members) {
      const auto& mm = marginals[m.subproblem];
      double rmin = inf;
      for (int x = 0; x < k; ++x) rmin = std::min(rmin, mm(m.position, x));
      if (rmin == inf) continue;  // subproblem infeasible, expresses no preference
      for (int x = 0; x < k; ++x)
        if (!(mm(m.position, x) - rmin <= eps)) keep[x] = false;
    }
    // every subproblem's own argmin stays available
    for (const auto& m : members) {
      const auto& mm = marginals[m.subproblem];
      double rmin = inf;
      for (int x = 0; x < k; ++x) rmin = std::min(rmin, mm(m.position, x));
      if (rmin == inf) continue;
      for (int x = 0; x < k; ++x) {
        if (mm(m.position, x) == rmin) {
          keep[x] = true;
          break;
        }
      }
    }
    for (int x = 0; x < k; ++x)
      if (keep[x]) support.allowed[u].push_back(x);
    assert(!support.allowed[u].empty());
  }
  return support;
}

namespace {

struct ReducedSearch {
  const TomographyInstance& inst;
  const LabelSupport& support;
  const ReducedSearchLimits& limits;

  std::vector<int> order;               // assignment order, most constrained first
  std::vector<int> label;               // -1 while unassigned
  std::vector<std::vector<int>> node_rays;  // node -> rays containing it
  std::vector<long long> partial, min_rest, max_rest;
  std::vector<std::vector<std::pair<int, int>>> neighbors;  // node -> (edge, other)
  std::vector<double> edge_min;
  std::vector<double> node_min;
  double acc = 0.0, rem_unary = 0.0, rem_edges = 0.0;

  ReducedSearchResult best;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  bool aborted = false;

  explicit ReducedSearch(const TomographyInstance& inst_, const LabelSupport& support_,
                         const ReducedSearchLimits& limits_)
      : inst(inst_), support(support_), limits(limits_) {
    const int n = inst.num_nodes();
    label.assign(n, -1);

    order.resize(n);
    for (int u = 0; u < n; ++u) order[u] = u;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return support.allowed[a].size() < support.allowed[b].size();
    });

    node_rays.resize(n);
    partial.assign(inst.rays.size(), 0);
    min_rest.assign(inst.rays.size(), 0);
    max_rest.assign(inst.rays.size(), 0);
    for (std::size_t r = 0; r < inst.rays.size(); ++r) {
      for (const int u : inst.rays[r].nodes) {
        node_rays[u].push_back(static_cast<int>(r));
        min_rest[r] += support.allowed[u].front();
        max_rest[r] += support.allowed[u].back();
      }
    }

    neighbors.resize(n);
    edge_min.resize(inst.num_edges());
    for (int e = 0; e < inst.num_edges(); ++e) {
      const auto [a, b] = inst.edge_endpoints(e);
      neighbors[a].push_back({e, b});
      neighbors[b].push_back({e, a});
      double lo = inf;
      const auto& t = inst.edge_cost(e);
      for (const int xa : support.allowed[a])
        for (const int xb : support.allowed[b]) lo = std::min(lo, t(xa, xb));
      edge_min[e] = lo;
      rem_edges += lo;
    }
    node_min.resize(n);
    for (int u = 0; u < n; ++u) {
      double lo = inf;
      for (const int x : support.allowed[u]) lo = std::min(lo, inst.unary(u, x));
      node_min[u] = lo;
      rem_unary += lo;
    }
  }

  bool out_of_budget() {
    if (aborted) return true;
    if (best.nodes_expanded >= limits.max_nodes) aborted = true;
    if (limits.time_limit_seconds > 0 && (best.nodes_expanded & 1023) == 0) {
      const double sec =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (sec >= limits.time_limit_seconds) aborted = true;
    }
    return aborted;
  }

  void dfs(std::size_t depth) {
    if (out_of_budget()) return;
    if (depth == order.size()) {
      for (std::size_t r = 0; r < inst.rays.size(); ++r)
        assert(partial[r] == inst.rays[r].target);
      if (!best.found || acc < best.energy) {
        best.found = true;
        best.energy = acc;
        best.labeling.values = label;
      }
      return;
    }
    const int u = order[depth];
    for (const int x : support.allowed[u]) {
      ++best.nodes_expanded;

      bool ok = true;
      for (const int r : node_rays[u]) {
        partial[r] += x;
        min_rest[r] -= support.allowed[u].front();
        max_rest[r] -= support.allowed[u].back();
        const long long t = inst.rays[r].target;
        if (partial[r] + min_rest[r] > t || partial[r] + max_rest[r] < t) ok = false;
      }

      double acc_delta = inst.unary(u, x);
      double rem_edge_delta = 0.0;
      if (ok) {
        for (const auto& [e, v] : neighbors[u]) {
          if (label[v] < 0) continue;
          const auto [a, b] = inst.edge_endpoints(e);
          acc_delta += inst.edge_cost(e)(a == u ? x : label[a], b == u ? x : label[b]);
          rem_edge_delta += edge_min[e];
        }
        acc += acc_delta;
        rem_unary -= node_min[u];
        rem_edges -= rem_edge_delta;
        label[u] = x;

        const double bound = acc + rem_unary + rem_edges;
        if (!best.found || bound < best.energy) dfs(depth + 1);

        label[u] = -1;
        acc -= acc_delta;
        rem_unary += node_min[u];
        rem_edges += rem_edge_delta;
      }

      for (const int r : node_rays[u]) {
        partial[r] -= x;
        min_rest[r] += support.allowed[u].front();
        max_rest[r] += support.allowed[u].back();
      }
      if (out_of_budget()) return;
    }
  }
};

}  // namespace

ReducedSearchResult solve_reduced(const TomographyInstance& inst, const LabelSupport& support,
                                  const ReducedSearchLimits& limits) {
  assert(support.allowed.size() == static_cast<std::size_t>(inst.num_nodes()));
  ReducedSearch search(inst, support, limits);
  search.dfs(0);
  search.best.complete = !search.aborted;
  return search.best;
}

PrimalResult find_primal(const TomographyInstance& inst, const Decomposition& dec,
                         const std::vector<matrix<double>>& marginals,
                         const PrimalSearchConfig& cfg) {
  // eps steps scale with a typical pairwise magnitude
  double scale = 0.0;
  if (inst.pairwise_kind == PairwiseKind::table) {
    std::vector<double> tops;
    tops.reserve(inst.pairwise_tables.size());
    for (const auto& t : inst.pairwise_tables)
      tops.push_back(*std::max_element(t.data().begin(), t.data().end()));
    if (!tops.empty()) {
      std::nth_element(tops.begin(), tops.begin() + tops.size() / 2, tops.end());
      scale = tops[tops.size() / 2];
    }
  } else {
    scale = inst.pairwise_weight;
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;

  PrimalResult result;
  for (const double factor : cfg.eps_factors) {
    const LabelSupport support = prune_labels(dec, marginals, factor * scale);
    const ReducedSearchResult reduced = solve_reduced(inst, support, cfg.limits);
    if (reduced.found) {
      result.found = true;
      result.labeling = reduced.labeling;
      result.energy = evaluate_energy(inst, reduced.labeling);
      result.eps_used = factor * scale;
      result.reduced_search_complete = reduced.complete;
      return result;
    }
  }
  return result;
}

PrimalResult find_primal(const TomographyInstance& inst, const Decomposition& dec,
                         const LagrangeState& state, BoundMethod method,
                         const PrimalSearchConfig& cfg) {
  return find_primal(inst, dec, subproblem_min_marginals(dec, state, method), cfg);
}

Certificate certify(const TomographyInstance& inst, double best_primal, double best_dual) {
  Certificate cert;
  cert.gap = best_primal - best_dual;
  cert.optimal = inst.has_integral_costs() && std::isfinite(best_primal) &&
                 std::isfinite(best_dual) && cert.gap < 1.0;
  return cert;
}

}  // namespace dtomo
