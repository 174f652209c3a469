#pragma once

#include <vector>

#include "dtomo/dual_ascent.hpp"

namespace dtomo {

// per-subproblem min-marginals at the given offsets, consistent with the
// bound method that produced them; one n_i x k matrix per subproblem
std::vector<matrix<double>> subproblem_min_marginals(const Decomposition& dec,
                                                     const LagrangeState& state,
                                                     BoundMethod method);

struct LabelSupport {
  std::vector<std::vector<int>> allowed;  // per node, ascending label lists
};

// keeps label x at node u when every subproblem containing u rates it within
// eps of that subproblem's optimum; each subproblem's own argmin survives
// unconditionally so no node ends up empty
LabelSupport prune_labels(const Decomposition& dec, const std::vector<matrix<double>>& marginals,
                          double eps);

struct ReducedSearchResult {
  bool found = false;
  Labeling labeling;
  double energy = 0.0;
  bool complete = false;  // search space exhausted, labeling is the reduced-space optimum
  long long nodes_expanded = 0;
};

struct ReducedSearchLimits {
  long long max_nodes = 50'000'000;
  double time_limit_seconds = 0.0;  // 0 disables the limit
};

// exact depth-first search over the reduced label space for a minimum-energy
// labeling meeting every ray target; most-constrained node first, pruned by
// ray sum reachability and an admissible static cost bound
ReducedSearchResult solve_reduced(const TomographyInstance& inst, const LabelSupport& support,
                                  const ReducedSearchLimits& limits = {});

struct PrimalSearchConfig {
  std::vector<double> eps_factors = {0.0, 0.5, 1.0, 2.0, 5.0};
  ReducedSearchLimits limits;
};

struct PrimalResult {
  bool found = false;
  Labeling labeling;
  double energy = 0.0;
  double eps_used = 0.0;
  bool reduced_search_complete = false;
};

// widening sweep over the eps schedule; returns the first feasible labeling
PrimalResult find_primal(const TomographyInstance& inst, const Decomposition& dec,
                         const std::vector<matrix<double>>& marginals,
                         const PrimalSearchConfig& cfg = {});

PrimalResult find_primal(const TomographyInstance& inst, const Decomposition& dec,
                         const LagrangeState& state, BoundMethod method,
                         const PrimalSearchConfig& cfg = {});

struct Certificate {
  bool optimal = false;
  double gap = 0.0;  // best_primal - best_dual
};

// with integral costs a duality gap strictly below one pins the integer optimum
Certificate certify(const TomographyInstance& inst, double best_primal, double best_dual);

}  // namespace dtomo
