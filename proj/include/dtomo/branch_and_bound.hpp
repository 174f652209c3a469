#pragma once

#include "dtomo/dual_ascent.hpp"
#include "dtomo/primal_heuristic.hpp"

namespace dtomo {

struct BranchAndBoundConfig {
  DualAscentConfig root_dual;   // bound effort at the root
  DualAscentConfig child_dual;  // bound effort per search node, warm started
  PrimalSearchConfig primal;
  long long max_nodes = 100000;
  double time_limit_seconds = 0.0;  // 0 disables the limit

  BranchAndBoundConfig() {
    child_dual.max_iters = 100;
    child_dual.improvement_window = 20;
  }
};

struct BranchAndBoundResult {
  double best_primal = std::numeric_limits<double>::infinity();
  Labeling best_labeling;
  double root_bound = -std::numeric_limits<double>::infinity();
  double global_bound = -std::numeric_limits<double>::infinity();
  std::vector<TracePoint> root_trace;
  long long nodes_explored = 0;
  bool proved_optimal = false;
  bool proved_infeasible = false;
  bool hit_limit = false;
};

// depth-first search fixing one node label per level; bounds come from warm
// started dual ascent on the decomposition with fixed labels priced out by
// infinite unaries, and the duality gap is closed by the label-pruning primal
BranchAndBoundResult branch_and_bound(const TomographyInstance& inst,
                                      const BranchAndBoundConfig& cfg);

}  // namespace dtomo
