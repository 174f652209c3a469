#pragma once

#include <vector>

#include "dtomo/decomposition.hpp"
#include "dtomo/min_conv.hpp"

namespace dtomo {

// which oracle prices the ray target inside each chain subproblem
enum class BoundMethod {
  counting,   // exact sum-constrained chain optimum
  scalar_std  // scalar Lagrangian price on the ray sum
};

enum class StepRule { diminishing, polyak, bundle };

// per-subproblem unary reparameterizations; for every node the offsets of the
// subproblems sharing it sum to zero, so the decomposition energy is preserved
struct LagrangeState {
  std::vector<matrix<double>> offsets;

  static LagrangeState zeros(const Decomposition& dec);
};

struct SubproblemEval {
  double value = 0.0;
  std::vector<int> labels;  // chain-local witness
};

// solves every subproblem at the given offsets; the returned dual value is the
// id-ordered sum of subproblem optima and is a lower bound on the instance optimum
double evaluate_dual(const Decomposition& dec, const LagrangeState& state, BoundMethod method,
                     MinConvKernel kernel, std::vector<SubproblemEval>* evals,
                     int num_threads = 1);

struct TracePoint {
  int iter = 0;
  double dual = 0.0;
  double best_dual = 0.0;
  double seconds = 0.0;
};

struct DualAscentConfig {
  BoundMethod method = BoundMethod::counting;
  StepRule step_rule = StepRule::diminishing;
  double alpha0 = 1.0;        // diminishing: alpha0 / (1 + t / tau)
  double tau = 20.0;
  double polyak_delta = 1.0;  // level gap above best dual when no primal bound is known
  double polyak_beta = 1.0;
  int bundle_size = 20;
  double bundle_prox = 1.0;   // initial proximal step length
  int max_iters = 1000;
  int improvement_window = 50;
  double improvement_tol = 1e-6;
  double time_limit_seconds = 0.0;  // 0 disables the limit
  MinConvKernel kernel = MinConvKernel::automatic;
  int num_threads = 1;  // subproblems solve concurrently when > 1
};

struct DualAscentResult {
  double best_dual = 0.0;
  LagrangeState best_state;
  std::vector<SubproblemEval> best_evals;  // subproblem optima and witnesses at best_state
  std::vector<TracePoint> trace;
  int iters_run = 0;
  bool infeasible = false;  // a subproblem certified its target unreachable
  bool hit_time_limit = false;
};

// warm_start, when given, seeds the offsets (it must match the decomposition shape)
DualAscentResult run_dual_ascent(const Decomposition& dec, const DualAscentConfig& cfg,
                                 const LagrangeState* warm_start = nullptr);

}  // namespace dtomo
