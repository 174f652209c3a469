#pragma once

#include <string>

#include "dtomo/branch_and_bound.hpp"

namespace dtomo {

enum class SolveMethod { counting, scalar_std, counting_bb, scalar_std_bb };

std::string to_string(SolveMethod m);             // "ctg", "std", "ctg-bb", "std-bb"
SolveMethod solve_method_from_string(const std::string& s);

struct SolveConfig {
  SolveMethod method = SolveMethod::counting;
  StepRule step_rule = StepRule::diminishing;
  double alpha0 = 1.0;
  double tau = 20.0;
  int max_iters = 1000;
  int improvement_window = 50;
  double improvement_tol = 1e-6;
  double time_limit_seconds = 0.0;
  long long bb_max_nodes = 100000;
  bool run_primal = true;
  int num_threads = 0;        // <= 0 picks the hardware concurrency
  bool deterministic = false; // sequential subproblem order, timings zeroed
};

struct SolveResult {
  SolveMethod method = SolveMethod::counting;
  double lower_bound = -std::numeric_limits<double>::infinity();
  bool primal_found = false;
  Labeling labeling;
  double primal_value = 0.0;
  double primal_eps = 0.0;
  Certificate certificate;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::vector<TracePoint> trace;
  bool infeasible = false;
  bool timed_out = false;
  long long bb_nodes = 0;          // branch-and-bound methods only
  bool bb_proved_optimal = false;
  double bb_root_bound = 0.0;
};

SolveResult solve_instance(const TomographyInstance& inst, const SolveConfig& cfg);

// versioned record with floats rounded to 12 significant digits; timing fields
// are zeroed in deterministic mode so records are byte-stable
std::string result_to_json(const SolveResult& result, const TomographyInstance& inst);
void save_result(const SolveResult& result, const TomographyInstance& inst,
                 const std::string& path);

}  // namespace dtomo
