#include "dtomo/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace dtomo {

std::string to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::counting: return "ctg";
    case SolveMethod::scalar_std: return "std";
    case SolveMethod::counting_bb: return "ctg-bb";
    case SolveMethod::scalar_std_bb: return "std-bb";
  }
  return "ctg";
}

SolveMethod solve_method_from_string(const std::string& s) {
  if (s == "ctg") return SolveMethod::counting;
  if (s == "std") return SolveMethod::scalar_std;
  if (s == "ctg-bb") return SolveMethod::counting_bb;
  if (s == "std-bb") return SolveMethod::scalar_std_bb;
  throw std::runtime_error("unknown method '" + s + "' (expected ctg, std, ctg-bb, std-bb)");
}

namespace {

DualAscentConfig make_dual_config(const SolveConfig& cfg, BoundMethod method) {
  DualAscentConfig dual;
  dual.method = method;
  dual.step_rule = cfg.step_rule;
  dual.alpha0 = cfg.alpha0;
  dual.tau = cfg.tau;
  dual.max_iters = cfg.max_iters;
  dual.improvement_window = cfg.improvement_window;
  dual.improvement_tol = cfg.improvement_tol;
  dual.time_limit_seconds = cfg.time_limit_seconds;
  if (cfg.deterministic) {
    dual.num_threads = 1;
  } else if (cfg.num_threads > 0) {
    dual.num_threads = cfg.num_threads;
  } else {
    dual.num_threads = std::max(1u, std::thread::hardware_concurrency());
  }
  return dual;
}

}  // namespace

SolveResult solve_instance(const TomographyInstance& inst, const SolveConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  result.method = cfg.method;

  const bool use_bb =
      cfg.method == SolveMethod::counting_bb || cfg.method == SolveMethod::scalar_std_bb;
  const BoundMethod bound_method =
      (cfg.method == SolveMethod::counting || cfg.method == SolveMethod::counting_bb)
          ? BoundMethod::counting
          : BoundMethod::scalar_std;

  if (use_bb) {
    BranchAndBoundConfig bb;
    bb.root_dual = make_dual_config(cfg, bound_method);
    bb.child_dual = bb.root_dual;
    bb.child_dual.max_iters = std::min(cfg.max_iters, 100);
    bb.child_dual.improvement_window = 20;
    bb.max_nodes = cfg.bb_max_nodes;
    bb.time_limit_seconds = cfg.time_limit_seconds;

    const BranchAndBoundResult res = branch_and_bound(inst, bb);
    result.lower_bound = res.global_bound;
    result.infeasible = res.proved_infeasible;
    result.trace = res.root_trace;
    result.iterations = static_cast<int>(res.root_trace.size());
    result.timed_out = res.hit_limit;
    result.bb_nodes = res.nodes_explored;
    result.bb_proved_optimal = res.proved_optimal;
    result.bb_root_bound = res.root_bound;
    if (res.best_primal < std::numeric_limits<double>::infinity()) {
      result.primal_found = true;
      result.labeling = res.best_labeling;
      result.primal_value = res.best_primal;
      result.certificate = certify(inst, res.best_primal, res.global_bound);
    }
  } else {
    const Decomposition dec = decompose(inst);
    const DualAscentConfig dual_cfg = make_dual_config(cfg, bound_method);
    const DualAscentResult res = run_dual_ascent(dec, dual_cfg);
    result.lower_bound = res.best_dual;
    result.infeasible = res.infeasible;
    result.trace = res.trace;
    result.iterations = res.iters_run;
    result.timed_out = res.hit_time_limit;
    if (!res.infeasible && cfg.run_primal) {
      const PrimalResult primal =
          find_primal(inst, dec, res.best_state, bound_method, PrimalSearchConfig{});
      if (primal.found) {
        result.primal_found = true;
        result.labeling = primal.labeling;
        result.primal_value = primal.energy;
        result.primal_eps = primal.eps_used;
        result.certificate = certify(inst, primal.energy, res.best_dual);
      }
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cfg.deterministic) {
    result.wall_seconds = 0.0;
    for (auto& p : result.trace) p.seconds = 0.0;
  }
  return result;
}

namespace {

using nlohmann::json;

// 12 significant digits keeps records compact and byte-stable across platforms
json round_float(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string result_to_json(const SolveResult& result, const TomographyInstance& inst) {
  json j;
  j["format"] = "dtomo-result";
  j["version"] = 1;
  j["method"] = to_string(result.method);
  j["instance"] = {{"width", inst.width},
                   {"height", inst.height},
                   {"k", inst.k},
                   {"num_rays", inst.rays.size()}};
  j["lower_bound"] = round_float(result.lower_bound);
  j["infeasible"] = result.infeasible;
  j["timed_out"] = result.timed_out;
  j["iterations"] = result.iterations;
  j["wall_time"] = round_float(result.wall_seconds);
  if (result.primal_found) {
    j["primal_value"] = round_float(result.primal_value);
    j["gap"] = round_float(result.certificate.gap);
    j["certified"] = result.certificate.optimal;
    j["labeling"] = result.labeling.values;
    j["primal_eps"] = round_float(result.primal_eps);
  } else {
    j["primal_value"] = nullptr;
    j["gap"] = nullptr;
    j["certified"] = false;
  }
  json trace = json::array();
  for (const auto& p : result.trace) {
    trace.push_back({{"iter", p.iter},
                     {"dual", round_float(p.dual)},
                     {"best_dual", round_float(p.best_dual)},
                     {"seconds", round_float(p.seconds)}});
  }
  j["trace"] = std::move(trace);
  if (result.method == SolveMethod::counting_bb || result.method == SolveMethod::scalar_std_bb) {
    j["branch_and_bound"] = {{"nodes", result.bb_nodes},
                             {"proved_optimal", result.bb_proved_optimal},
                             {"root_bound", round_float(result.bb_root_bound)}};
  }
  return j.dump(2) + "\n";
}

void save_result(const SolveResult& result, const TomographyInstance& inst,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << result_to_json(result, inst);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace dtomo
