#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtomo/solver.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_timeout = 3;

unsigned parse_directions(const std::string& spec) {
  unsigned flags = 0;
  for (const char c : spec) {
    switch (c) {
      case 'h': flags |= dtomo::dir_horizontal; break;
      case 'v': flags |= dtomo::dir_vertical; break;
      case 'd': flags |= dtomo::dir_diag_down; break;
      case 'u': flags |= dtomo::dir_diag_up; break;
      default:
        throw std::runtime_error("bad direction character '" + std::string(1, c) +
                                 "' (use h, v, d, u)");
    }
  }
  if (flags == 0) throw std::runtime_error("directions must not be empty");
  return flags;
}

std::string format_float(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct GenerateArgs {
  std::uint64_t seed = 1;
  int width = 8, height = 8, k = 3;
  std::string directions = "hv";
  int smoothing = 1;
  std::string out;
  std::string out_pgm;
};

int run_generate(const GenerateArgs& args) {
  const unsigned dirs = parse_directions(args.directions);
  const auto generated = dtomo::generate_random_instance(args.seed, args.width, args.height,
                                                         args.k, dirs, args.smoothing);
  generated.instance.validate();
  dtomo::save_instance(generated.instance, args.out);
  const std::string pgm_path =
      args.out_pgm.empty() ? args.out + ".ground-truth.pgm" : args.out_pgm;
  dtomo::save_pgm(generated.ground_truth, args.width, args.height, args.k, pgm_path);
  std::cout << "wrote " << args.out << " and " << pgm_path << "\n";
  return exit_ok;
}

struct SolveArgs {
  std::string instance_path;
  std::string method = "ctg";
  std::string step_rule = "diminishing";
  int max_iters = 1000;
  double alpha0 = 1.0;
  double tau = 20.0;
  double time_limit = 0.0;
  long long bb_nodes = 100000;
  int threads = 0;
  bool deterministic = false;
  bool no_primal = false;
  std::string out;
  std::string out_pgm;
};

dtomo::SolveConfig make_config(const SolveArgs& args, const std::string& method) {
  dtomo::SolveConfig cfg;
  cfg.method = dtomo::solve_method_from_string(method);
  if (args.step_rule == "diminishing") cfg.step_rule = dtomo::StepRule::diminishing;
  else if (args.step_rule == "polyak") cfg.step_rule = dtomo::StepRule::polyak;
  else if (args.step_rule == "bundle") cfg.step_rule = dtomo::StepRule::bundle;
  else throw std::runtime_error("unknown step rule '" + args.step_rule + "'");
  cfg.max_iters = args.max_iters;
  cfg.alpha0 = args.alpha0;
  cfg.tau = args.tau;
  cfg.time_limit_seconds = args.time_limit;
  cfg.bb_max_nodes = args.bb_nodes;
  cfg.num_threads = args.threads;
  cfg.deterministic = args.deterministic;
  cfg.run_primal = !args.no_primal;
  return cfg;
}

int run_solve(const SolveArgs& args) {
  const dtomo::TomographyInstance inst = dtomo::load_instance(args.instance_path);
  const dtomo::SolveConfig cfg = make_config(args, args.method);
  const dtomo::SolveResult result = dtomo::solve_instance(inst, cfg);

  if (args.out.empty()) {
    std::cout << dtomo::result_to_json(result, inst);
  } else {
    dtomo::save_result(result, inst, args.out);
    std::cout << "method=" << dtomo::to_string(result.method)
              << " lower_bound=" << format_float(result.lower_bound);
    if (result.primal_found) {
      std::cout << " primal=" << format_float(result.primal_value)
                << " gap=" << format_float(result.certificate.gap)
                << " certified=" << (result.certificate.optimal ? "yes" : "no");
    }
    if (result.infeasible) std::cout << " infeasible=yes";
    std::cout << "\n";
  }
  if (!args.out_pgm.empty() && result.primal_found)
    dtomo::save_pgm(result.labeling, inst.width, inst.height, inst.k, args.out_pgm);
  return result.timed_out ? exit_timeout : exit_ok;
}

struct CompareArgs {
  std::string instance_dir;
  std::string methods = "ctg,std";
  std::string out_csv;
  SolveArgs solver;  // shared solver knobs, method field unused
};

struct MethodOutcome {
  bool ran = false;
  dtomo::SolveResult result;
};

int run_compare(const CompareArgs& args) {
  std::vector<std::string> methods;
  {
    std::stringstream ss(args.methods);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) methods.push_back(tok);
    }
    if (methods.empty()) throw std::runtime_error("no methods given");
    for (const auto& m : methods) dtomo::solve_method_from_string(m);  // validate early
  }

  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(args.instance_dir)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw std::runtime_error("no .json instances under '" + args.instance_dir + "'");

  std::ofstream csv(args.out_csv);
  if (!csv) throw std::runtime_error("cannot open '" + args.out_csv + "' for writing");
  csv << "instance";
  for (const auto& m : methods)
    csv << "," << m << "_bound," << m << "_primal," << m << "_certified";
  csv << ",ctg_minus_std,rel_improvement,flag\n";

  std::map<std::string, int> certified_count;
  int strictly_better = 0, improvement_count = 0, rows = 0;
  double improvement_sum = 0.0;

  for (const auto& path : paths) {
    ++rows;
    std::map<std::string, MethodOutcome> outcomes;
    std::string flag = "ok";
    dtomo::TomographyInstance inst;
    try {
      inst = dtomo::load_instance(path);
    } catch (const std::exception& e) {
      std::cerr << "warning: " << path << ": " << e.what() << "\n";
      csv << std::filesystem::path(path).filename().string();
      for (std::size_t i = 0; i < methods.size(); ++i) csv << ",,,";
      csv << ",,,load-error\n";
      continue;
    }
    for (const auto& m : methods) {
      try {
        MethodOutcome outcome;
        outcome.result = dtomo::solve_instance(inst, make_config(args.solver, m));
        outcome.ran = true;
        if (outcome.result.timed_out && flag == "ok") flag = "timeout";
        outcomes[m] = std::move(outcome);
      } catch (const std::exception& e) {
        std::cerr << "warning: " << path << " method " << m << ": " << e.what() << "\n";
        flag = "error";
      }
    }

    csv << std::filesystem::path(path).filename().string();
    for (const auto& m : methods) {
      const auto it = outcomes.find(m);
      if (it == outcomes.end() || !it->second.ran) {
        csv << ",,,";
        continue;
      }
      const auto& r = it->second.result;
      csv << "," << format_float(r.lower_bound) << ",";
      if (r.primal_found) csv << format_float(r.primal_value);
      csv << "," << (r.primal_found && r.certificate.optimal ? 1 : 0);
      if (r.primal_found && r.certificate.optimal) ++certified_count[m];
    }

    // relative improvement of the counting bound over the scalar one, measured
    // against a certified optimum and only where the scalar bound is not tight
    std::string ctg_minus_std, improvement;
    if (outcomes.count("ctg") && outcomes.count("std") && outcomes["ctg"].ran &&
        outcomes["std"].ran) {
      const auto& ctg = outcomes["ctg"].result;
      const auto& std_r = outcomes["std"].result;
      if (std::isfinite(ctg.lower_bound) && std::isfinite(std_r.lower_bound)) {
        ctg_minus_std = format_float(ctg.lower_bound - std_r.lower_bound);
        if (ctg.lower_bound > std_r.lower_bound + 1e-6) ++strictly_better;
        std::optional<double> optimum;
        for (const auto& m : methods) {
          const auto& r = outcomes[m].result;
          if (outcomes[m].ran && r.primal_found && r.certificate.optimal) {
            if (!optimum || r.primal_value < *optimum) optimum = r.primal_value;
          }
        }
        if (optimum && std_r.lower_bound < *optimum - 1e-9) {
          const double rel =
              (ctg.lower_bound - std_r.lower_bound) / (*optimum - std_r.lower_bound);
          improvement = format_float(rel);
          improvement_sum += rel;
          ++improvement_count;
        }
      }
    }
    csv << "," << ctg_minus_std << "," << improvement << "," << flag << "\n";
  }

  std::cout << "instances: " << rows << "\n";
  for (const auto& m : methods)
    std::cout << "certified_" << m << ": " << certified_count[m] << "\n";
  std::cout << "ctg_strictly_better: " << strictly_better << "\n";
  std::cout << "rel_improvement_count: " << improvement_count << "\n";
  if (improvement_count > 0)
    std::cout << "rel_improvement_mean: " << format_float(improvement_sum / improvement_count)
              << "\n";
  std::cout << "wrote " << args.out_csv << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chain-decomposition solver for non-binary discrete tomography"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "generate a random instance");
  generate->add_option("--seed", gen.seed, "rng seed");
  generate->add_option("--width", gen.width, "grid width")->check(CLI::PositiveNumber);
  generate->add_option("--height", gen.height, "grid height")->check(CLI::PositiveNumber);
  generate->add_option("--k", gen.k, "number of labels")->check(CLI::Range(2, 1 << 20));
  generate->add_option("--directions", gen.directions, "ray directions, subset of hvdu");
  generate->add_option("--smoothing", gen.smoothing, "box blur radius")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--out", gen.out, "instance output path")->required();
  generate->add_option("--out-pgm", gen.out_pgm, "ground truth PGM path");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an instance");
  solve_cmd->add_option("instance", solve.instance_path, "instance file")->required();
  solve_cmd->add_option("--method", solve.method, "ctg, std, ctg-bb, std-bb");
  solve_cmd->add_option("--step-rule", solve.step_rule, "diminishing, polyak, bundle");
  solve_cmd->add_option("--max-iters", solve.max_iters, "dual ascent iteration cap");
  solve_cmd->add_option("--alpha0", solve.alpha0, "initial step size");
  solve_cmd->add_option("--tau", solve.tau, "step decay constant");
  solve_cmd->add_option("--time-limit", solve.time_limit, "seconds, 0 = none");
  solve_cmd->add_option("--bb-nodes", solve.bb_nodes, "branch-and-bound node cap");
  solve_cmd->add_option("--threads", solve.threads, "worker threads, 0 = auto");
  solve_cmd->add_flag("--deterministic", solve.deterministic,
                      "sequential subproblem order, zeroed timings");
  solve_cmd->add_flag("--no-primal", solve.no_primal, "skip the primal heuristic");
  solve_cmd->add_option("--out", solve.out, "result record path (stdout if omitted)");
  solve_cmd->add_option("--out-pgm", solve.out_pgm, "reconstruction PGM path");

  CompareArgs cmp;
  CLI::App* compare = app.add_subcommand("compare", "run methods over an instance directory");
  compare->add_option("instances", cmp.instance_dir, "directory of instance files")->required();
  compare->add_option("--methods", cmp.methods, "comma-separated method list");
  compare->add_option("--out", cmp.out_csv, "CSV output path")->required();
  compare->add_option("--step-rule", cmp.solver.step_rule, "diminishing, polyak, bundle");
  compare->add_option("--max-iters", cmp.solver.max_iters, "dual ascent iteration cap");
  compare->add_option("--time-limit", cmp.solver.time_limit, "seconds per solve, 0 = none");
  compare->add_option("--threads", cmp.solver.threads, "worker threads, 0 = auto");
  compare->add_flag("--deterministic", cmp.solver.deterministic,
                    "sequential subproblem order, zeroed timings");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return run_generate(gen);
    if (solve_cmd->parsed()) return run_solve(solve);
    if (compare->parsed()) return run_compare(cmp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  }
  return exit_validation;
}
