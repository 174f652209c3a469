#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dtomo/counting_tree.hpp"
#include "dtomo/solver.hpp"

namespace py = pybind11;

namespace {

dtomo::MinConvKernel kernel_from_string(const std::string& name) {
  if (name == "naive") return dtomo::MinConvKernel::naive;
  if (name == "fast") return dtomo::MinConvKernel::fast;
  if (name == "auto") return dtomo::MinConvKernel::automatic;
  throw std::runtime_error("unknown kernel '" + name + "' (use naive, fast, auto)");
}

unsigned directions_from_string(const std::string& spec) {
  unsigned flags = 0;
  for (const char c : spec) {
    switch (c) {
      case 'h': flags |= dtomo::dir_horizontal; break;
      case 'v': flags |= dtomo::dir_vertical; break;
      case 'd': flags |= dtomo::dir_diag_down; break;
      case 'u': flags |= dtomo::dir_diag_up; break;
      default: throw std::runtime_error("bad direction character, use h, v, d, u");
    }
  }
  if (flags == 0) throw std::runtime_error("directions must not be empty");
  return flags;
}

dtomo::Labeling labeling_from(const std::vector<int>& values) {
  dtomo::Labeling l;
  l.values = values;
  return l;
}

dtomo::ChainSubproblem chain_from(const std::vector<std::vector<double>>& unary,
                                  const std::vector<std::vector<std::vector<double>>>& pairwise,
                                  std::optional<long long> target) {
  const int n = static_cast<int>(unary.size());
  if (n == 0) throw std::runtime_error("chain needs at least one node");
  const int k = static_cast<int>(unary.front().size());
  if (k < 2) throw std::runtime_error("chain needs at least two labels");
  if (static_cast<int>(pairwise.size()) != n - 1)
    throw std::runtime_error("expected n-1 pairwise tables");

  dtomo::ChainSubproblem sub = dtomo::make_chain(n, k);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(unary[i].size()) != k)
      throw std::runtime_error("ragged unary rows");
    for (int x = 0; x < k; ++x) sub.unary(i, x) = unary[i][x];
  }
  for (int e = 0; e < n - 1; ++e) {
    if (static_cast<int>(pairwise[e].size()) != k)
      throw std::runtime_error("pairwise table must be k x k");
    for (int a = 0; a < k; ++a) {
      if (static_cast<int>(pairwise[e][a].size()) != k)
        throw std::runtime_error("pairwise table must be k x k");
      for (int b = 0; b < k; ++b) sub.pairwise[e](a, b) = pairwise[e][a][b];
    }
  }
  sub.target = target;
  return sub;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "chain-decomposition solver for non-binary discrete tomography";

  py::class_<dtomo::TomographyInstance>(m, "Instance")
      .def_readonly("width", &dtomo::TomographyInstance::width)
      .def_readonly("height", &dtomo::TomographyInstance::height)
      .def_readonly("k", &dtomo::TomographyInstance::k)
      .def_property_readonly("num_rays",
                             [](const dtomo::TomographyInstance& inst) {
                               return inst.rays.size();
                             })
      .def_property_readonly("ray_targets",
                             [](const dtomo::TomographyInstance& inst) {
                               std::vector<long long> t;
                               for (const auto& r : inst.rays) t.push_back(r.target);
                               return t;
                             })
      .def("save", [](const dtomo::TomographyInstance& inst, const std::string& path) {
        dtomo::save_instance(inst, path);
      });

  m.def(
      "generate_instance",
      [](std::uint64_t seed, int width, int height, int k, const std::string& directions,
         int smoothing) {
        auto gen = dtomo::generate_random_instance(seed, width, height, k,
                                                   directions_from_string(directions),
                                                   smoothing);
        return py::make_tuple(std::move(gen.instance), gen.ground_truth.values);
      },
      py::arg("seed"), py::arg("width"), py::arg("height"), py::arg("k") = 3,
      py::arg("directions") = "hv", py::arg("smoothing") = 1);

  m.def("load_instance", &dtomo::load_instance, py::arg("path"));

  m.def(
      "evaluate_energy",
      [](const dtomo::TomographyInstance& inst, const std::vector<int>& labels) {
        return dtomo::evaluate_energy(inst, labeling_from(labels));
      },
      py::arg("instance"), py::arg("labels"));

  m.def(
      "project",
      [](const dtomo::TomographyInstance& inst, const std::vector<int>& labels) {
        return dtomo::project(inst, labeling_from(labels));
      },
      py::arg("instance"), py::arg("labels"));

  m.def(
      "min_conv",
      [](const std::vector<double>& a, const std::vector<double>& b, const std::string& kernel) {
        return dtomo::min_conv(a, b, kernel_from_string(kernel));
      },
      py::arg("a"), py::arg("b"), py::arg("kernel") = "auto");

  m.def(
      "solve_chain",
      [](const std::vector<std::vector<double>>& unary,
         const std::vector<std::vector<std::vector<double>>>& pairwise,
         std::optional<long long> target, const std::string& kernel) {
        const auto sub = chain_from(unary, pairwise, target);
        dtomo::ChainSolution sol;
        if (target.has_value()) {
          sol = dtomo::solve_chain_tomo_tree(sub, kernel_from_string(kernel));
        } else {
          sol = dtomo::chain_map_dp(sub);
        }
        return py::make_tuple(sol.value, sol.labels);
      },
      py::arg("unary"), py::arg("pairwise"), py::arg("target") = std::nullopt,
      py::arg("kernel") = "auto");

  m.def("counting_space_size", &dtomo::counting_space_size, py::arg("length"), py::arg("k"));

  m.def(
      "total_counting_entries",
      [](int n, int k) { return dtomo::CountingTree(n).total_counting_entries(k); },
      py::arg("n"), py::arg("k"));

  m.def(
      "solve_json",
      [](const dtomo::TomographyInstance& inst, const std::string& method, int max_iters,
         const std::string& step_rule, double time_limit, long long bb_nodes, int threads,
         bool deterministic, bool run_primal) {
        dtomo::SolveConfig cfg;
        cfg.method = dtomo::solve_method_from_string(method);
        if (step_rule == "diminishing") cfg.step_rule = dtomo::StepRule::diminishing;
        else if (step_rule == "polyak") cfg.step_rule = dtomo::StepRule::polyak;
        else if (step_rule == "bundle") cfg.step_rule = dtomo::StepRule::bundle;
        else throw std::runtime_error("unknown step rule '" + step_rule + "'");
        cfg.max_iters = max_iters;
        cfg.time_limit_seconds = time_limit;
        cfg.bb_max_nodes = bb_nodes;
        cfg.num_threads = threads;
        cfg.deterministic = deterministic;
        cfg.run_primal = run_primal;
        dtomo::SolveResult result;
        {
          py::gil_scoped_release release;
          result = dtomo::solve_instance(inst, cfg);
        }
        return dtomo::result_to_json(result, inst);
      },
      py::arg("instance"), py::arg("method") = "ctg", py::arg("max_iters") = 1000,
      py::arg("step_rule") = "diminishing", py::arg("time_limit") = 0.0,
      py::arg("bb_nodes") = 100000, py::arg("threads") = 0, py::arg("deterministic") = false,
      py::arg("run_primal") = true);
}
