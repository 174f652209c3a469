#include "dtomo/dual_ascent.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "dtomo/counting_tree.hpp"
#include "dtomo/std_relaxation.hpp"

namespace dtomo {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void parallel_run(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

SubproblemEval solve_subproblem(const ChainSubproblem& base, const matrix<double>& offset,
                                BoundMethod method, MinConvKernel kernel) {
  ChainSubproblem work = base;
  for (std::size_t i = 0; i < work.unary.size(); ++i)
    work.unary.data()[i] = base.unary.data()[i] + offset.data()[i];

  SubproblemEval eval;
  if (!work.target.has_value()) {
    const ChainSolution sol = chain_map_dp(work);
    eval.value = sol.value;
    eval.labels = sol.labels;
  } else if (method == BoundMethod::counting) {
    const ChainSolution sol = solve_chain_tomo_tree(work, kernel);
    eval.value = sol.value;
    eval.labels = sol.labels;
  } else {
    const StdRayDual dual = std_ray_value(work);
    eval.value = dual.unbounded ? inf : dual.value;
    eval.labels = dual.witness;
  }
  return eval;
}

// witness disagreement direction: indicator minus the membership mean; sums to
// zero over the subproblems sharing a node, so ascent preserves the invariant
double build_subgradient(const Decomposition& dec, const std::vector<SubproblemEval>& evals,
                         std::vector<matrix<double>>& grad) {
  const int k = dec.subproblems.empty() ? 0 : dec.subproblems.front().num_labels();
  double norm2 = 0.0;
  for (std::size_t s = 0; s < dec.subproblems.size(); ++s)
    std::fill(grad[s].data().begin(), grad[s].data().end(), 0.0);

  for (std::size_t u = 0; u < dec.node_membership.size(); ++u) {
    const auto& members = dec.node_membership[u];
    if (members.size() < 2) continue;
    const double scale = 1.0 / static_cast<double>(members.size());
    for (int x = 0; x < k; ++x) {
      int count = 0;
      for (const auto& m : members) count += evals[m.subproblem].labels[m.position] == x;
      if (count == 0) continue;
      const double mean = count * scale;
      for (const auto& m : members) {
        const double g =
            (evals[m.subproblem].labels[m.position] == x ? 1.0 : 0.0) - mean;
        grad[m.subproblem](m.position, x) = g;
        norm2 += g * g;
      }
    }
  }
  return norm2;
}

void enforce_zero_sum(const Decomposition& dec, LagrangeState& state) {
  const int k = dec.subproblems.empty() ? 0 : dec.subproblems.front().num_labels();
  for (const auto& members : dec.node_membership) {
    for (int x = 0; x < k; ++x) {
      double partial = 0.0;
      for (std::size_t j = 0; j + 1 < members.size(); ++j)
        partial += state.offsets[members[j].subproblem](members[j].position, x);
      const auto& last = members.back();
      state.offsets[last.subproblem](last.position, x) = -partial;
    }
  }
}

std::size_t state_dim(const LagrangeState& state) {
  std::size_t dim = 0;
  for (const auto& m : state.offsets) dim += m.size();
  return dim;
}

std::vector<double> flatten(const std::vector<matrix<double>>& mats, std::size_t dim) {
  std::vector<double> out;
  out.reserve(dim);
  for (const auto& m : mats) out.insert(out.end(), m.data().begin(), m.data().end());
  return out;
}

void unflatten(const std::vector<double>& flat, std::vector<matrix<double>>& mats) {
  std::size_t at = 0;
  for (auto& m : mats) {
    std::copy(flat.begin() + at, flat.begin() + at + m.size(), m.data().begin());
    at += m.size();
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Euclidean projection onto the probability simplex
void project_simplex(std::vector<double>& w) {
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  int support = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumsum += sorted[i];
    const double candidate = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0) {
      theta = candidate;
      support = static_cast<int>(i + 1);
    }
  }
  assert(support > 0);
  for (double& v : w) v = std::max(0.0, v - theta);
}

}  // namespace

LagrangeState LagrangeState::zeros(const Decomposition& dec) {
  LagrangeState state;
  state.offsets.reserve(dec.subproblems.size());
  for (const auto& sub : dec.subproblems)
    state.offsets.emplace_back(sub.num_nodes(), sub.num_labels(), 0.0);
  return state;
}

double evaluate_dual(const Decomposition& dec, const LagrangeState& state, BoundMethod method,
                     MinConvKernel kernel, std::vector<SubproblemEval>* evals, int num_threads) {
  const int count = static_cast<int>(dec.subproblems.size());
  std::vector<SubproblemEval> local;
  std::vector<SubproblemEval>& out = evals ? *evals : local;
  out.assign(count, SubproblemEval{});

  parallel_run(count, num_threads, [&](int s) {
    out[s] = solve_subproblem(dec.subproblems[s], state.offsets[s], method, kernel);
  });

  // id-ordered reduction keeps the sum bit-identical across thread schedules
  double dual = 0.0;
  for (int s = 0; s < count; ++s) dual += out[s].value;
  return dual;
}

namespace {

struct AscentLoop {
  const Decomposition& dec;
  const DualAscentConfig& cfg;
  DualAscentResult result;
  std::vector<double> best_history;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  // returns false when the loop should stop
  bool record(int iter, double dual, const LagrangeState& state,
              const std::vector<SubproblemEval>& evals) {
    if (dual > result.best_dual) {
      result.best_dual = dual;
      result.best_state = state;
      result.best_evals = evals;
    }
    result.trace.push_back({iter, dual, result.best_dual, elapsed()});
    result.iters_run = iter + 1;
    best_history.push_back(result.best_dual);

    if (dual == inf) {
      result.infeasible = true;
      return false;
    }
    const int w = cfg.improvement_window;
    if (w > 0 && iter >= w &&
        best_history[iter] - best_history[iter - w] < cfg.improvement_tol)
      return false;
    if (cfg.time_limit_seconds > 0 && elapsed() >= cfg.time_limit_seconds) {
      result.hit_time_limit = true;
      return false;
    }
    return true;
  }
};

void run_subgradient(AscentLoop& loop, const Decomposition& dec, const DualAscentConfig& cfg,
                     const LagrangeState* warm_start) {
  LagrangeState state = warm_start ? *warm_start : LagrangeState::zeros(dec);
  std::vector<SubproblemEval> evals;
  std::vector<matrix<double>> grad = LagrangeState::zeros(dec).offsets;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double dual = evaluate_dual(dec, state, cfg.method, cfg.kernel, &evals,
                                      cfg.num_threads);
    if (!loop.record(iter, dual, state, evals)) return;

    const double norm2 = build_subgradient(dec, evals, grad);
    if (norm2 == 0.0) return;  // all witnesses agree on every shared node

    double alpha;
    if (cfg.step_rule == StepRule::diminishing) {
      alpha = cfg.alpha0 / (1.0 + static_cast<double>(iter) / cfg.tau);
    } else {  // polyak with a fixed level gap above the best known dual
      const double level = loop.result.best_dual + cfg.polyak_delta;
      alpha = cfg.polyak_beta * std::max(level - dual, 0.0) / norm2;
    }
    for (std::size_t s = 0; s < state.offsets.size(); ++s) {
      for (std::size_t i = 0; i < state.offsets[s].size(); ++i)
        state.offsets[s].data()[i] += alpha * grad[s].data()[i];
    }
    enforce_zero_sum(dec, state);
  }
}

void run_bundle(AscentLoop& loop, const Decomposition& dec, const DualAscentConfig& cfg,
                const LagrangeState* warm_start) {
  LagrangeState center = warm_start ? *warm_start : LagrangeState::zeros(dec);
  const std::size_t dim = state_dim(center);
  std::vector<SubproblemEval> evals;
  std::vector<matrix<double>> grad = LagrangeState::zeros(dec).offsets;

  double center_value =
      evaluate_dual(dec, center, cfg.method, cfg.kernel, &evals, cfg.num_threads);
  if (!loop.record(0, center_value, center, evals)) return;

  // cutting-plane model of the concave dual around the moving center:
  // every cut b satisfies g(center + d) <= cut_value[b] + <cut_grad[b], d>
  std::vector<std::vector<double>> cut_grad;
  std::vector<double> cut_value;
  std::vector<double> weights;
  double prox = cfg.bundle_prox;

  LagrangeState trial = center;
  std::vector<double> trial_flat = flatten(center.offsets, dim);
  std::vector<double> center_flat = trial_flat;

  auto add_cut = [&](const std::vector<SubproblemEval>& at_evals, double at_value,
                     const std::vector<double>& at_flat) {
    build_subgradient(dec, at_evals, grad);
    std::vector<double> s = flatten(grad, dim);
    double val = at_value;
    for (std::size_t i = 0; i < dim; ++i) val += s[i] * (center_flat[i] - at_flat[i]);
    if (static_cast<int>(cut_grad.size()) >= std::max(cfg.bundle_size, 2)) {
      // evict the least active cut
      std::size_t drop = 0;
      for (std::size_t b = 1; b < weights.size(); ++b)
        if (weights[b] < weights[drop]) drop = b;
      cut_grad.erase(cut_grad.begin() + drop);
      cut_value.erase(cut_value.begin() + drop);
      weights.erase(weights.begin() + drop);
    }
    cut_grad.push_back(std::move(s));
    cut_value.push_back(val);
    weights.push_back(1.0);
  };

  add_cut(evals, center_value, center_flat);

  for (int iter = 1; iter < cfg.max_iters; ++iter) {
    const std::size_t nb = cut_grad.size();
    // proximal step in cut-weight space: minimize e'w + (prox/2) |S'w|^2 on the simplex
    matrix<double> gram(nb, nb, 0.0);
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = a; b < nb; ++b)
        gram(a, b) = gram(b, a) = dot(cut_grad[a], cut_grad[b]);

    std::vector<double> w(nb, 1.0 / static_cast<double>(nb));
    for (std::size_t b = 0; b < nb && b < weights.size(); ++b) w[b] = weights[b];
    project_simplex(w);

    double lipschitz = 1e-12;
    for (std::size_t a = 0; a < nb; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < nb; ++b) row += std::abs(gram(a, b));
      lipschitz = std::max(lipschitz, prox * row + 1.0);
    }
    std::vector<double> gw(nb);
    for (int it = 0; it < 200; ++it) {
      for (std::size_t a = 0; a < nb; ++a) {
        gw[a] = 0.0;
        for (std::size_t b = 0; b < nb; ++b) gw[a] += gram(a, b) * w[b];
      }
      for (std::size_t a = 0; a < nb; ++a)
        w[a] -= (cut_value[a] + prox * gw[a]) / lipschitz;
      project_simplex(w);
    }
    weights = w;

    std::vector<double> direction(dim, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      if (w[b] == 0.0) continue;
      for (std::size_t i = 0; i < dim; ++i) direction[i] += w[b] * cut_grad[b][i];
    }
    for (std::size_t i = 0; i < dim; ++i) trial_flat[i] = center_flat[i] + prox * direction[i];
    unflatten(trial_flat, trial.offsets);
    enforce_zero_sum(dec, trial);
    trial_flat = flatten(trial.offsets, dim);

    double predicted = inf;
    for (std::size_t b = 0; b < nb; ++b) {
      double m = cut_value[b];
      for (std::size_t i = 0; i < dim; ++i)
        m += cut_grad[b][i] * (trial_flat[i] - center_flat[i]);
      predicted = std::min(predicted, m);
    }

    const double trial_value =
        evaluate_dual(dec, trial, cfg.method, cfg.kernel, &evals, cfg.num_threads);
    if (!loop.record(iter, trial_value, trial, evals)) return;

    const double gain = predicted - center_value;
    if (gain <= cfg.improvement_tol * 0.01) return;  // model saturated at the center

    add_cut(evals, trial_value, trial_flat);
    if (trial_value >= center_value + 0.1 * gain) {
      // serious step: recenter and shift cut values to the new center
      const bool strong = trial_value >= center_value + 0.7 * gain;
      std::vector<double> delta(dim);
      for (std::size_t i = 0; i < dim; ++i) delta[i] = trial_flat[i] - center_flat[i];
      for (std::size_t b = 0; b < cut_grad.size(); ++b)
        cut_value[b] += dot(cut_grad[b], delta);
      center = trial;
      center_flat = trial_flat;
      center_value = trial_value;
      if (strong) prox = std::min(prox * 1.5, 1e4);
    } else {
      prox = std::max(prox * 0.5, 1e-8);
    }
  }
}

}  // namespace

DualAscentResult run_dual_ascent(const Decomposition& dec, const DualAscentConfig& cfg,
                                 const LagrangeState* warm_start) {
  AscentLoop loop{dec, cfg, {}, {}, std::chrono::steady_clock::now()};
  loop.result.best_dual = -inf;
  loop.result.best_state = LagrangeState::zeros(dec);

  if (cfg.step_rule == StepRule::bundle) {
    run_bundle(loop, dec, cfg, warm_start);
  } else {
    run_subgradient(loop, dec, cfg, warm_start);
  }
  return loop.result;
}

}  // namespace dtomo
