#include "dtomo/std_relaxation.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace dtomo {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct DualEval {
  double value;
  long long slope;  // witness label sum minus target
  std::vector<int> witness;
};

DualEval eval_dual(ChainSubproblem& work, const ChainSubproblem& sub, double gamma,
                   long long target) {
  const int n = sub.num_nodes();
  const int k = sub.num_labels();
  for (int i = 0; i < n; ++i) {
    for (int x = 0; x < k; ++x) work.unary(i, x) = sub.unary(i, x) + gamma * x;
  }
  const ChainSolution sol = chain_map_dp(work);
  long long sum = 0;
  for (const int x : sol.labels) sum += x;
  return {sol.value - gamma * static_cast<double>(target), sum - target, sol.labels};
}

}  // namespace

StdRayDual std_ray_value(const ChainSubproblem& sub, double tol) {
  assert(sub.target.has_value());
  const int n = sub.num_nodes();
  const int k = sub.num_labels();
  const long long b = *sub.target;

  StdRayDual out;
  for (int i = 0; i < n; ++i) {
    bool any_finite = false;
    for (int x = 0; x < k; ++x) any_finite |= std::isfinite(sub.unary(i, x));
    if (!any_finite) {  // no labeling has finite energy
      out.value = inf;
      out.unbounded = true;
      return out;
    }
  }

  // price magnitude beyond which every optimal labeling saturates the label
  // sum; derived from the total finite cost spread
  double spread = 1.0;
  for (int i = 0; i < n; ++i) {
    double lo = inf, hi = -inf;
    for (int x = 0; x < k; ++x) {
      const double u = sub.unary(i, x);
      if (!std::isfinite(u)) continue;
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    spread += hi - lo;
  }
  for (const auto& pw : sub.pairwise) {
    double lo = inf, hi = -inf;
    for (std::size_t t = 0; t < pw.size(); ++t) {
      lo = std::min(lo, pw.data()[t]);
      hi = std::max(hi, pw.data()[t]);
    }
    spread += hi - lo;
  }

  ChainSubproblem work = sub;
  double lo = -spread, hi = spread;
  DualEval at_lo = eval_dual(work, sub, lo, b);
  DualEval at_hi = eval_dual(work, sub, hi, b);

  // beyond the last slope breakpoint the witness saturates the reachable sum
  // range, so a wrong-signed slope certifies an unattainable target
  if (at_lo.slope < 0 || at_hi.slope > 0) {
    out.value = inf;
    out.unbounded = true;
    return out;
  }

  auto keep_best = [&out](const DualEval& e, double gamma) {
    if (e.value > out.value || out.witness.empty()) {
      out.value = e.value;
      out.gamma = gamma;
      out.witness = e.witness;
    }
  };
  keep_best(at_lo, lo);
  keep_best(at_hi, hi);
  if (at_lo.slope == 0) return out;
  if (at_hi.slope == 0) return out;

  for (int iter = 0; iter < 200; ++iter) {
    // intersection of the two bracketing tangents bounds the dual optimum
    const double denom = static_cast<double>(at_lo.slope - at_hi.slope);
    assert(denom > 0);
    const double cross =
        (at_hi.value - at_lo.value + at_lo.slope * lo - at_hi.slope * hi) / denom;
    const double upper = at_lo.value + at_lo.slope * (cross - lo);
    if (upper - out.value <= tol) return out;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi))) return out;

    const double mid = 0.5 * (lo + hi);
    DualEval at_mid = eval_dual(work, sub, mid, b);
    keep_best(at_mid, mid);
    if (at_mid.slope > 0) {
      lo = mid;
      at_lo = std::move(at_mid);
    } else if (at_mid.slope < 0) {
      hi = mid;
      at_hi = std::move(at_mid);
    } else {
      return out;  // zero slope, exact maximizer
    }
  }
  return out;
}

}  // namespace dtomo
