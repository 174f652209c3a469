#pragma once

#include <vector>

#include "dtomo/chain.hpp"

namespace dtomo {

// scalar Lagrangian dual of one sum-constrained chain: the projection
// constraint is priced into the unaries and the price is optimized
struct StdRayDual {
  double value = 0.0;   // best dual value found, +inf when unbounded
  double gamma = 0.0;   // price at which value was attained
  std::vector<int> witness;  // optimal chain labeling at gamma
  bool unbounded = false;    // target outside the reachable label-sum range
};

// maximizes g(gamma) = min_x [E(x) + gamma * (sum(x) - target)] by bisection
// on the integer-valued slope; terminates when a tangent-intersection upper
// bound certifies the value within tol
StdRayDual std_ray_value(const ChainSubproblem& sub, double tol = 1e-7);

}  // namespace dtomo
