#include "dtomo/chain.hpp"

#include <cassert>
#include <limits>

namespace dtomo {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

ChainSubproblem make_chain(int n, int k) {
  assert(n >= 1 && k >= 2);
  ChainSubproblem sub;
  sub.node_ids.resize(n);
  for (int i = 0; i < n; ++i) sub.node_ids[i] = i;
  sub.unary = matrix<double>(n, k, 0.0);
  sub.pairwise.assign(n > 0 ? n - 1 : 0, matrix<double>(k, k, 0.0));
  return sub;
}

TargetedChainDP::TargetedChainDP(const ChainSubproblem& sub)
    : n_(sub.num_nodes()), k_(sub.num_labels()), b_(sub.target.value()) {
  assert(sub.target.has_value());
  assert(static_cast<int>(sub.pairwise.size()) == n_ - 1);
  const long long max_sum = static_cast<long long>(k_ - 1) * n_;
  if (b_ < 0 || b_ > max_sum) return;  // infeasible, tables stay empty

  const auto s_dim = static_cast<std::size_t>(b_ + 1);
  forward_.assign(n_, matrix<double>(k_, s_dim, inf));
  completion_.assign(n_, matrix<double>(k_, s_dim, inf));

  for (int x = 0; x < k_; ++x) {
    if (x <= b_) forward_[0](x, x) = sub.unary(0, x);
  }
  for (int i = 1; i < n_; ++i) {
    const auto& pw = sub.pairwise[i - 1];
    for (int x = 0; x < k_; ++x) {
      const double u = sub.unary(i, x);
      for (long long s = x; s <= b_; ++s) {
        double best = inf;
        for (int xp = 0; xp < k_; ++xp) {
          const double cand = forward_[i - 1](xp, s - x) + pw(xp, x);
          if (cand < best) best = cand;
        }
        if (best < inf) forward_[i](x, s) = u + best;
      }
    }
  }

  // completion_(i, x, r): optimal cost of nodes i+1..n-1 given label x at i and
  // remaining sum r over those nodes; excludes unary(i, x)
  for (int x = 0; x < k_; ++x) completion_[n_ - 1](x, 0) = 0.0;
  for (int i = n_ - 2; i >= 0; --i) {
    const auto& pw = sub.pairwise[i];
    for (int x = 0; x < k_; ++x) {
      for (long long r = 0; r <= b_; ++r) {
        double best = inf;
        for (int xn = 0; xn < k_; ++xn) {
          if (xn > r) break;
          const double tail = completion_[i + 1](xn, r - xn);
          if (tail == inf) continue;
          const double cand = pw(x, xn) + (sub.unary(i + 1, xn) + tail);
          if (cand < best) best = cand;
        }
        completion_[i](x, r) = best;
      }
    }
  }

  for (int x = 0; x < k_ && x <= b_; ++x) {
    const double cand = sub.unary(0, x) + completion_[0](x, b_ - x);
    if (cand < value_) value_ = cand;
  }
  if (value_ == inf) return;

  // lexicographically smallest optimum; ties resolved by exact equality against
  // the same float expressions the tables were built from
  labels_.resize(n_);
  long long remaining = b_;
  for (int x = 0; x < k_; ++x) {
    if (x <= b_ && sub.unary(0, x) + completion_[0](x, b_ - x) == value_) {
      labels_[0] = x;
      remaining = b_ - x;
      break;
    }
    assert(x + 1 < k_);
  }
  for (int i = 0; i + 1 < n_; ++i) {
    const auto& pw = sub.pairwise[i];
    const double need = completion_[i](labels_[i], remaining);
    for (int xn = 0; xn < k_; ++xn) {
      if (xn > remaining) continue;
      const double tail = completion_[i + 1](xn, remaining - xn);
      if (tail == inf) continue;
      if (pw(labels_[i], xn) + (sub.unary(i + 1, xn) + tail) == need) {
        labels_[i + 1] = xn;
        remaining -= xn;
        break;
      }
      assert(xn + 1 < k_);
    }
  }
  assert(remaining == 0);
}

matrix<double> TargetedChainDP::min_marginals() const {
  matrix<double> mm(n_, k_, inf);
  if (forward_.empty()) return mm;
  for (int i = 0; i < n_; ++i) {
    for (int x = 0; x < k_; ++x) {
      double best = inf;
      for (long long s = 0; s <= b_; ++s) {
        const double head = forward_[i](x, s);
        if (head == inf) continue;
        const double tail = completion_[i](x, b_ - s);
        if (tail == inf) continue;
        const double cand = head + tail;
        if (cand < best) best = cand;
      }
      mm(i, x) = best;
    }
  }
  return mm;
}

ChainSolution solve_chain_dp_naive(const ChainSubproblem& sub) {
  return TargetedChainDP(sub).solution();
}

ChainSolution chain_map_dp(const ChainSubproblem& sub) {
  const int n = sub.num_nodes();
  const int k = sub.num_labels();
  assert(static_cast<int>(sub.pairwise.size()) == n - 1);

  // suffix(i, x): optimal cost of nodes i..n-1 with node i labeled x
  matrix<double> suffix(n, k, 0.0);
  for (int x = 0; x < k; ++x) suffix(n - 1, x) = sub.unary(n - 1, x);
  for (int i = n - 2; i >= 0; --i) {
    const auto& pw = sub.pairwise[i];
    for (int x = 0; x < k; ++x) {
      double best = inf;
      for (int xn = 0; xn < k; ++xn) {
        const double cand = pw(x, xn) + suffix(i + 1, xn);
        if (cand < best) best = cand;
      }
      suffix(i, x) = sub.unary(i, x) + best;
    }
  }

  ChainSolution sol;
  sol.value = inf;
  for (int x = 0; x < k; ++x) {
    if (suffix(0, x) < sol.value) sol.value = suffix(0, x);
  }
  sol.labels.resize(n);
  for (int x = 0; x < k; ++x) {
    if (suffix(0, x) == sol.value) {
      sol.labels[0] = x;
      break;
    }
    assert(x + 1 < k);
  }
  for (int i = 0; i + 1 < n; ++i) {
    const auto& pw = sub.pairwise[i];
    const double need = suffix(i, sol.labels[i]);
    const double u = sub.unary(i, sol.labels[i]);
    for (int xn = 0; xn < k; ++xn) {
      if (u + (pw(sol.labels[i], xn) + suffix(i + 1, xn)) == need) {
        sol.labels[i + 1] = xn;
        break;
      }
      assert(xn + 1 < k);
    }
  }
  return sol;
}

matrix<double> min_marginals(const ChainSubproblem& sub) {
  if (sub.target.has_value()) return TargetedChainDP(sub).min_marginals();

  const int n = sub.num_nodes();
  const int k = sub.num_labels();
  matrix<double> prefix(n, k, 0.0);
  matrix<double> suffix(n, k, 0.0);
  for (int x = 0; x < k; ++x) {
    prefix(0, x) = sub.unary(0, x);
    suffix(n - 1, x) = sub.unary(n - 1, x);
  }
  for (int i = 1; i < n; ++i) {
    const auto& pw = sub.pairwise[i - 1];
    for (int x = 0; x < k; ++x) {
      double best = inf;
      for (int xp = 0; xp < k; ++xp) {
        const double cand = prefix(i - 1, xp) + pw(xp, x);
        if (cand < best) best = cand;
      }
      prefix(i, x) = sub.unary(i, x) + best;
    }
  }
  for (int i = n - 2; i >= 0; --i) {
    const auto& pw = sub.pairwise[i];
    for (int x = 0; x < k; ++x) {
      double best = inf;
      for (int xn = 0; xn < k; ++xn) {
        const double cand = pw(x, xn) + suffix(i + 1, xn);
        if (cand < best) best = cand;
      }
      suffix(i, x) = sub.unary(i, x) + best;
    }
  }
  matrix<double> mm(n, k, inf);
  for (int i = 0; i < n; ++i) {
    for (int x = 0; x < k; ++x) {
      mm(i, x) = prefix(i, x) + suffix(i, x) - sub.unary(i, x);
    }
  }
  return mm;
}

}  // namespace dtomo
