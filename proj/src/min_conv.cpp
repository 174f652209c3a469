#include "dtomo/min_conv.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <queue>

namespace dtomo {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> min_conv_naive(std::span<const double> a, std::span<const double> b) {
  assert(!a.empty() && !b.empty());
  std::vector<double> c(a.size() + b.size() - 1, inf);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      c[i + j] = std::min(c[i + j], a[i] + b[j]);
    }
  }
  return c;
}

std::vector<double> min_conv_fast(std::span<const double> a, std::span<const double> b,
                                  std::size_t pop_budget) {
  assert(!a.empty() && !b.empty());
  const std::size_t out_size = a.size() + b.size() - 1;
  if (pop_budget == 0) pop_budget = 16 * out_size + 64;

  std::vector<std::size_t> ia(a.size()), ib(b.size());
  std::iota(ia.begin(), ia.end(), std::size_t{0});
  std::iota(ib.begin(), ib.end(), std::size_t{0});
  std::sort(ia.begin(), ia.end(), [&](std::size_t x, std::size_t y) { return a[x] < a[y]; });
  std::sort(ib.begin(), ib.end(), [&](std::size_t x, std::size_t y) { return b[x] < b[y]; });

  struct Candidate {
    double sum;
    std::size_t p, q;  // ranks into ia / ib
  };
  auto worse = [](const Candidate& x, const Candidate& y) { return x.sum > y.sum; };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);

  std::vector<double> c(out_size, inf);
  std::vector<bool> settled(out_size, false);
  std::size_t open = out_size;
  std::size_t pops = 0;

  // each cell (p,q) of the rank grid is generated exactly once: from (p-1,q),
  // or from (0,q-1) when p == 0
  frontier.push({a[ia[0]] + b[ib[0]], 0, 0});
  while (open > 0 && !frontier.empty()) {
    if (++pops > pop_budget) return min_conv_naive(a, b);
    const Candidate top = frontier.top();
    frontier.pop();
    const std::size_t t = ia[top.p] + ib[top.q];
    if (!settled[t]) {
      settled[t] = true;
      c[t] = top.sum;
      --open;
    }
    if (top.p + 1 < a.size())
      frontier.push({a[ia[top.p + 1]] + b[ib[top.q]], top.p + 1, top.q});
    if (top.p == 0 && top.q + 1 < b.size())
      frontier.push({a[ia[0]] + b[ib[top.q + 1]], std::size_t{0}, top.q + 1});
  }
  assert(open == 0);
  return c;
}

std::vector<double> min_conv(std::span<const double> a, std::span<const double> b,
                             MinConvKernel kernel) {
  switch (kernel) {
    case MinConvKernel::naive: return min_conv_naive(a, b);
    case MinConvKernel::fast: return min_conv_fast(a, b);
    case MinConvKernel::automatic:
      // heap overhead dominates on short vectors
      if (a.size() * b.size() <= 256) return min_conv_naive(a, b);
      return min_conv_fast(a, b);
  }
  return min_conv_naive(a, b);
}

}  // namespace dtomo
