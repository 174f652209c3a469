#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dtomo {

enum class MinConvKernel { naive, fast, automatic };

// c_t = min_{i+j=t} a_i + b_j over valid (i,j); entries finite or +inf, result length |a|+|b|-1
std::vector<double> min_conv_naive(std::span<const double> a, std::span<const double> b);

// sorts both inputs and expands candidate pairs in nondecreasing sum order, settling each
// output index at its first-seen candidate; falls back to the naive kernel once the expansion
// frontier exceeds `pop_budget` pops (0 = default budget)
std::vector<double> min_conv_fast(std::span<const double> a, std::span<const double> b,
                                  std::size_t pop_budget = 0);

std::vector<double> min_conv(std::span<const double> a, std::span<const double> b,
                             MinConvKernel kernel);

}  // namespace dtomo
