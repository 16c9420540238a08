#pragma once

// Window-size rule and pre-averaging in tick time.
//
// All assets share one window k_n chosen from the pooled observation count
// n = sum_k n_k. Pre-averaged values are weighted sums of k_n - 1
// consecutive increments, so they are invariant under adding a constant to
// the raw observations.

#include <cstddef>
#include <vector>

#include "covest/grids.hpp"
#include "covest/kernel.hpp"

namespace covest {

enum class KnRule {
    Round, // round-half-up, floored at 2 (library default)
    Ceil,  // ceiling, used by the simulation study
};

// k_n = theta * sqrt(n) under the chosen rounding rule, never below 2.
// Requires theta > 0 and n >= 4.
std::size_t window_size(std::size_t n, double theta, KnRule rule = KnRule::Round);

struct PreAveraged {
    std::string asset;
    std::size_t k_n = 0;
    std::vector<double> values; // index i = 0 .. n_k - k_n + 1
};

// Ybar_{t_i} = sum_{j=1}^{k_n-1} g(j/k_n) (Y_{t_{i+j}} - Y_{t_{i+j-1}}).
// Requires 2 <= k_n <= n_k.
PreAveraged preaverage(const TickSeries& series, std::size_t k_n, const Kernel& kernel);

} // namespace covest
