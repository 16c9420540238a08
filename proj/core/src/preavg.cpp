#include "covest/preavg.hpp"

#include <cmath>

#include "covest/common.hpp"

namespace covest {

std::size_t window_size(std::size_t n, double theta, KnRule rule) {
    if (!(theta > 0.0)) throw ValidationError("window_size: theta must be positive");
    if (n < 4) throw ValidationError("window_size: need at least 4 pooled observations");
    double raw = theta * std::sqrt(static_cast<double>(n));
    double k = (rule == KnRule::Ceil) ? std::ceil(raw) : std::floor(raw + 0.5);
    if (k < 2.0) k = 2.0;
    return static_cast<std::size_t>(k);
}

PreAveraged preaverage(const TickSeries& series, std::size_t k_n, const Kernel& kernel) {
    const std::size_t nk = series.n();
    if (k_n < 2) throw ValidationError("preaverage: k_n must be at least 2");
    if (k_n > nk)
        throw ValidationError("preaverage: k_n = " + std::to_string(k_n) +
                              " exceeds interval count " + std::to_string(nk) + " of asset '" +
                              series.asset + "'");

    std::vector<double> w(k_n); // w[j] = g(j/k_n), j = 1..k_n-1
    for (std::size_t j = 1; j < k_n; ++j)
        w[j] = kernel.g(static_cast<double>(j) / static_cast<double>(k_n));

    PreAveraged out;
    out.asset = series.asset;
    out.k_n = k_n;
    out.values.resize(nk - k_n + 2);
    const auto& y = series.values;
    for (std::size_t i = 0; i + k_n <= nk + 1; ++i) {
        double acc = 0.0;
        for (std::size_t j = 1; j < k_n; ++j) acc += w[j] * (y[i + j] - y[i + j - 1]);
        out.values[i] = acc;
    }
    return out;
}

} // namespace covest
