#pragma once

// Pre-averaged Hayashi-Yoshida covariation estimator.
//
// Entry (k,l) sums Ybar^k_i * Ybar^l_j over all window pairs whose spans
// (t_i^k, t_{i+k_n}^k] and (t_j^l, t_{j+k_n}^l] intersect, normalized by
// 1/(psi k_n)^2. The span end index is clamped at the last observation, so
// the final window of each asset reaches to that asset's last time.
//
// The fast path precomputes, for every window i of asset k, the contiguous
// range [j_lo, j_hi) of overlapping asset-l windows with two monotone
// pointers and reduces products with prefix sums; hy_naive_oracle is an
// independent quadratic reference used by the tests.

#include <cstddef>
#include <vector>

#include "covest/grids.hpp"
#include "covest/kernel.hpp"
#include "covest/matrix.hpp"
#include "covest/preavg.hpp"

namespace covest {

struct CovEstimate {
    Matrix matrix;         // final estimate (calibrated when factors applied)
    Matrix raw;            // uncalibrated statistic
    Matrix calibration;    // divisors applied entrywise; all 1 when uncalibrated
    Matrix overlap_counts; // contributing (i,j) pairs per entry
    std::size_t k_n = 0;
    double theta = 0.0;    // effective k_n / sqrt(n_total)
    bool calibrated = false;
};

// Shared per-panel working state: pre-averaged values, window spans and
// prefix sums. Holds a reference to the panel; keep the panel alive.
class HyContext {
public:
    HyContext(const Panel& panel, const Kernel& kernel, std::size_t k_n);

    struct AssetWindows {
        std::vector<double> ybar;
        std::vector<double> wstart; // t_i
        std::vector<double> wend;   // t_{min(i + k_n, n_k)}
        std::vector<double> prefix; // prefix sums of ybar, size +1
    };

    const Panel& panel() const { return *panel_; }
    const Kernel& kernel() const { return *kernel_; }
    std::size_t k_n() const { return k_n_; }
    double theta_eff() const { return theta_eff_; }
    double norm() const { return norm_; } // 1 / (psi k_n)^2
    const AssetWindows& asset(std::size_t k) const { return assets_[k]; }

    // overlap ranges of asset-l windows for every asset-k window
    struct PairRanges {
        std::vector<std::size_t> lo;
        std::vector<std::size_t> hi; // overlap set is [lo[i], hi[i]), hi >= lo
    };
    PairRanges pair_ranges(std::size_t k, std::size_t l) const;

private:
    const Panel* panel_;
    const Kernel* kernel_;
    std::size_t k_n_;
    double theta_eff_;
    double norm_;
    std::vector<AssetWindows> assets_;
};

CovEstimate hy_matrix(const HyContext& ctx);
CovEstimate hy_matrix(const Panel& panel, const Kernel& kernel, std::size_t k_n);

// Independent O(n^2) enumeration of the same statistic (reference oracle).
CovEstimate hy_naive_oracle(const Panel& panel, const Kernel& kernel, std::size_t k_n);

// Entry (k,l) restricted to windows with t_i^k in [a, b); the j-sum stays
// unrestricted.
double hy_block(const HyContext& ctx, std::size_t k, std::size_t l, double a, double b);
double hy_block(const Panel& panel, const Kernel& kernel, std::size_t k_n, std::size_t k,
                std::size_t l, double a, double b);

// All entries restricted to windows fully contained in [0, t] on both legs;
// t in (0, 1]. At t = 1 this equals hy_matrix (window ends are clamped).
Matrix hy_partial(const HyContext& ctx, double t);
Matrix hy_partial(const Panel& panel, const Kernel& kernel, std::size_t k_n, double t);

// Applies multiplicative calibration: matrix = raw ./ divisors.
void apply_calibration(CovEstimate& est, const Matrix& divisors);

} // namespace covest
