#pragma once

// Asymptotic-variance estimation for the pre-averaged covariation
// estimator: subsampled blocks, the functional plug-in form, and the
// univariate quarticity form, plus their ingredients (noise covariance,
// spot covariation, gamma functionals).

#include <cstddef>
#include <string>
#include <vector>

#include "covest/grids.hpp"
#include "covest/hy.hpp"
#include "covest/kernel.hpp"
#include "covest/matrix.hpp"

namespace covest {

struct NoiseCov {
    Matrix psi;       // entry (k,l): -(1/n_kl) sum of adjacent increment products
    Matrix n_joint;   // joint-point counts n_kl
    Matrix zero_flag; // 1 where n_kl = 0 and the entry was forced to 0
};

// Entries with no joint points are 0 and flagged, never NaN. The estimate
// is asymmetric in (k,l) in finite samples; both orders are computed as
// printed.
NoiseCov noise_cov(const Panel& panel, const TimeTransform& tt);

struct SpotVol {
    std::vector<double> times; // evaluation grid, ascending, in [0,1]
    std::vector<Matrix> values;
    double l_n = 0.0;
    std::string warning; // set when sqrt(n) * l_n is small
};

// Difference quotients of the partial estimator over a uniform grid of
// `points` times; below s = l_n the value at l_n is reused.
SpotVol spot_vol(const HyContext& ctx, double l_n, std::size_t points = 101);
SpotVol spot_vol(const Panel& panel, const Kernel& kernel, std::size_t k_n, double l_n);

enum class VarianceMethod { Subsample, Plugin, Univariate };

// 4-index tensor V_{kl,k'l'} stored as its d^2 x d^2 column-stacked view:
// row index a = l*d + k (0-based). Symmetric in (kl) <-> (k'l').
class VarianceTensor {
public:
    VarianceTensor() = default;
    VarianceTensor(std::size_t d, VarianceMethod method)
        : d_(d), method_(method), vhat_(d * d, d * d) {}

    std::size_t d() const { return d_; }
    VarianceMethod method() const { return method_; }

    std::size_t vec_index(std::size_t k, std::size_t l) const { return l * d_ + k; }

    double& at(std::size_t k, std::size_t l, std::size_t k2, std::size_t l2) {
        return vhat_(vec_index(k, l), vec_index(k2, l2));
    }
    double at(std::size_t k, std::size_t l, std::size_t k2, std::size_t l2) const {
        return vhat_(vec_index(k, l), vec_index(k2, l2));
    }

    const Matrix& vec_matrix() const { return vhat_; }
    Matrix& vec_matrix() { return vhat_; }

    // vec indices a with V_{a,a} < 0 (possible for subsampled estimates;
    // reported, never clamped)
    std::vector<std::size_t> negative_diagonals() const;

    // count of gamma prefactor terms dropped because a joint grid was too
    // thin to estimate f'_{kl} (plug-in only)
    std::size_t dropped_terms = 0;

private:
    std::size_t d_ = 0;
    VarianceMethod method_ = VarianceMethod::Subsample;
    Matrix vhat_;
};

// Subsampled estimator: block statistics over B(alpha) = [alpha b/n,
// (alpha+1) b/n) with b = round(varpi * n^eta), combined into symmetrized
// lag products scaled by sqrt(n)/2. Requires 1/2 < eta < 2/3 unless
// enforce_eta is false; fewer than 3 blocks is an error.
VarianceTensor var_subsample(const HyContext& ctx, double varpi = 1.0, double eta = 7.0 / 12.0,
                             bool enforce_eta = true);
VarianceTensor var_subsample(const Panel& panel, const Kernel& kernel, std::size_t k_n,
                             double varpi = 1.0, double eta = 7.0 / 12.0,
                             bool enforce_eta = true);

struct GammaTriple {
    double gamma = 0.0;
    double gamma_bar = 0.0;
    double gamma_tilde = 0.0;
    bool bar_dropped = false;   // prefactor joint grid too thin
    bool tilde_dropped = false;
};

// The three s-integrals of products of overlap functionals with their
// prefactors, at time u. Terms whose prefactor needs a pair grid with
// fewer than 10 joint points are set to 0: flagged when the grid is
// merely too thin to estimate a slope, unflagged when it is empty (a
// never-jointly-observed pair has zero pair mass, so 0 is exact).
GammaTriple gamma_functions(const TimeTransform& tt, const Kernel& kernel, double u,
                            std::size_t k, std::size_t l, std::size_t k2, std::size_t l2);

// Plug-in estimator: Simpson integration over u of the mixed-normal
// variance integrand assembled from gamma functionals, spot covariation
// and the noise covariance; theta is taken as k_n / sqrt(n). u_points is
// rounded up to an odd count >= 5; the spot grid is the u grid.
// psi_override substitutes a fixed noise covariance (used in tests).
VarianceTensor var_plugin(const HyContext& ctx, const TimeTransform& tt, double l_n,
                          std::size_t u_points = 101, const NoiseCov* psi_override = nullptr);
VarianceTensor var_plugin(const Panel& panel, const TimeTransform& tt, const Kernel& kernel,
                          std::size_t k_n, double l_n);

// Univariate estimator from pre-averaged quarticity; see the bracketed
// three-term form. theta must match the window choice k_n = theta sqrt(n).
double var_univariate(const TickSeries& series, const Kernel& kernel, std::size_t k_n,
                      double theta);

} // namespace covest
