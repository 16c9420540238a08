#pragma once

// Feasible central-limit machinery: vec-stacking, standardized statistics,
// entrywise confidence intervals with an optional joint chi-square region,
// and the parametric variance / optimal-theta tools for the constant-
// volatility model.

#include <cstddef>
#include <string>
#include <vector>

#include "covest/hy.hpp"
#include "covest/kernel.hpp"
#include "covest/matrix.hpp"
#include "covest/variance.hpp"

namespace covest {

// Column-major flattening; entry a of the result is M(a % d, a / d).
std::vector<double> vec_stack(const Matrix& m);
Matrix vec_unstack(const std::vector<double>& v);

struct StandardizedStats {
    std::vector<double> z; // n^{1/4} V^{-1/2} (vec(est) - vec(target))
    std::string method = "symmetric-eigen";
    std::size_t floored_eigenvalues = 0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    std::string warning; // set when eigenvalues were floored
};

// Whitens vec(est.matrix) - vec(target) with the inverse square root of
// the symmetrized d^2 x d^2 variance view and scales by n^{1/4}.
// Eigenvalues below 1e-12 are floored to it with a warning; eigenvalues
// below -0.01 * max eigenvalue mean the estimate is not usably PD and
// raise NumericalError listing the spectrum.
StandardizedStats standardize(const CovEstimate& est, const Matrix& target,
                              const VarianceTensor& V, std::size_t n);

struct ConfidenceInterval {
    std::size_t k = 0;
    std::size_t l = 0;
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool valid = false;
    std::string reason; // why the interval was refused
};

struct ConfidenceRegion {
    double level = 0.0;
    double z = 0.0; // normal quantile used
    std::vector<ConfidenceInterval> intervals;
};

// Marginal intervals est_{kl} +- z_{(1+level)/2} sqrt(V_{kl,kl}) n^{-1/4}.
// Entries whose diagonal variance is negative are refused (valid=false),
// never clamped. level = 0 yields degenerate intervals.
ConfidenceRegion confidence_region(const CovEstimate& est, const VarianceTensor& V,
                                   std::size_t n, double level);

struct JointRegion {
    double statistic = 0.0; // squared norm of the standardized stats
    std::size_t dof = 0;
    double critical = 0.0;
    bool covered = false; // statistic <= critical
};

// Joint chi-square acceptance region for the standardized statistics.
JointRegion joint_chi2_region(const StandardizedStats& stats, double level);

// (2/psi^4) (theta kappa sigma^4 + 2 theta^-1 Psi kappa_bar sigma^2
//            + theta^-3 Psi^2 kappa_tilde), the constant-volatility,
// equidistant-observation asymptotic variance.
double parametric_variance(double theta, double sigma, double Psi, const Kernel& kernel);

// Golden-section argmin of parametric_variance over theta (relative
// tolerance 1e-6). Psi must be strictly positive for an interior minimum.
double optimal_theta(double sigma, double Psi, const Kernel& kernel);

} // namespace covest
