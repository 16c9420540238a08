#include "covest/inference.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "covest/common.hpp"
#include "covest/stats.hpp"

namespace covest {

std::vector<double> vec_stack(const Matrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("vec_stack: matrix must be square");
    const std::size_t d = m.rows();
    std::vector<double> v(d * d);
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t k = 0; k < d; ++k) v[l * d + k] = m(k, l);
    return v;
}

Matrix vec_unstack(const std::vector<double>& v) {
    std::size_t d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw ValidationError("vec_unstack: length is not a perfect square");
    Matrix m(d, d);
    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t k = 0; k < d; ++k) m(k, l) = v[l * d + k];
    return m;
}

StandardizedStats standardize(const CovEstimate& est, const Matrix& target,
                              const VarianceTensor& V, std::size_t n) {
    const std::size_t d = est.matrix.rows();
    if (target.rows() != d || target.cols() != d)
        throw ValidationError("standardize: target shape mismatch");
    if (V.d() != d) throw ValidationError("standardize: variance tensor dimension mismatch");
    if (n < 1) throw ValidationError("standardize: n must be positive");
    const std::size_t D = d * d;

    Eigen::MatrixXd v(D, D);
    for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < D; ++j)
            v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                0.5 * (V.vec_matrix()(i, j) + V.vec_matrix()(j, i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
    if (eig.info() != Eigen::Success)
        throw NumericalError("standardize: eigendecomposition failed");
    Eigen::VectorXd lam = eig.eigenvalues();

    StandardizedStats out;
    out.min_eigenvalue = lam.minCoeff();
    out.max_eigenvalue = lam.maxCoeff();

    const double floor_at = 1e-12;
    if (out.min_eigenvalue < -0.01 * std::max(out.max_eigenvalue, floor_at)) {
        std::ostringstream os;
        os << "standardize: variance estimate is not positive definite; eigenvalues:";
        for (Eigen::Index i = 0; i < lam.size(); ++i) os << " " << lam(i);
        throw NumericalError(os.str());
    }
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) < floor_at) {
            lam(i) = floor_at;
            ++out.floored_eigenvalues;
        }
    if (out.floored_eigenvalues > 0)
        out.warning = std::to_string(out.floored_eigenvalues) +
                      " eigenvalue(s) floored at 1e-12; standardized statistics in the "
                      "affected directions are unreliable";

    Eigen::VectorXd diff(D);
    std::vector<double> ve = vec_stack(est.matrix);
    std::vector<double> vt = vec_stack(target);
    for (std::size_t i = 0; i < D; ++i)
        diff(static_cast<Eigen::Index>(i)) = ve[i] - vt[i];

    Eigen::VectorXd invsqrt = lam.array().rsqrt();
    Eigen::VectorXd w = eig.eigenvectors() *
                        (invsqrt.asDiagonal() * (eig.eigenvectors().transpose() * diff));
    const double scale = std::pow(static_cast<double>(n), 0.25);

    out.z.resize(D);
    for (std::size_t i = 0; i < D; ++i) out.z[i] = scale * w(static_cast<Eigen::Index>(i));
    return out;
}

ConfidenceRegion confidence_region(const CovEstimate& est, const VarianceTensor& V,
                                   std::size_t n, double level) {
    if (!(level >= 0.0 && level < 1.0))
        throw ValidationError("confidence_region: level must lie in [0,1)");
    const std::size_t d = est.matrix.rows();
    if (V.d() != d) throw ValidationError("confidence_region: dimension mismatch");

    ConfidenceRegion out;
    out.level = level;
    out.z = (level == 0.0) ? 0.0 : normal_quantile(0.5 * (1.0 + level));
    const double nscale = std::pow(static_cast<double>(n), -0.25);

    for (std::size_t l = 0; l < d; ++l)
        for (std::size_t k = 0; k < d; ++k) {
            ConfidenceInterval ci;
            ci.k = k;
            ci.l = l;
            ci.estimate = est.matrix(k, l);
            double vkl = V.at(k, l, k, l);
            if (vkl < 0.0) {
                ci.reason = "diagonal variance estimate is negative (" + std::to_string(vkl) +
                            "); interval refused";
            } else {
                double half = out.z * std::sqrt(vkl) * nscale;
                ci.lo = ci.estimate - half;
                ci.hi = ci.estimate + half;
                ci.valid = true;
            }
            out.intervals.push_back(ci);
        }
    return out;
}

JointRegion joint_chi2_region(const StandardizedStats& stats, double level) {
    if (!(level >= 0.0 && level < 1.0))
        throw ValidationError("joint_chi2_region: level must lie in [0,1)");
    JointRegion r;
    r.dof = stats.z.size();
    for (double z : stats.z) r.statistic += z * z;
    r.critical = chi2_quantile(level, r.dof);
    r.covered = r.statistic <= r.critical;
    return r;
}

double parametric_variance(double theta, double sigma, double Psi, const Kernel& kernel) {
    if (!(theta > 0.0) || !(sigma > 0.0) || Psi < 0.0)
        throw ValidationError("parametric_variance: need theta, sigma > 0 and Psi >= 0");
    const KappaConstants& kc = kernel.kappas();
    const double psi4 = sq(sq(kernel.psi()));
    double s2 = sigma * sigma;
    return 2.0 / psi4 *
           (theta * kc.kappa * s2 * s2 + 2.0 / theta * Psi * kc.kappa_bar * s2 +
            Psi * Psi / (theta * theta * theta) * kc.kappa_tilde);
}

double optimal_theta(double sigma, double Psi, const Kernel& kernel) {
    if (!(sigma > 0.0)) throw ValidationError("optimal_theta: sigma must be positive");
    if (!(Psi > 0.0))
        throw ValidationError("optimal_theta: Psi must be strictly positive for an interior "
                              "minimum");
    const double scale = std::sqrt(Psi) / sigma;
    double lo = 1e-3 * scale, hi = 1e3 * scale;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = parametric_variance(x1, sigma, Psi, kernel);
    double f2 = parametric_variance(x2, sigma, Psi, kernel);
    while ((b - a) > 1e-6 * (std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = parametric_variance(x1, sigma, Psi, kernel);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = parametric_variance(x2, sigma, Psi, kernel);
        }
    }
    return 0.5 * (a + b);
}

} // namespace covest
