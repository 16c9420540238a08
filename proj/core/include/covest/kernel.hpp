#pragma once

// Pre-averaging weight functions and the functionals built from them.
//
// A weight function g lives on [0,1], vanishes at both ends and is piecewise
// C^1 with a known finite set of interior kinks. All scalar functionals
// needed downstream are computed once at construction:
//   psi      = int_0^1 g(u) du            (must be > 0)
//   mu       = int_0^1 g(u)^2 du
//   mu_tilde = int_0^1 g'(u)^2 du
//   kappa, kappa_bar, kappa_tilde: integrals over s in [-2,2] of the squared
//   overlap functionals psi_overlap(s, 1, .) defined below.
//
// The overlap functional, for x > 0:
//   psi_v(s, x) = int_0^1 f_u(u) int_{(u-1+s)x}^{1+x(s+u)} f_v(v) dv du
// with (f_u, f_v) = (g, g) for GG, (g, g') for GGp and (g', g') for GpGp.
// psi_v(., x) is supported on (-1-1/x, 1+1/x).

#include <functional>
#include <string>
#include <vector>

#include "covest/quadrature.hpp"

namespace covest {

enum class PsiVariant { GG, GGp, GpGp };

struct KappaConstants {
    double kappa = 0.0;
    double kappa_bar = 0.0;
    double kappa_tilde = 0.0;
};

struct KernelConstants {
    std::string name;
    double psi = 0.0;
    double mu = 0.0;
    double mu_tilde = 0.0;
    KappaConstants kappas;
};

class Kernel {
public:
    using Fn = std::function<double(double)>;

    // Validates and builds a weight function. Checks g(0) = g(1) = 0,
    // psi > 0, consistency of gp with g away from kinks, and (when given)
    // consistency of the analytic primitive G(x) = int_0^x g. Kink
    // locations must lie strictly inside (0,1). Throws ValidationError on
    // bad input and NumericalError if the constant integrals fail.
    static Kernel make(std::string name, Fn g, Fn gp, std::vector<double> interior_kinks,
                       Fn primitive = nullptr, QuadSettings quad = {});

    static const Kernel& triangle(); // g(x) = min(x, 1-x)
    static const Kernel& sine();     // g(x) = sin(pi x)
    static const Kernel& parabola(); // g(x) = x (1-x)

    // Lookup of the built-in kernels above by name.
    static const Kernel& by_name(const std::string& name);

    const std::string& name() const { return name_; }

    // g and g' evaluate to 0 outside [0,1].
    double g(double x) const;
    double gp(double x) const;
    // G(x) = int_0^x g(u) du, clamped: G(x<=0) = 0, G(x>=1) = psi.
    double primitive(double x) const;

    const std::vector<double>& kinks() const { return kinks_; }
    double psi() const { return psi_; }
    double mu() const { return mu_; }
    double mu_tilde() const { return mu_tilde_; }
    const KappaConstants& kappas() const { return kappas_; }
    const QuadSettings& quad() const { return quad_; }

private:
    Kernel() = default;

    std::string name_;
    Fn g_;
    Fn gp_;
    Fn primitive_;
    std::vector<double> kinks_;
    QuadSettings quad_;
    double psi_ = 0.0;
    double mu_ = 0.0;
    double mu_tilde_ = 0.0;
    KappaConstants kappas_;
};

// Overlap functional psi_v(s, x) for x > 0 (ValidationError otherwise).
double psi_overlap(const Kernel& k, double s, double x, PsiVariant variant = PsiVariant::GG);
// Same with explicit quadrature settings (callers that feed the value into a
// surrounding adaptive integral want a tighter tolerance here).
double psi_overlap(const Kernel& k, double s, double x, PsiVariant variant,
                   const QuadSettings& settings);

// The constants are cached on the kernel; these accessors exist for
// reporting convenience.
KappaConstants kappa_constants(const Kernel& k);
KernelConstants kernel_constants(const Kernel& k);

} // namespace covest
