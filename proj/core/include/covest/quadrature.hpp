#pragma once

// Adaptive Gauss-Legendre quadrature.
//
// The weight-kernel integrands used in this library are piecewise smooth
// with known kink locations, so the integrators accept explicit interior
// breakpoints and subdivide adaptively inside each smooth piece.

#include <functional>
#include <vector>

namespace covest {

struct QuadSettings {
    int gl_points = 15;     // Gauss-Legendre nodes per panel
    double abs_tol = 1e-9;  // absolute tolerance for a full integral
    int max_depth = 24;     // panel bisection depth before giving up
};

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1].
// Cached and thread safe.
struct GLRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GLRule& gl_rule(int n);

// Integral of f over [a, b]. Throws NumericalError if the panel recursion
// fails to meet the tolerance within the depth budget.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadSettings& settings = {});

// Same, but first splits [a, b] at the given interior breakpoints (values
// outside (a, b) are ignored; the list need not be sorted or unique).
double integrate_with_breaks(const std::function<double(double)>& f, double a, double b,
                             std::vector<double> breaks, const QuadSettings& settings = {});

} // namespace covest
