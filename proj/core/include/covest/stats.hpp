#pragma once

// Small statistical utilities: normal and chi-square distribution
// functions used by confidence regions and tests.

#include <cstddef>

namespace covest {

double normal_cdf(double x);
// Inverse standard normal CDF; p in (0,1).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

double chi2_cdf(double x, std::size_t dof);
// Inverse chi-square CDF; p in [0,1).
double chi2_quantile(double p, std::size_t dof);

} // namespace covest
