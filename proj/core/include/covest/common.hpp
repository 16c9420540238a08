#pragma once

// Common error types and small helpers shared across the library.
//
// Error policy: invalid inputs (bad data, malformed parameters, violated
// preconditions) raise ValidationError; failures of numerical procedures
// (non-convergent quadrature, singular matrices, too few observations for
// an estimator) raise NumericalError. Both derive from std::runtime_error
// so callers may catch coarsely.

#include <stdexcept>
#include <string>

namespace covest {

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double sq(double x) { return x * x; }

inline const char* version() { return "0.1.0"; }

} // namespace covest
