#pragma once

// Bivariate stochastic-volatility data generator, the three sampling
// schemes, noise injection and the Brownian bias calibration.
//
// Reproducibility: every stochastic ingredient draws from its own
// counter-based stream keyed by (seed, replication, stream id), so results
// are bit-identical regardless of threading or evaluation order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "covest/grids.hpp"
#include "covest/kernel.hpp"
#include "covest/matrix.hpp"
#include "covest/preavg.hpp"
#include "covest/rng.hpp"

namespace covest {

// Stream ids within a (seed, replication) key. Fixed: changing them
// changes every simulated artifact.
enum StreamId : std::uint64_t {
    StreamShock1 = 0, // asset 1 innovation, drives both price and volatility
    StreamShock2 = 1,
    StreamCommon = 2, // shared price factor
    StreamInit = 3,   // stationary volatility starting points
    StreamSample1 = 4,
    StreamSample2 = 5,
    StreamNoise1 = 6,
    StreamNoise2 = 7,
    StreamCalib1 = 8,
    StreamCalib2 = 9,
};

struct SvAssetParams {
    double drift = 0.03;
    double beta0 = -5.0 / 16.0; // beta1^2 / (2 alpha) normalizes E(int sigma^2) to 1
    double beta1 = 1.0 / 8.0;
    double alpha = -1.0 / 40.0; // OU mean reversion, must be negative
    double rho = -0.3;          // idiosyncratic loading; common-factor weight sqrt(1-rho^2)
};

struct SvModelParams {
    std::array<SvAssetParams, 2> assets{};
    std::size_t N = 23400; // equidistant simulation grid [0,1]
    double gamma = 0.5;    // noise-to-signal ratio

    void validate() const;
};

struct SvPaths {
    std::size_t N = 0;
    std::array<std::vector<double>, 2> x;     // efficient log prices, N+1 points
    std::array<std::vector<double>, 2> sigma; // spot volatilities, N+1 points
    std::array<double, 2> rho{};              // copied loadings (for the truth below)

    // Realized integrated covariation at simulation resolution (left
    // Riemann sum; the off-diagonal carries sqrt(1-rho1^2) sqrt(1-rho2^2)).
    Matrix integrated_cov() const;
};

// Exact OU volatility stepping (stationary start), Euler log-price
// stepping, one common Brownian factor; the same per-step innovation
// drives an asset's idiosyncratic shock and its volatility process.
SvPaths simulate_sv(const SvModelParams& params, std::uint64_t seed, std::uint64_t rep = 0);

struct SamplingScheme {
    enum class Kind { Subset, Shifted, Poisson };
    Kind kind = Kind::Subset;
    std::size_t N = 23400;
    std::size_t n1 = 0;    // subset/shifted interval counts
    std::size_t n2 = 0;    // subset only
    double lambda1 = 0.0;  // poisson mean waiting times in grid units
    double lambda2 = 0.0;

    static SamplingScheme subset(std::size_t N, std::size_t n1, std::size_t n2);
    static SamplingScheme shifted(std::size_t N, std::size_t n1);
    static SamplingScheme poisson(std::size_t N, double lambda1, double lambda2);

    void validate() const;
    std::string label() const;
};

// Extracts non-synchronous panels from the full grid record:
//   Subset: asset 1 keeps every (N/n1)-th point, asset 2 every (N/n2)-th.
//   Shifted: asset 2's times sit floor(s/2) grid units after asset 1's,
//     s = N/n1, so the two grids never meet (asset 2 stays off 0 and 1).
//   Poisson: independent geometric waiting times with means lambda1,
//     lambda2 grid units; endpoints 0 and 1 always included.
// Output values are copied from the input grids, never interpolated.
Panel apply_scheme(const std::array<std::vector<double>, 2>& grid_values,
                   const SamplingScheme& scheme, std::uint64_t seed, std::uint64_t rep = 0);

// iid (or tick-time MA(1) when ma_theta != 0) Gaussian noise with variance
// omega^2 = gamma_ratio^2 * (grid average of sigma^2) / N: gamma_ratio is
// the noise sd relative to the sd of a one-step return on the full grid.
// The MA coefficients are normalized so the marginal variance stays
// omega^2.
std::vector<double> add_noise(const std::vector<double>& values,
                              const std::vector<double>& sigma_path_full, double gamma_ratio,
                              double ma_theta, RngStream& rng);

struct CalibrationTable {
    Matrix factors;     // divide raw estimates by these (expected/target ratios)
    Matrix var_factors; // variance-estimator bias ratios (1 when absent)
    bool has_var_factors = false;
    std::size_t reps = 0;
    double rho = 1.0;
    std::string key; // identifies (scheme, N, theta, kernel, kn rule)
    std::vector<std::string> warnings;
};

std::string calibration_key(const SamplingScheme& scheme, double theta,
                            const std::string& kernel_name, KnRule rule);

// Brownian-pair calibration: unit-volatility driftless noiseless paths
// with known correlation rho, sampled through the scheme; factors are the
// MC means of the raw estimator divided by the known target (rho off the
// diagonal, 1 on it). When with_var_factors is set, the subsampled
// variance estimator is averaged as well and compared against the
// empirical estimator variance to produce per-entry variance ratios.
CalibrationTable calibrate(const SamplingScheme& scheme, double theta, const Kernel& kernel,
                           KnRule rule, std::size_t reps, double rho, std::uint64_t seed,
                           std::size_t threads = 1, bool with_var_factors = true,
                           double varpi = 1.0, double eta = 7.0 / 12.0);

} // namespace covest
