#pragma once

// Monte Carlo study driver: per replication, simulate the bivariate
// stochastic-volatility model, sample it through a scheme, add noise,
// estimate the covariation matrix and its subsampled variance, and
// aggregate bias, RMSE, coverage and standardized statistics against the
// realized integrated covariation of that replication.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "covest/kernel.hpp"
#include "covest/preavg.hpp"
#include "covest/sim.hpp"

namespace covest {

struct McTuning {
    double theta = 0.15;
    KnRule kn_rule = KnRule::Ceil;
    double varpi = 1.0;      // subsampled variance block scale
    double eta = 7.0 / 12.0; // subsampled variance block exponent
    double ci_level = 0.95;
    double ma_theta = 0.0; // tick-time MA(1) noise coefficient, 0 = iid
    std::size_t threads = 1;
    bool adjust_variance = true; // apply calibration variance factors when present
};

struct McEntryStats {
    std::size_t k = 0;
    std::size_t l = 0;
    double rel_bias = 0.0; // mean of calibrated estimate over realized truth
    double rmse = 0.0;     // root mean squared calibrated error
    double rel_bias_raw = 0.0;
    double rmse_raw = 0.0;
    double coverage = 0.0; // marginal CI hit rate at ci_level
    double mean_std = 0.0; // moments of the standardized statistics
    double var_std = 0.0;
};

struct McReport {
    std::size_t reps = 0;
    std::size_t failures = 0;
    std::string scheme_label;
    std::string calibration_key; // empty when calibration was disabled
    double ci_level = 0.95;
    double mean_n = 0.0;
    double mean_kn = 0.0;
    std::vector<McEntryStats> entries; // upper triangle, (1,1),(1,2),(2,2) order

    // standardized statistics for the cross entry, for distribution checks
    std::vector<double> std_samples;
    std::size_t hist_bins = 50;
    double hist_lo = -4.0;
    double hist_hi = 4.0;
    std::vector<std::size_t> hist_counts;

    double runtime_seconds = 0.0;
    std::vector<std::string> failure_messages; // first few failure reasons
};

// calib == nullptr runs uncalibrated (callers must opt out explicitly).
// When a table is given its key must match (scheme, theta, kernel, kn
// rule). Replications that throw are counted as failures; more than 1%
// of them aborts the study. Results are independent of thread count.
McReport run_mc(const SamplingScheme& scheme, const SvModelParams& params, const Kernel& kernel,
                const McTuning& tuning, std::size_t reps, std::uint64_t seed,
                const CalibrationTable* calib);

} // namespace covest
