#pragma once

// Run configuration shared by the CLI subcommands. Every field has a
// default; the JSON parser rejects unknown keys so typos fail loudly.
// Seeds are deliberately absent: randomness must be requested explicitly
// per invocation.

#include <cstddef>
#include <string>

#include "covest/preavg.hpp"
#include "covest/sim.hpp"
#include "covest/variance.hpp"

namespace covest {

struct RunConfig {
    // estimation
    double theta = 0.15;
    std::string kn_rule = "round"; // "round" | "ceil"
    std::string kernel = "triangle";
    std::string variance = "subsample"; // "subsample" | "plugin" | "univariate"
    double varpi = 1.0;
    double eta = 7.0 / 12.0;
    double spot_window = 0.0; // plug-in spot bandwidth; 0 = n^{-1/3}
    std::size_t u_points = 101;
    double ci_level = 0.95;
    bool normalize_time = false;
    double joint_tolerance = 0.0;

    // sampling scheme (simulate / mc / calibrate)
    std::string scheme = "subset"; // "subset" | "shifted" | "poisson"
    std::size_t N = 23400;
    std::size_t n1 = 4680;
    std::size_t n2 = 2340;
    double lambda1 = 5.0;
    double lambda2 = 10.0;

    // data generating process
    double gamma = 0.5;
    double ma_theta = 0.0;

    // monte carlo / calibration
    std::size_t reps = 500;
    std::size_t calib_reps = 500;
    double calib_rho = 1.0;
    bool adjust_variance = true;
    std::size_t threads = 1;

    void validate() const;

    KnRule kn_rule_enum() const;
    VarianceMethod variance_enum() const;
    SamplingScheme make_scheme() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

} // namespace covest
