#include <covest/common.hpp>
#include <covest/io.hpp>
#include <covest/kernel.hpp>
#include <covest/mc.hpp>
#include <covest/sim.hpp>

#include <doctest.h>

#include <cmath>
#include <cstddef>

using covest::calibrate;
using covest::Kernel;
using covest::KnRule;
using covest::McTuning;
using covest::run_mc;
using covest::SamplingScheme;
using covest::SvModelParams;

namespace {

SvModelParams small_params(std::size_t N) {
    SvModelParams p;
    p.N = N;
    return p;
}

}  // namespace

TEST_CASE("small study: shapes, finiteness, bookkeeping") {
    auto scheme = SamplingScheme::subset(23400, 2340, 1170);
    auto report =
        run_mc(scheme, small_params(23400), Kernel::triangle(), McTuning{}, 30, 1u, nullptr);

    CHECK(report.reps == 30);
    CHECK(report.failures == 0);
    CHECK(report.scheme_label == scheme.label());
    CHECK(report.calibration_key.empty());
    CHECK(report.ci_level == 0.95);
    CHECK(report.mean_n == doctest::Approx(3510.0));
    CHECK(report.mean_kn >= 2.0);

    REQUIRE(report.entries.size() == 3);
    CHECK(report.entries[0].k == 0);
    CHECK(report.entries[0].l == 0);
    CHECK(report.entries[1].k == 0);
    CHECK(report.entries[1].l == 1);
    CHECK(report.entries[2].k == 1);
    CHECK(report.entries[2].l == 1);
    for (const auto& e : report.entries) {
        CHECK(std::isfinite(e.rel_bias));
        CHECK(std::isfinite(e.rmse));
        CHECK(e.rmse >= 0.0);
        CHECK(e.rel_bias == e.rel_bias_raw);  // no calibration applied
        CHECK(e.rmse == e.rmse_raw);
        CHECK(e.coverage >= 0.0);
        CHECK(e.coverage <= 1.0);
        CHECK(std::isfinite(e.mean_std));
        CHECK(e.var_std >= 0.0);
    }

    CHECK(report.std_samples.size() == 30);
    std::size_t in_hist = 0;
    for (auto c : report.hist_counts) in_hist += c;
    CHECK(report.hist_counts.size() == report.hist_bins);
    CHECK(in_hist <= 30);
    CHECK(report.failure_messages.empty());
}

TEST_CASE("identical seeds and different thread counts give identical reports") {
    auto scheme = SamplingScheme::subset(23400, 2340, 1170);
    McTuning one;
    one.threads = 1;
    McTuning three;
    three.threads = 3;

    auto r1 = run_mc(scheme, small_params(23400), Kernel::triangle(), one, 24, 7u, nullptr);
    auto r2 = run_mc(scheme, small_params(23400), Kernel::triangle(), one, 24, 7u, nullptr);
    auto r3 = run_mc(scheme, small_params(23400), Kernel::triangle(), three, 24, 7u, nullptr);

    // serialized form strips runtime, so byte equality is the right notion
    auto j1 = covest::mc_report_json(r1);
    CHECK(j1 == covest::mc_report_json(r2));
    CHECK(j1 == covest::mc_report_json(r3));
}

TEST_CASE("calibration tables are honoured and checked") {
    auto scheme = SamplingScheme::subset(23400, 2340, 1170);
    auto kern = Kernel::triangle();
    McTuning tuning;

    auto table = calibrate(scheme, tuning.theta, kern, tuning.kn_rule, 25, 1.0, 2u);
    auto report = run_mc(scheme, small_params(23400), kern, tuning, 25, 3u, &table);
    CHECK(report.calibration_key == table.key);
    for (const auto& e : report.entries) {
        CHECK(e.rel_bias != e.rel_bias_raw);  // calibration moved the estimate
        CHECK(e.rel_bias > 0.5);
        CHECK(e.rel_bias < 1.5);
    }

    // a table built for another window must be rejected
    auto wrong = calibrate(scheme, 0.3, kern, tuning.kn_rule, 10, 1.0, 2u);
    CHECK_THROWS_AS(run_mc(scheme, small_params(23400), kern, tuning, 10, 3u, &wrong),
                    covest::ValidationError);
}

TEST_CASE("noise-free synchronous sanity: bias near one") {
    auto scheme = SamplingScheme::subset(23400, 2340, 1170);
    auto params = small_params(23400);
    params.gamma = 0.0;
    auto report = run_mc(scheme, params, Kernel::triangle(), McTuning{}, 100, 5u, nullptr);
    for (const auto& e : report.entries) {
        CHECK(e.rel_bias > 0.9);
        CHECK(e.rel_bias < 1.1);
    }
}

TEST_CASE("tuning and input validation") {
    auto scheme = SamplingScheme::subset(600, 120, 60);
    auto params = small_params(600);
    auto kern = Kernel::triangle();

    CHECK_THROWS_AS(run_mc(scheme, params, kern, McTuning{}, 0, 1u, nullptr),
                    covest::ValidationError);

    McTuning bad_level;
    bad_level.ci_level = 1.5;
    CHECK_THROWS_AS(run_mc(scheme, params, kern, bad_level, 10, 1u, nullptr),
                    covest::ValidationError);

    McTuning bad_eta;
    bad_eta.eta = 0.8;
    CHECK_THROWS_AS(run_mc(scheme, params, kern, bad_eta, 10, 1u, nullptr),
                    covest::ValidationError);

    // scheme/model grid mismatch
    CHECK_THROWS_AS(run_mc(scheme, small_params(500), kern, McTuning{}, 10, 1u, nullptr),
                    covest::ValidationError);
}

TEST_CASE("uniform replication failure aborts the study") {
    auto scheme = SamplingScheme::subset(600, 120, 60);
    McTuning huge_window;
    huge_window.theta = 50.0;  // k_n far above every n_k
    CHECK_THROWS_AS(
        run_mc(scheme, small_params(600), Kernel::triangle(), huge_window, 10, 1u, nullptr),
        covest::NumericalError);
}
