#include <covest/common.hpp>
#include <covest/grids.hpp>
#include <covest/hy.hpp>
#include <covest/kernel.hpp>
#include <covest/matrix.hpp>
#include <covest/rng.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

using covest::build_panel;
using covest::CovEstimate;
using covest::HyContext;
using covest::Kernel;
using covest::Matrix;
using covest::Panel;
using covest::RngStream;
using covest::TickSeries;

namespace {

TickSeries equi_series(std::string name, std::vector<double> values) {
    std::size_t n = values.size() - 1;
    std::vector<double> t(values.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<double>(i) / static_cast<double>(n);
    return TickSeries{std::move(name), std::move(t), std::move(values)};
}

// random panel with a mix of private and shared observation times
Panel random_panel(RngStream& rng, std::size_t d) {
    std::vector<double> shared;
    int n_shared = 3 + static_cast<int>(rng.uniform_co() * 5);
    for (int i = 0; i < n_shared; ++i) shared.push_back(rng.uniform_co());

    std::vector<TickSeries> all;
    for (std::size_t a = 0; a < d; ++a) {
        std::vector<double> t{0.0, 1.0};
        int n_own = 6 + static_cast<int>(rng.uniform_co() * 22);
        for (int i = 0; i < n_own; ++i) t.push_back(rng.uniform_co());
        // each asset adopts a random subset of the shared times
        for (double s : shared)
            if (rng.uniform() < 0.6) t.push_back(s);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());

        std::vector<double> y(t.size());
        y[0] = rng.normal();
        for (std::size_t i = 1; i < y.size(); ++i) y[i] = y[i - 1] + 0.3 * rng.normal();
        all.push_back(TickSeries{"a" + std::to_string(a), std::move(t), std::move(y)});
    }
    return build_panel(std::move(all));
}

}  // namespace

TEST_CASE("three-tick bivariate example, by hand") {
    // Equal grids {0, 1/2, 1}, k_n = 2, triangle. Every window pair overlaps,
    // so each entry is the product of summed pre-averaged terms:
    //   Ybar sums: asset a: 0.5*(0.5+0.5) = 0.5; asset b: 0.5*(1+1) = 1.
    //   Normalization 1/(psi*k_n)^2 = 4 gives HY = [[1,2],[2,4]].
    auto a = equi_series("a", {0.0, 0.5, 1.0});
    auto b = equi_series("b", {0.0, 1.0, 2.0});
    auto panel = build_panel({a, b});
    auto est = covest::hy_matrix(panel, Kernel::triangle(), 2);

    CHECK(est.matrix(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.matrix(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(est.matrix(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(est.matrix(1, 1) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(est.k_n == 2);
    CHECK(est.theta == doctest::Approx(2.0 / std::sqrt(4.0)));
    CHECK_FALSE(est.calibrated);
    // all 2x2 window pairs overlap
    CHECK(est.overlap_counts(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("sweep implementation matches the quadratic-loop oracle") {
    RngStream rng(31415u, 0u, 0u);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_co() * 3.0);
        auto panel = random_panel(rng, d);
        std::size_t min_nk = panel.series[0].n();
        for (const auto& s : panel.series) min_nk = std::min(min_nk, s.n());
        std::size_t k_n = 2 + static_cast<std::size_t>(rng.uniform_co() * 3.0);
        k_n = std::min(k_n, min_nk);

        auto fast = covest::hy_matrix(panel, Kernel::triangle(), k_n);
        auto naive = covest::hy_naive_oracle(panel, Kernel::triangle(), k_n);
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t l = 0; l < d; ++l) {
                CHECK(std::abs(fast.matrix(k, l) - naive.matrix(k, l)) < 1e-12);
                CHECK(fast.overlap_counts(k, l) ==
                      doctest::Approx(naive.overlap_counts(k, l)));
            }
        }
    }
}

TEST_CASE("running estimate at t = 1 equals the full matrix") {
    RngStream rng(99u, 0u, 0u);
    auto panel = random_panel(rng, 2);
    HyContext ctx(panel, Kernel::triangle(), 3);
    auto full = covest::hy_matrix(ctx);
    auto at_one = covest::hy_partial(ctx, 1.0);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l)
            CHECK(at_one(k, l) == doctest::Approx(full.matrix(k, l)).epsilon(1e-12));
}

TEST_CASE("running estimate is monotone in window inclusion") {
    // hy_partial(t) only admits windows that end by t, so it grows toward the
    // full value through nested subsets; check it never includes extra mass.
    auto a = equi_series("a", {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0});
    auto panel = build_panel({a});
    HyContext ctx(panel, Kernel::triangle(), 2);
    auto full = covest::hy_matrix(ctx);
    double prev = 0.0;
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
        double cur = covest::hy_partial(ctx, t)(0, 0);
        CHECK(cur >= prev - 1e-12);  // monotone increments here (all products positive)
        prev = cur;
    }
    CHECK(prev == doctest::Approx(full.matrix(0, 0)).epsilon(1e-12));
}

TEST_CASE("block decomposition partitions the full sum") {
    RngStream rng(7u, 0u, 0u);
    for (int trial = 0; trial < 5; ++trial) {
        auto panel = random_panel(rng, 2);
        HyContext ctx(panel, Kernel::triangle(), 3);
        auto full = covest::hy_matrix(ctx);
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t l = 0; l < 2; ++l) {
                // window-start time blocks [0,.3), [.3,.55), [.55,1+eps)
                double s = covest::hy_block(ctx, k, l, 0.0, 0.3) +
                           covest::hy_block(ctx, k, l, 0.3, 0.55) +
                           covest::hy_block(ctx, k, l, 0.55, 1.000001);
                CHECK(s == doctest::Approx(full.matrix(k, l)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("calibration divides the raw matrix in place") {
    auto a = equi_series("a", {0.0, 0.5, 1.0});
    auto b = equi_series("b", {0.0, 1.0, 2.0});
    auto panel = build_panel({a, b});
    auto est = covest::hy_matrix(panel, Kernel::triangle(), 2);
    Matrix raw_before = est.raw;

    Matrix div(2, 2, 1.0);
    div(0, 0) = 2.0;
    div(0, 1) = 0.5;
    div(1, 0) = 0.5;
    covest::apply_calibration(est, div);

    CHECK(est.calibrated);
    CHECK(est.matrix(0, 0) == doctest::Approx(raw_before(0, 0) / 2.0));
    CHECK(est.matrix(0, 1) == doctest::Approx(raw_before(0, 1) * 2.0));
    CHECK(est.matrix(1, 1) == doctest::Approx(raw_before(1, 1)));
    // raw is preserved
    CHECK(est.raw(0, 0) == doctest::Approx(raw_before(0, 0)));
    CHECK(est.calibration(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("estimates are symmetric and finite on irregular panels") {
    RngStream rng(2718u, 0u, 0u);
    for (int trial = 0; trial < 10; ++trial) {
        auto panel = random_panel(rng, 3);
        auto est = covest::hy_matrix(panel, Kernel::parabola(), 2);
        CHECK(est.matrix.max_abs_asymmetry() < 1e-12);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t l = 0; l < 3; ++l) CHECK(std::isfinite(est.matrix(k, l)));
    }
}
