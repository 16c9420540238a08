#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "covest/grids.hpp"
#include "covest/hy.hpp"
#include "covest/kernel.hpp"
#include "covest/preavg.hpp"
#include "covest/rng.hpp"

namespace {

using namespace covest;

// Two noisy random walks on interleaved grids, n and n/2 intervals.
Panel make_panel(std::size_t n) {
    RngStream rng(1234, 0, 0);
    std::vector<TickSeries> series;
    for (int a = 0; a < 2; ++a) {
        const std::size_t nk = a == 0 ? n : n / 2;
        std::vector<double> times(nk + 1), values(nk + 1);
        double w = 0.0;
        const double dt = 1.0 / static_cast<double>(nk);
        for (std::size_t i = 0; i <= nk; ++i) {
            times[i] = (static_cast<double>(i) + (a == 0 ? 0.0 : 0.31)) * dt;
            if (times[i] > 1.0) times[i] = 1.0;
            w += std::sqrt(dt) * rng.normal();
            values[i] = w + 0.01 * rng.normal();
        }
        series.push_back({a == 0 ? "a" : "b", times, values});
    }
    return build_panel(series);
}

void bm_hy_fast(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = make_panel(n);
    const std::size_t kn = window_size(panel.n_total, 0.15, KnRule::Ceil);
    for (auto _ : state) {
        CovEstimate est = hy_matrix(panel, tri, kn);
        benchmark::DoNotOptimize(est.matrix(0, 1));
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(bm_hy_fast)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void bm_hy_naive(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = make_panel(n);
    const std::size_t kn = window_size(panel.n_total, 0.15, KnRule::Ceil);
    for (auto _ : state) {
        CovEstimate est = hy_naive_oracle(panel, tri, kn);
        benchmark::DoNotOptimize(est.matrix(0, 1));
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(bm_hy_naive)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void bm_hy_context_reuse(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = make_panel(n);
    const std::size_t kn = window_size(panel.n_total, 0.15, KnRule::Ceil);
    HyContext ctx(panel, tri, kn);
    for (auto _ : state) {
        CovEstimate est = hy_matrix(ctx);
        benchmark::DoNotOptimize(est.matrix(0, 1));
    }
}
BENCHMARK(bm_hy_context_reuse)->Arg(4096)->Arg(16384);

} // namespace
