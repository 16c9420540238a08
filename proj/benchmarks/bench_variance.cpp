#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "covest/grids.hpp"
#include "covest/hy.hpp"
#include "covest/kernel.hpp"
#include "covest/preavg.hpp"
#include "covest/rng.hpp"
#include "covest/variance.hpp"

namespace {

using namespace covest;

Panel noisy_diffusion(std::size_t n) {
    RngStream rng(77, 0, 0);
    std::vector<double> times(n + 1), values(n + 1);
    const double dt = 1.0 / static_cast<double>(n);
    double w = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        times[i] = static_cast<double>(i) * dt;
        w += std::sqrt(dt) * rng.normal();
        values[i] = w + 0.1 * rng.normal();
    }
    return build_panel({{"a", times, values}});
}

void bm_var_subsample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = noisy_diffusion(n);
    const std::size_t kn = window_size(n, 0.24, KnRule::Round);
    HyContext ctx(panel, tri, kn);
    for (auto _ : state) {
        VarianceTensor v = var_subsample(ctx);
        benchmark::DoNotOptimize(v.at(0, 0, 0, 0));
    }
}
BENCHMARK(bm_var_subsample)->Arg(4000)->Arg(10000)->Arg(40000);

void bm_var_plugin(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const std::size_t u_points = static_cast<std::size_t>(state.range(1));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = noisy_diffusion(n);
    const std::size_t kn = window_size(n, 0.24, KnRule::Round);
    HyContext ctx(panel, tri, kn);
    TimeTransform tt = empirical_time_transform(panel);
    const double l_n = std::pow(static_cast<double>(n), -1.0 / 3.0);
    for (auto _ : state) {
        VarianceTensor v = var_plugin(ctx, tt, l_n, u_points);
        benchmark::DoNotOptimize(v.at(0, 0, 0, 0));
    }
}
BENCHMARK(bm_var_plugin)->Args({4000, 21})->Args({4000, 101})->Args({10000, 101});

void bm_var_univariate(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = noisy_diffusion(n);
    const std::size_t kn = window_size(n, 0.24, KnRule::Round);
    for (auto _ : state) {
        double v = var_univariate(panel.series[0], tri, kn, 0.24);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(bm_var_univariate)->Arg(10000)->Arg(40000);

void bm_spot_vol(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Kernel& tri = Kernel::by_name("triangle");
    Panel panel = noisy_diffusion(n);
    const std::size_t kn = window_size(n, 0.24, KnRule::Round);
    HyContext ctx(panel, tri, kn);
    const double l_n = std::pow(static_cast<double>(n), -1.0 / 3.0);
    for (auto _ : state) {
        SpotVol sv = spot_vol(ctx, l_n);
        benchmark::DoNotOptimize(sv.values);
    }
}
BENCHMARK(bm_spot_vol)->Arg(10000);

} // namespace
