#include <benchmark/benchmark.h>

#include <cstdint>

#include "covest/grids.hpp"
#include "covest/hy.hpp"
#include "covest/inference.hpp"
#include "covest/kernel.hpp"
#include "covest/preavg.hpp"
#include "covest/rng.hpp"
#include "covest/sim.hpp"
#include "covest/variance.hpp"

namespace {

using namespace covest;

// One full study replication: simulate the bivariate SV model, sample it
// through the scheme, add noise, estimate, and attach the subsampled
// variance plus marginal intervals.
void bm_scenario_rep(benchmark::State& state) {
    const SamplingScheme scheme = state.range(0) == 0
                                      ? SamplingScheme::subset(23400, 4680, 2340)
                                      : SamplingScheme::shifted(23400, 4680);
    const Kernel& tri = Kernel::by_name("triangle");
    SvModelParams params;
    std::uint64_t rep = 0;
    for (auto _ : state) {
        SvPaths paths = simulate_sv(params, 99, rep);
        Panel panel = apply_scheme({paths.x[0], paths.x[1]}, scheme, 99, rep);
        RngStream noise_rng(99, rep, 7);
        for (std::size_t k = 0; k < panel.d(); ++k)
            panel.series[k].values = add_noise(panel.series[k].values, paths.sigma[k],
                                               params.gamma, 0.0, noise_rng);
        const std::size_t kn = window_size(panel.n_total, 0.15, KnRule::Ceil);
        HyContext ctx(panel, tri, kn);
        CovEstimate est = hy_matrix(ctx);
        VarianceTensor v = var_subsample(ctx);
        ConfidenceRegion region = confidence_region(est, v, panel.n_total, 0.95);
        benchmark::DoNotOptimize(region.intervals.size());
        ++rep;
    }
}
BENCHMARK(bm_scenario_rep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_simulate_paths(benchmark::State& state) {
    SvModelParams params;
    params.N = static_cast<std::size_t>(state.range(0));
    std::uint64_t rep = 0;
    for (auto _ : state) {
        SvPaths paths = simulate_sv(params, 5, rep++);
        benchmark::DoNotOptimize(paths.x[0].back());
    }
}
BENCHMARK(bm_simulate_paths)->Arg(23400)->Unit(benchmark::kMillisecond);

void bm_calibration_rep(benchmark::State& state) {
    const SamplingScheme scheme = SamplingScheme::shifted(23400, 4680);
    const Kernel& tri = Kernel::by_name("triangle");
    std::uint64_t seed = 3;
    for (auto _ : state) {
        CalibrationTable table =
            calibrate(scheme, 0.15, tri, KnRule::Ceil, 10, 1.0, seed++, 1, false);
        benchmark::DoNotOptimize(table.factors(0, 1));
    }
}
BENCHMARK(bm_calibration_rep)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
