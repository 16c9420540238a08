#include "covest/mc.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>

#include "covest/common.hpp"
#include "covest/hy.hpp"
#include "covest/inference.hpp"
#include "covest/stats.hpp"
#include "covest/threading.hpp"
#include "covest/variance.hpp"

namespace covest {

namespace {

struct RepResult {
    bool ok = false;
    Matrix est_raw{2, 2};
    Matrix est_cal{2, 2};
    Matrix truth{2, 2};
    Matrix z{2, 2};       // standardized per-entry statistics
    Matrix covered{2, 2}; // 1 when the marginal CI contains the truth
    double n = 0.0;
    double kn = 0.0;
};

} // namespace

McReport run_mc(const SamplingScheme& scheme, const SvModelParams& params, const Kernel& kernel,
                const McTuning& tuning, std::size_t reps, std::uint64_t seed,
                const CalibrationTable* calib) {
    scheme.validate();
    params.validate();
    if (scheme.N != params.N)
        throw ValidationError("monte carlo: scheme grid N=" + std::to_string(scheme.N) +
                              " does not match model grid N=" + std::to_string(params.N));
    if (reps == 0) throw ValidationError("monte carlo needs at least one replication");
    if (!(tuning.ci_level >= 0.0 && tuning.ci_level < 1.0))
        throw ValidationError("ci level must be in [0,1)");
    if (!(tuning.theta > 0.0)) throw ValidationError("monte carlo: theta must be positive");
    if (!(tuning.eta > 0.5 && tuning.eta < 2.0 / 3.0))
        throw ValidationError("monte carlo: eta must lie in (1/2, 2/3)");
    if (!(tuning.varpi > 0.0)) throw ValidationError("monte carlo: varpi must be positive");
    if (calib) {
        const std::string want = calibration_key(scheme, tuning.theta, kernel.name(), tuning.kn_rule);
        if (calib->key != want)
            throw ValidationError("calibration table key '" + calib->key +
                                  "' does not match this run '" + want + "'");
    }

    const auto start = std::chrono::steady_clock::now();
    const double zcrit = tuning.ci_level > 0.0 ? normal_quantile(0.5 + 0.5 * tuning.ci_level) : 0.0;

    std::vector<RepResult> results(reps);
    std::mutex fail_mtx;
    std::vector<std::string> fail_msgs;

    detail::parallel_for(reps, tuning.threads, [&](std::size_t rep) {
        RepResult& r = results[rep];
        try {
            const SvPaths paths = simulate_sv(params, seed, rep);
            Panel clean = apply_scheme(paths.x, scheme, seed, rep);

            std::vector<TickSeries> noisy = clean.series;
            for (std::size_t i = 0; i < 2; ++i) {
                RngStream nrng(seed, rep, i == 0 ? StreamNoise1 : StreamNoise2);
                noisy[i].values =
                    add_noise(noisy[i].values, paths.sigma[i], params.gamma, tuning.ma_theta, nrng);
            }
            Panel panel = build_panel(std::move(noisy));

            const std::size_t n = panel.n_total;
            const std::size_t kn = window_size(n, tuning.theta, tuning.kn_rule);
            HyContext ctx(panel, kernel, kn);
            CovEstimate est = hy_matrix(ctx);
            r.est_raw = est.raw;
            if (calib) apply_calibration(est, calib->factors);
            r.est_cal = est.matrix;
            r.truth = paths.integrated_cov();

            VarianceTensor v = var_subsample(ctx, tuning.varpi, tuning.eta);
            // fold in the calibration of the point estimate and, when
            // available, the variance-estimator bias factors
            Matrix adj(2, 2, 1.0);
            if (calib) {
                for (std::size_t k = 0; k < 2; ++k) {
                    for (std::size_t l = 0; l < 2; ++l) {
                        adj(k, l) = calib->factors(k, l);
                        if (tuning.adjust_variance && calib->has_var_factors)
                            adj(k, l) *= std::sqrt(calib->var_factors(k, l));
                    }
                }
            }
            for (std::size_t a = 0; a < 4; ++a) {
                const std::size_t ka = a % 2, la = a / 2;
                for (std::size_t b = 0; b < 4; ++b) {
                    const std::size_t kb = b % 2, lb = b / 2;
                    v.at(ka, la, kb, lb) /= adj(ka, la) * adj(kb, lb);
                }
            }

            const double n4 = std::pow(static_cast<double>(n), 0.25);
            for (std::size_t k = 0; k < 2; ++k) {
                for (std::size_t l = 0; l < 2; ++l) {
                    const double vd = v.at(k, l, k, l);
                    if (!(vd > 0.0))
                        throw NumericalError("non-positive variance for entry (" +
                                             std::to_string(k + 1) + "," + std::to_string(l + 1) +
                                             ")");
                    const double sd = std::sqrt(vd) / n4;
                    r.z(k, l) = (r.est_cal(k, l) - r.truth(k, l)) / sd;
                    r.covered(k, l) =
                        std::abs(r.est_cal(k, l) - r.truth(k, l)) <= zcrit * sd ? 1.0 : 0.0;
                }
            }
            r.n = static_cast<double>(n);
            r.kn = static_cast<double>(kn);
            r.ok = true;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(fail_mtx);
            if (fail_msgs.size() < 5)
                fail_msgs.push_back("rep " + std::to_string(rep) + ": " + e.what());
        }
    });

    McReport report;
    report.reps = reps;
    report.scheme_label = scheme.label();
    report.calibration_key = calib ? calib->key : "";
    report.ci_level = tuning.ci_level;
    report.failure_messages = std::move(fail_msgs);

    std::size_t ok = 0;
    for (const RepResult& r : results)
        if (r.ok) ++ok;
    report.failures = reps - ok;
    if (report.failures * 100 > reps) {
        std::string detail = report.failure_messages.empty() ? std::string("no message")
                                                             : report.failure_messages.front();
        throw NumericalError("monte carlo aborted: " + std::to_string(report.failures) + " of " +
                             std::to_string(reps) + " replications failed (" + detail + ")");
    }
    if (ok == 0) throw NumericalError("monte carlo produced no successful replications");

    for (const RepResult& r : results) {
        if (!r.ok) continue;
        report.mean_n += r.n;
        report.mean_kn += r.kn;
    }
    report.mean_n /= static_cast<double>(ok);
    report.mean_kn /= static_cast<double>(ok);

    const std::size_t pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (const auto& p : pairs) {
        const std::size_t k = p[0], l = p[1];
        McEntryStats s;
        s.k = k;
        s.l = l;
        double zsum = 0.0, zsq = 0.0;
        for (const RepResult& r : results) {
            if (!r.ok) continue;
            s.rel_bias += r.est_cal(k, l) / r.truth(k, l);
            s.rmse += sq(r.est_cal(k, l) - r.truth(k, l));
            s.rel_bias_raw += r.est_raw(k, l) / r.truth(k, l);
            s.rmse_raw += sq(r.est_raw(k, l) - r.truth(k, l));
            s.coverage += r.covered(k, l);
            zsum += r.z(k, l);
            zsq += sq(r.z(k, l));
        }
        const double m = static_cast<double>(ok);
        s.rel_bias /= m;
        s.rmse = std::sqrt(s.rmse / m);
        s.rel_bias_raw /= m;
        s.rmse_raw = std::sqrt(s.rmse_raw / m);
        s.coverage /= m;
        s.mean_std = zsum / m;
        s.var_std = ok > 1 ? (zsq - m * sq(s.mean_std)) / (m - 1.0) : 0.0;
        report.entries.push_back(s);
    }

    report.std_samples.reserve(ok);
    report.hist_counts.assign(report.hist_bins, 0);
    const double width = (report.hist_hi - report.hist_lo) / static_cast<double>(report.hist_bins);
    for (const RepResult& r : results) {
        if (!r.ok) continue;
        const double z = r.z(0, 1);
        report.std_samples.push_back(z);
        if (z >= report.hist_lo && z < report.hist_hi) {
            auto bin = static_cast<std::size_t>((z - report.hist_lo) / width);
            if (bin >= report.hist_bins) bin = report.hist_bins - 1;
            ++report.hist_counts[bin];
        }
    }

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace covest
