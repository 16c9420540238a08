// covest: covariation estimation from noisy non-synchronous tick data.
//
// Subcommands: estimate, simulate, mc, calibrate, kernel-constants.
// Exit codes: 0 success, 1 internal error, 2 usage, 3 data validation,
// 4 numerical failure. Structured output is JSON on stdout or --out;
// progress and warnings go to stderr.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covest/common.hpp"
#include "covest/config.hpp"
#include "covest/csv.hpp"
#include "covest/hy.hpp"
#include "covest/inference.hpp"
#include "covest/io.hpp"
#include "covest/kernel.hpp"
#include "covest/mc.hpp"
#include "covest/preavg.hpp"
#include "covest/sim.hpp"
#include "covest/variance.hpp"

namespace {

using namespace covest;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
}

// Divide the variance tensor by the calibration of the point estimate
// (and, when present and requested, the variance-estimator bias factors).
void adjust_variance_tensor(VarianceTensor& v, const CalibrationTable& table, bool use_var_factors) {
    const std::size_t d = v.d();
    if (table.factors.rows() != d)
        throw ValidationError("calibration table dimension does not match the panel");
    Matrix adj(d, d, 1.0);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t l = 0; l < d; ++l) {
            adj(k, l) = table.factors(k, l);
            if (use_var_factors && table.has_var_factors)
                adj(k, l) *= std::sqrt(table.var_factors(k, l));
        }
    }
    for (std::size_t a = 0; a < d * d; ++a) {
        const std::size_t ka = a % d, la = a / d;
        for (std::size_t b = 0; b < d * d; ++b) {
            const std::size_t kb = b % d, lb = b / d;
            v.at(ka, la, kb, lb) /= adj(ka, la) * adj(kb, lb);
        }
    }
}

struct CommonFlags {
    std::string config_path;
    std::string out_path;
};

struct EstimateArgs {
    std::string input;
    std::string calibration;
    std::size_t kn = 0;
    bool no_variance = false;
};

struct SchemeArgs {
    int scenario = 0; // 0 = none, otherwise 1..3 presets
    CLI::Option* opt_scheme = nullptr;
    CLI::Option* opt_theta = nullptr;
    CLI::Option* opt_kn_rule = nullptr;
};

// Scenario presets (the simulation study's three sampling designs). A
// preset also selects theta = 0.15 and the ceil window rule unless those
// flags were given explicitly.
void apply_scenario(RunConfig& cfg, const SchemeArgs& s) {
    if (s.scenario == 0) return;
    cfg.N = 23400;
    switch (s.scenario) {
    case 1:
        cfg.scheme = "subset";
        cfg.n1 = 4680;
        cfg.n2 = 2340;
        break;
    case 2:
        cfg.scheme = "shifted";
        cfg.n1 = 4680;
        break;
    case 3:
        cfg.scheme = "poisson";
        cfg.lambda1 = 5.0;
        cfg.lambda2 = 10.0;
        break;
    default:
        throw ValidationError("scenario must be 1, 2 or 3");
    }
    if (!s.opt_theta->count()) cfg.theta = 0.15;
    if (!s.opt_kn_rule->count()) cfg.kn_rule = "ceil";
}

std::string rep_file_name(std::size_t rep) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rep_%05zu.csv", rep);
    return buf;
}

// Simulation pipeline shared by `simulate` and the MC driver: sample the
// clean paths through the scheme, then overlay observation noise.
std::vector<TickSeries> noisy_panel_series(const SvPaths& paths, const SamplingScheme& scheme,
                                           const RunConfig& cfg, std::uint64_t seed,
                                           std::uint64_t rep) {
    Panel clean = apply_scheme(paths.x, scheme, seed, rep);
    std::vector<TickSeries> noisy = clean.series;
    for (std::size_t i = 0; i < 2; ++i) {
        RngStream rng(seed, rep, i == 0 ? StreamNoise1 : StreamNoise2);
        noisy[i].values = add_noise(noisy[i].values, paths.sigma[i], cfg.gamma, cfg.ma_theta, rng);
    }
    return noisy;
}

int run_estimate(const RunConfig& cfg, const CommonFlags& common, const EstimateArgs& args) {
    auto series = read_ticks_csv(args.input, cfg.normalize_time);
    Panel panel = build_panel(std::move(series));
    const Kernel& kernel = Kernel::by_name(cfg.kernel);

    const std::size_t kn =
        args.kn > 0 ? args.kn : window_size(panel.n_total, cfg.theta, cfg.kn_rule_enum());
    HyContext ctx(panel, kernel, kn);
    CovEstimate est = hy_matrix(ctx);

    std::vector<std::string> warnings = panel.warnings;
    CalibrationTable table;
    bool calibrated = false;
    if (!args.calibration.empty()) {
        table = load_calibration_file(args.calibration);
        apply_calibration(est, table.factors);
        calibrated = true;
        for (const auto& w : table.warnings) warnings.push_back("calibration: " + w);
    }

    VarianceTensor variance;
    bool have_variance = false;
    if (!args.no_variance) {
        switch (cfg.variance_enum()) {
        case VarianceMethod::Subsample:
            variance = var_subsample(ctx, cfg.varpi, cfg.eta);
            break;
        case VarianceMethod::Plugin: {
            TimeTransform tt = empirical_time_transform(panel, cfg.joint_tolerance);
            const double l_n = cfg.spot_window > 0.0
                                   ? cfg.spot_window
                                   : std::pow(static_cast<double>(panel.n_total), -1.0 / 3.0);
            variance = var_plugin(ctx, tt, l_n, cfg.u_points);
            break;
        }
        case VarianceMethod::Univariate: {
            if (panel.d() != 1)
                throw ValidationError("univariate variance needs a single-asset panel");
            variance = VarianceTensor(1, VarianceMethod::Univariate);
            variance.at(0, 0, 0, 0) = var_univariate(panel.series[0], kernel, kn, ctx.theta_eff());
            break;
        }
        }
        if (calibrated) adjust_variance_tensor(variance, table, cfg.adjust_variance);
        have_variance = true;
        for (const std::size_t a : variance.negative_diagonals())
            warnings.push_back("variance diagonal " + std::to_string(a) +
                               " is negative; intervals for it are refused");
    }

    ConfidenceRegion region;
    if (have_variance) region = confidence_region(est, variance, panel.n_total, cfg.ci_level);

    std::vector<std::string> assets;
    for (const auto& s : panel.series) assets.push_back(s.asset);
    emit(estimate_report_json(assets, est, panel.n_total, have_variance ? &variance : nullptr,
                              have_variance ? &region : nullptr, warnings),
         common.out_path);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int run_simulate(const RunConfig& cfg, const CommonFlags& common, std::uint64_t seed,
                 std::size_t reps) {
    if (common.out_path.empty())
        throw ValidationError("simulate requires --out DIR for the tick files");
    const SamplingScheme scheme = cfg.make_scheme();
    SvModelParams params;
    params.N = cfg.N;
    params.gamma = cfg.gamma;

    std::filesystem::create_directories(common.out_path);
    std::vector<std::string> files;
    std::vector<Matrix> truths;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const SvPaths paths = simulate_sv(params, seed, rep);
        const auto noisy = noisy_panel_series(paths, scheme, cfg, seed, rep);
        const std::string name = rep_file_name(rep);
        write_ticks_csv((std::filesystem::path(common.out_path) / name).string(), noisy);
        files.push_back(name);
        truths.push_back(paths.integrated_cov());
    }
    const std::string manifest =
        simulate_manifest_json(scheme.label(), seed, cfg.gamma, cfg.ma_theta, files, truths);
    write_text_file((std::filesystem::path(common.out_path) / "manifest.json").string(), manifest);
    std::cerr << "wrote " << reps << " replications to " << common.out_path << "\n";
    return 0;
}

int run_calibrate(const RunConfig& cfg, const CommonFlags& common, std::uint64_t seed) {
    const SamplingScheme scheme = cfg.make_scheme();
    const Kernel& kernel = Kernel::by_name(cfg.kernel);
    const CalibrationTable table =
        calibrate(scheme, cfg.theta, kernel, cfg.kn_rule_enum(), cfg.calib_reps, cfg.calib_rho,
                  seed, cfg.threads, true, cfg.varpi, cfg.eta);
    emit(calibration_json(table), common.out_path);
    for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int run_mc(const RunConfig& cfg, const CommonFlags& common, std::uint64_t seed, std::size_t reps,
           const std::string& calib_path, bool no_calibration) {
    const SamplingScheme scheme = cfg.make_scheme();
    const Kernel& kernel = Kernel::by_name(cfg.kernel);
    SvModelParams params;
    params.N = cfg.N;
    params.gamma = cfg.gamma;

    McTuning tuning;
    tuning.theta = cfg.theta;
    tuning.kn_rule = cfg.kn_rule_enum();
    tuning.varpi = cfg.varpi;
    tuning.eta = cfg.eta;
    tuning.ci_level = cfg.ci_level;
    tuning.ma_theta = cfg.ma_theta;
    tuning.threads = cfg.threads;
    tuning.adjust_variance = cfg.adjust_variance;

    CalibrationTable table;
    const CalibrationTable* calib = nullptr;
    if (!calib_path.empty()) {
        table = load_calibration_file(calib_path);
        calib = &table;
    } else if (!no_calibration) {
        std::cerr << "calibrating (" << cfg.calib_reps << " replications)...\n";
        // same seed is safe: calibration draws from its own streams
        table = calibrate(scheme, cfg.theta, kernel, tuning.kn_rule, cfg.calib_reps, cfg.calib_rho,
                          seed, cfg.threads, true, cfg.varpi, cfg.eta);
        calib = &table;
    }

    const McReport report = covest::run_mc(scheme, params, kernel, tuning, reps, seed, calib);
    emit(mc_report_json(report), common.out_path);
    std::cerr << "mc: " << report.reps << " reps, " << report.failures << " failures, "
              << report.runtime_seconds << "s\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariation estimation for noisy, non-synchronously observed tick data"};
    app.require_subcommand(1);

    CommonFlags common;
    app.add_option("--config", common.config_path, "JSON config file (flags override its values)");

    RunConfig defaults; // only for CLI11 default strings

    // --- estimate ---
    auto* est_cmd = app.add_subcommand("estimate", "Estimate the covariation matrix from tick CSV");
    EstimateArgs est_args;
    est_cmd->add_option("--input", est_args.input, "long-format CSV: asset,time,value")->required();
    est_cmd->add_option("--out", common.out_path, "write JSON here instead of stdout");
    auto* est_theta = est_cmd->add_option("--theta", defaults.theta, "pre-averaging scale");
    auto* est_rule = est_cmd->add_option("--kn-rule", defaults.kn_rule, "window rounding: round|ceil")
                         ->check(CLI::IsMember({"round", "ceil"}));
    auto* est_kernel = est_cmd->add_option("--kernel", defaults.kernel, "weight function name");
    est_cmd->add_option("--kn", est_args.kn, "explicit window size (overrides --theta)");
    auto* est_var =
        est_cmd->add_option("--variance", defaults.variance, "subsample|plugin|univariate")
            ->check(CLI::IsMember({"subsample", "plugin", "univariate"}));
    est_cmd->add_flag("--no-variance", est_args.no_variance, "skip variance estimation");
    auto* est_varpi = est_cmd->add_option("--varpi", defaults.varpi, "subsample block scale");
    auto* est_eta = est_cmd->add_option("--eta", defaults.eta, "subsample block exponent");
    auto* est_spot =
        est_cmd->add_option("--spot-window", defaults.spot_window, "plug-in spot bandwidth, 0=auto");
    auto* est_upoints = est_cmd->add_option("--u-points", defaults.u_points, "plug-in time grid");
    auto* est_level = est_cmd->add_option("--level", defaults.ci_level, "confidence level");
    auto* est_norm =
        est_cmd->add_flag("--normalize-time", defaults.normalize_time, "rescale times to [0,1]");
    auto* est_jtol = est_cmd->add_option("--joint-tolerance", defaults.joint_tolerance,
                                         "time tolerance for joint points");
    est_cmd->add_option("--calibration", est_args.calibration, "calibration table JSON");

    auto add_scheme_flags = [&defaults](CLI::App* cmd, SchemeArgs& s) {
        s.opt_scheme = cmd->add_option("--scheme", defaults.scheme, "subset|shifted|poisson")
                           ->check(CLI::IsMember({"subset", "shifted", "poisson"}));
        cmd->add_option("--N", defaults.N, "simulation grid steps");
        cmd->add_option("--n1", defaults.n1, "asset 1 interval count");
        cmd->add_option("--n2", defaults.n2, "asset 2 interval count (subset)");
        cmd->add_option("--lambda1", defaults.lambda1, "asset 1 mean wait (poisson)");
        cmd->add_option("--lambda2", defaults.lambda2, "asset 2 mean wait (poisson)");
        auto* sc = cmd->add_option("--scenario", s.scenario,
                                   "preset 1=subset 2=shifted 3=poisson (sets theta/kn-rule too)")
                       ->check(CLI::Range(1, 3));
        sc->excludes(s.opt_scheme);
        cmd->add_option("--gamma", defaults.gamma, "noise-to-signal ratio");
        cmd->add_option("--ma-theta", defaults.ma_theta, "tick-time MA(1) noise coefficient");
        s.opt_theta = cmd->add_option("--theta", defaults.theta, "pre-averaging scale");
        s.opt_kn_rule = cmd->add_option("--kn-rule", defaults.kn_rule, "round|ceil")
                            ->check(CLI::IsMember({"round", "ceil"}));
        cmd->add_option("--kernel", defaults.kernel, "weight function name");
        cmd->add_option("--threads", defaults.threads, "worker cap (results unaffected)");
    };

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand("simulate", "Write simulated tick CSVs plus a manifest");
    SchemeArgs sim_scheme;
    std::uint64_t sim_seed = 0;
    std::size_t sim_reps = 1;
    add_scheme_flags(sim_cmd, sim_scheme);
    sim_cmd->add_option("--seed", sim_seed, "RNG seed")->required();
    sim_cmd->add_option("--reps", sim_reps, "number of replications");
    sim_cmd->add_option("--out", common.out_path, "output directory")->required();

    // --- mc ---
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study of bias, RMSE and coverage");
    SchemeArgs mc_scheme;
    std::uint64_t mc_seed = 0;
    std::size_t mc_reps = 0;
    std::string mc_calib_path;
    bool mc_no_calib = false;
    add_scheme_flags(mc_cmd, mc_scheme);
    mc_cmd->add_option("--seed", mc_seed, "RNG seed")->required();
    mc_cmd->add_option("--reps", mc_reps, "number of replications")->required();
    auto* mc_calib_opt =
        mc_cmd->add_option("--calibration", mc_calib_path, "calibration table JSON");
    mc_cmd->add_flag("--no-calibration", mc_no_calib, "run on raw estimates")
        ->excludes(mc_calib_opt);
    auto* mc_creps = mc_cmd->add_option("--calib-reps", defaults.calib_reps,
                                        "replications for the built-in calibration");
    auto* mc_varpi = mc_cmd->add_option("--varpi", defaults.varpi, "subsample block scale");
    auto* mc_eta = mc_cmd->add_option("--eta", defaults.eta, "subsample block exponent");
    auto* mc_level = mc_cmd->add_option("--level", defaults.ci_level, "confidence level");
    bool mc_no_adjust = false;
    mc_cmd->add_flag("--no-adjust-variance", mc_no_adjust,
                     "do not rescale the variance estimator by calibration factors");
    mc_cmd->add_option("--out", common.out_path, "write JSON here instead of stdout");

    // --- calibrate ---
    auto* cal_cmd = app.add_subcommand("calibrate", "Estimate finite-sample bias factors");
    SchemeArgs cal_scheme;
    std::uint64_t cal_seed = 0;
    add_scheme_flags(cal_cmd, cal_scheme);
    cal_cmd->add_option("--seed", cal_seed, "RNG seed")->required();
    auto* cal_reps = cal_cmd->add_option("--reps", defaults.calib_reps, "replications");
    auto* cal_rho = cal_cmd->add_option("--rho", defaults.calib_rho, "known correlation of the pair");
    auto* cal_varpi = cal_cmd->add_option("--varpi", defaults.varpi, "subsample block scale");
    auto* cal_eta = cal_cmd->add_option("--eta", defaults.eta, "subsample block exponent");
    cal_cmd->add_option("--out", common.out_path, "write JSON here instead of stdout");

    // --- kernel-constants ---
    auto* kc_cmd = app.add_subcommand("kernel-constants", "Print a kernel's derived constants");
    auto* kc_kernel = kc_cmd->add_option("--kernel", defaults.kernel, "weight function name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!common.config_path.empty()) cfg = covest::load_config_file(common.config_path);

        // flags override the config; CLI11 already wrote parsed values
        // into `defaults`, we copy only the ones actually given
        auto take_d = [&](CLI::Option* opt, double& dst, double src) {
            if (opt && opt->count()) dst = src;
        };
        auto take_s = [&](CLI::Option* opt, std::string& dst, const std::string& src) {
            if (opt && opt->count()) dst = src;
        };
        auto take_z = [&](CLI::Option* opt, std::size_t& dst, std::size_t src) {
            if (opt && opt->count()) dst = src;
        };

        if (app.got_subcommand(est_cmd)) {
            take_d(est_theta, cfg.theta, defaults.theta);
            take_s(est_rule, cfg.kn_rule, defaults.kn_rule);
            take_s(est_kernel, cfg.kernel, defaults.kernel);
            take_s(est_var, cfg.variance, defaults.variance);
            take_d(est_varpi, cfg.varpi, defaults.varpi);
            take_d(est_eta, cfg.eta, defaults.eta);
            take_d(est_spot, cfg.spot_window, defaults.spot_window);
            take_z(est_upoints, cfg.u_points, defaults.u_points);
            take_d(est_level, cfg.ci_level, defaults.ci_level);
            if (est_norm->count()) cfg.normalize_time = defaults.normalize_time;
            take_d(est_jtol, cfg.joint_tolerance, defaults.joint_tolerance);
            cfg.validate();
            return run_estimate(cfg, common, est_args);
        }

        auto take_scheme = [&](CLI::App* cmd, SchemeArgs& s) {
            take_s(s.opt_scheme, cfg.scheme, defaults.scheme);
            take_z(cmd->get_option("--N"), cfg.N, defaults.N);
            take_z(cmd->get_option("--n1"), cfg.n1, defaults.n1);
            take_z(cmd->get_option("--n2"), cfg.n2, defaults.n2);
            take_d(cmd->get_option("--lambda1"), cfg.lambda1, defaults.lambda1);
            take_d(cmd->get_option("--lambda2"), cfg.lambda2, defaults.lambda2);
            take_d(cmd->get_option("--gamma"), cfg.gamma, defaults.gamma);
            take_d(cmd->get_option("--ma-theta"), cfg.ma_theta, defaults.ma_theta);
            take_d(s.opt_theta, cfg.theta, defaults.theta);
            take_s(s.opt_kn_rule, cfg.kn_rule, defaults.kn_rule);
            take_s(cmd->get_option("--kernel"), cfg.kernel, defaults.kernel);
            take_z(cmd->get_option("--threads"), cfg.threads, defaults.threads);
            apply_scenario(cfg, s);
        };

        if (app.got_subcommand(sim_cmd)) {
            take_scheme(sim_cmd, sim_scheme);
            cfg.validate();
            return run_simulate(cfg, common, sim_seed, sim_reps);
        }
        if (app.got_subcommand(mc_cmd)) {
            take_scheme(mc_cmd, mc_scheme);
            take_z(mc_creps, cfg.calib_reps, defaults.calib_reps);
            take_d(mc_varpi, cfg.varpi, defaults.varpi);
            take_d(mc_eta, cfg.eta, defaults.eta);
            take_d(mc_level, cfg.ci_level, defaults.ci_level);
            if (mc_no_adjust) cfg.adjust_variance = false;
            cfg.validate();
            return run_mc(cfg, common, mc_seed, mc_reps, mc_calib_path, mc_no_calib);
        }
        if (app.got_subcommand(cal_cmd)) {
            take_scheme(cal_cmd, cal_scheme);
            take_z(cal_reps, cfg.calib_reps, defaults.calib_reps);
            take_d(cal_rho, cfg.calib_rho, defaults.calib_rho);
            take_d(cal_varpi, cfg.varpi, defaults.varpi);
            take_d(cal_eta, cfg.eta, defaults.eta);
            cfg.validate();
            return run_calibrate(cfg, common, cal_seed);
        }
        if (app.got_subcommand(kc_cmd)) {
            take_s(kc_kernel, cfg.kernel, defaults.kernel);
            emit(covest::kernel_constants_json(Kernel::by_name(cfg.kernel)), common.out_path);
            return 0;
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const covest::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const covest::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
