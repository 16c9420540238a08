#include "covest/sim.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "covest/common.hpp"
#include "covest/hy.hpp"
#include "covest/threading.hpp"
#include "covest/variance.hpp"

namespace covest {

void SvModelParams::validate() const {
    if (N < 2) throw ValidationError("simulation grid needs at least 2 steps");
    if (!(gamma >= 0.0)) throw ValidationError("noise ratio gamma must be nonnegative");
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& a = assets[i];
        const std::string tag = "asset " + std::to_string(i + 1) + ": ";
        if (!(a.alpha < 0.0)) throw ValidationError(tag + "alpha must be negative");
        if (!(a.rho >= -1.0 && a.rho <= 1.0)) throw ValidationError(tag + "rho must be in [-1,1]");
        if (!std::isfinite(a.drift) || !std::isfinite(a.beta0) || !std::isfinite(a.beta1))
            throw ValidationError(tag + "non-finite parameter");
    }
}

Matrix SvPaths::integrated_cov() const {
    Matrix out(2, 2);
    const double dt = 1.0 / static_cast<double>(N);
    double v0 = 0.0, v1 = 0.0, cross = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        v0 += sq(sigma[0][j]);
        v1 += sq(sigma[1][j]);
        cross += sigma[0][j] * sigma[1][j];
    }
    const double c12 = std::sqrt(1.0 - sq(rho[0])) * std::sqrt(1.0 - sq(rho[1]));
    out(0, 0) = v0 * dt;
    out(1, 1) = v1 * dt;
    out(0, 1) = out(1, 0) = c12 * cross * dt;
    return out;
}

SvPaths simulate_sv(const SvModelParams& params, std::uint64_t seed, std::uint64_t rep) {
    params.validate();
    const std::size_t N = params.N;
    const double dt = 1.0 / static_cast<double>(N);
    const double sdt = std::sqrt(dt);

    RngStream shock1(seed, rep, StreamShock1);
    RngStream shock2(seed, rep, StreamShock2);
    RngStream common(seed, rep, StreamCommon);
    RngStream init(seed, rep, StreamInit);
    RngStream* shock[2] = {&shock1, &shock2};

    SvPaths out;
    out.N = N;
    double state[2];     // volatility factor
    double eou[2];       // exact one-step mean-reversion multiplier
    double sou[2];       // exact one-step innovation scale
    double wload[2];     // common-factor loading
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& a = params.assets[i];
        state[i] = init.normal() * std::sqrt(1.0 / (-2.0 * a.alpha));
        eou[i] = std::exp(a.alpha * dt);
        sou[i] = std::sqrt((std::exp(2.0 * a.alpha * dt) - 1.0) / (2.0 * a.alpha));
        wload[i] = std::sqrt(1.0 - sq(a.rho));
        out.rho[i] = a.rho;
        out.x[i].assign(N + 1, 0.0);
        out.sigma[i].assign(N + 1, 0.0);
        out.sigma[i][0] = std::exp(a.beta0 + a.beta1 * state[i]);
    }

    for (std::size_t j = 0; j < N; ++j) {
        const double w = common.normal();
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& a = params.assets[i];
            const double b = shock[i]->normal();
            const double sig = out.sigma[i][j];
            out.x[i][j + 1] = out.x[i][j] + a.drift * dt + sig * sdt * (a.rho * b + wload[i] * w);
            // the same innovation b moves the volatility factor, stepped
            // with its exact transition law
            state[i] = eou[i] * state[i] + sou[i] * b;
            out.sigma[i][j + 1] = std::exp(a.beta0 + a.beta1 * state[i]);
        }
    }
    return out;
}

SamplingScheme SamplingScheme::subset(std::size_t N, std::size_t n1, std::size_t n2) {
    SamplingScheme s;
    s.kind = Kind::Subset;
    s.N = N;
    s.n1 = n1;
    s.n2 = n2;
    s.validate();
    return s;
}

SamplingScheme SamplingScheme::shifted(std::size_t N, std::size_t n1) {
    SamplingScheme s;
    s.kind = Kind::Shifted;
    s.N = N;
    s.n1 = n1;
    s.validate();
    return s;
}

SamplingScheme SamplingScheme::poisson(std::size_t N, double lambda1, double lambda2) {
    SamplingScheme s;
    s.kind = Kind::Poisson;
    s.N = N;
    s.lambda1 = lambda1;
    s.lambda2 = lambda2;
    s.validate();
    return s;
}

void SamplingScheme::validate() const {
    if (N < 2) throw ValidationError("scheme grid size N must be at least 2");
    switch (kind) {
    case Kind::Subset:
        if (n1 < 2 || n2 < 2) throw ValidationError("subset counts must be at least 2");
        if (n1 > N || N % n1 != 0) throw ValidationError("subset: n1 must divide N");
        if (n2 > n1 || n1 % n2 != 0) throw ValidationError("subset: n2 must divide n1");
        break;
    case Kind::Shifted:
        if (n1 < 3) throw ValidationError("shifted count must be at least 3");
        if (n1 > N || N % n1 != 0) throw ValidationError("shifted: n1 must divide N");
        if (N / n1 < 2) throw ValidationError("shifted: stride N/n1 must be at least 2");
        break;
    case Kind::Poisson:
        if (!(lambda1 >= 1.0) || !(lambda2 >= 1.0))
            throw ValidationError("poisson mean waits must be at least 1 grid unit");
        break;
    }
}

std::string SamplingScheme::label() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::Subset:
        os << "subset(N=" << N << ",n1=" << n1 << ",n2=" << n2 << ")";
        break;
    case Kind::Shifted:
        os << "shifted(N=" << N << ",n1=" << n1 << ")";
        break;
    case Kind::Poisson:
        os << "poisson(N=" << N << ",lambda1=" << lambda1 << ",lambda2=" << lambda2 << ")";
        break;
    }
    return os.str();
}

namespace {

// Geometric waiting time with mean lambda grid units, support {1,2,...}.
std::size_t geometric_wait(RngStream& rng, double lambda) {
    const double p = 1.0 / lambda;
    if (p >= 1.0) return 1;
    const double u = rng.uniform(); // in (0,1], u = 1 maps to the shortest wait
    const double w = std::ceil(std::log(u) / std::log1p(-p));
    if (!(w >= 1.0)) return 1;
    if (w >= 1e15) return static_cast<std::size_t>(1e15);
    return static_cast<std::size_t>(w);
}

std::vector<std::size_t> poisson_indices(RngStream& rng, std::size_t N, double lambda) {
    std::vector<std::size_t> idx{0};
    std::size_t cur = 0;
    while (true) {
        cur += geometric_wait(rng, lambda);
        if (cur >= N) {
            idx.push_back(N);
            break;
        }
        idx.push_back(cur);
    }
    return idx;
}

} // namespace

Panel apply_scheme(const std::array<std::vector<double>, 2>& grid_values,
                   const SamplingScheme& scheme, std::uint64_t seed, std::uint64_t rep) {
    scheme.validate();
    for (std::size_t i = 0; i < 2; ++i) {
        if (grid_values[i].size() != scheme.N + 1)
            throw ValidationError("grid values for asset " + std::to_string(i + 1) +
                                  " must have N+1 points");
    }

    std::array<std::vector<std::size_t>, 2> idx;
    switch (scheme.kind) {
    case SamplingScheme::Kind::Subset: {
        const std::size_t s1 = scheme.N / scheme.n1;
        const std::size_t s2 = scheme.N / scheme.n2;
        for (std::size_t j = 0; j <= scheme.n1; ++j) idx[0].push_back(j * s1);
        for (std::size_t j = 0; j <= scheme.n2; ++j) idx[1].push_back(j * s2);
        break;
    }
    case SamplingScheme::Kind::Shifted: {
        const std::size_t s = scheme.N / scheme.n1;
        const std::size_t off = s / 2; // interior grid, never touches 0 or N
        for (std::size_t j = 0; j <= scheme.n1; ++j) idx[0].push_back(j * s);
        for (std::size_t j = 0; j < scheme.n1; ++j) idx[1].push_back(j * s + off);
        break;
    }
    case SamplingScheme::Kind::Poisson: {
        RngStream r1(seed, rep, StreamSample1);
        RngStream r2(seed, rep, StreamSample2);
        idx[0] = poisson_indices(r1, scheme.N, scheme.lambda1);
        idx[1] = poisson_indices(r2, scheme.N, scheme.lambda2);
        break;
    }
    }

    std::vector<TickSeries> series(2);
    const double invN = 1.0 / static_cast<double>(scheme.N);
    for (std::size_t i = 0; i < 2; ++i) {
        series[i].asset = "Y" + std::to_string(i + 1);
        series[i].times.reserve(idx[i].size());
        series[i].values.reserve(idx[i].size());
        for (const std::size_t j : idx[i]) {
            series[i].times.push_back(static_cast<double>(j) * invN);
            series[i].values.push_back(grid_values[i][j]);
        }
    }
    return build_panel(std::move(series));
}

std::vector<double> add_noise(const std::vector<double>& values,
                              const std::vector<double>& sigma_path_full, double gamma_ratio,
                              double ma_theta, RngStream& rng) {
    if (!(gamma_ratio >= 0.0)) throw ValidationError("noise ratio must be nonnegative");
    if (sigma_path_full.size() < 2) throw ValidationError("volatility path needs at least 2 points");

    // noise-to-signal convention: omega^2 = gamma^2 times the path-realized
    // variance of a one-step return, (grid average of sigma^2) / N, so that
    // gamma is the noise sd relative to the per-step return sd
    const auto N = static_cast<double>(sigma_path_full.size() - 1);
    double meansq = 0.0;
    for (std::size_t j = 1; j < sigma_path_full.size(); ++j) meansq += sq(sigma_path_full[j]);
    meansq /= N;
    const double omega = gamma_ratio * std::sqrt(meansq / N);

    std::vector<double> out = values;
    if (omega == 0.0) return out;
    if (ma_theta == 0.0) {
        for (double& v : out) v += omega * rng.normal();
        return out;
    }
    // tick-time MA(1), scaled so the marginal variance is still omega^2
    const double c = omega / std::sqrt(1.0 + sq(ma_theta));
    double prev = rng.normal();
    for (double& v : out) {
        const double e = rng.normal();
        v += c * (e + ma_theta * prev);
        prev = e;
    }
    return out;
}

std::string calibration_key(const SamplingScheme& scheme, double theta,
                            const std::string& kernel_name, KnRule rule) {
    std::ostringstream os;
    os << scheme.label() << "|theta=" << std::setprecision(10) << theta
       << "|kernel=" << kernel_name << "|kn=" << (rule == KnRule::Round ? "round" : "ceil");
    return os.str();
}

CalibrationTable calibrate(const SamplingScheme& scheme, double theta, const Kernel& kernel,
                           KnRule rule, std::size_t reps, double rho, std::uint64_t seed,
                           std::size_t threads, bool with_var_factors, double varpi, double eta) {
    scheme.validate();
    if (reps == 0) throw ValidationError("calibration needs at least one replication");
    if (!(rho >= -1.0 && rho <= 1.0) || rho == 0.0)
        throw ValidationError("calibration correlation must be nonzero and in [-1,1]");

    const std::size_t N = scheme.N;
    const double dt = 1.0 / static_cast<double>(N);
    const double sdt = std::sqrt(dt);
    const double ortho = std::sqrt(1.0 - sq(rho));

    std::vector<Matrix> raw(reps, Matrix(2, 2));
    std::vector<Matrix> vdiag(reps, Matrix(2, 2)); // per-entry variance estimates over sqrt(n)
    detail::parallel_for(reps, threads, [&](std::size_t rep) {
        RngStream z1(seed, rep, StreamCalib1);
        RngStream z2(seed, rep, StreamCalib2);
        std::array<std::vector<double>, 2> b;
        b[0].assign(N + 1, 0.0);
        b[1].assign(N + 1, 0.0);
        for (std::size_t j = 0; j < N; ++j) {
            const double a = z1.normal();
            const double c = z2.normal();
            b[0][j + 1] = b[0][j] + sdt * a;
            b[1][j + 1] = b[1][j] + sdt * (rho * a + ortho * c);
        }
        Panel panel = apply_scheme(b, scheme, seed, rep);
        const std::size_t kn = window_size(panel.n_total, theta, rule);
        HyContext ctx(panel, kernel, kn);
        raw[rep] = hy_matrix(ctx).raw;
        if (with_var_factors) {
            const VarianceTensor v = var_subsample(ctx, varpi, eta);
            const double sqn = std::sqrt(static_cast<double>(panel.n_total));
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l) vdiag[rep](k, l) = v.at(k, l, k, l) / sqn;
        }
    });

    CalibrationTable table;
    table.reps = reps;
    table.rho = rho;
    table.key = calibration_key(scheme, theta, kernel.name(), rule);
    table.factors = Matrix(2, 2);
    table.var_factors = Matrix(2, 2, 1.0);
    table.has_var_factors = with_var_factors;

    Matrix mean(2, 2);
    for (const Matrix& m : raw) mean += m;
    mean *= 1.0 / static_cast<double>(reps);

    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t l = 0; l < 2; ++l) {
            const double target = (k == l) ? 1.0 : rho;
            const double f = mean(k, l) / target;
            if (!(f > 0.0))
                throw NumericalError("calibration factor for entry (" + std::to_string(k + 1) +
                                     "," + std::to_string(l + 1) + ") is not positive");
            if (f < 0.5 || f > 1.5)
                table.warnings.push_back("calibration factor " + std::to_string(f) +
                                         " for entry (" + std::to_string(k + 1) + "," +
                                         std::to_string(l + 1) + ") is far from 1");
            table.factors(k, l) = f;
        }
    }

    if (with_var_factors) {
        for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t l = 0; l < 2; ++l) {
                double emp = 0.0;
                for (const Matrix& m : raw) emp += sq(m(k, l) - mean(k, l));
                double q = 1.0;
                if (reps >= 2 && emp > 0.0) {
                    emp /= static_cast<double>(reps - 1);
                    double mv = 0.0;
                    for (const Matrix& m : vdiag) mv += m(k, l);
                    mv /= static_cast<double>(reps);
                    q = mv / emp;
                }
                if (!(q > 0.05)) {
                    table.warnings.push_back("variance factor for entry (" + std::to_string(k + 1) +
                                             "," + std::to_string(l + 1) +
                                             ") degenerate, left at 1");
                    q = 1.0;
                }
                table.var_factors(k, l) = q;
            }
        }
    }
    return table;
}

} // namespace covest
