#include "covest/variance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "covest/common.hpp"
#include "covest/quadrature.hpp"

namespace covest {

NoiseCov noise_cov(const Panel& panel, const TimeTransform& tt) {
    const std::size_t d = panel.d();
    if (tt.d() != d) throw ValidationError("noise_cov: panel/transform dimension mismatch");
    NoiseCov nc;
    nc.psi = Matrix(d, d);
    nc.n_joint = Matrix(d, d);
    nc.zero_flag = Matrix(d, d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
            const JointGrid& g = tt.joint(k, l);
            nc.n_joint(k, l) = static_cast<double>(g.n_kl);
            if (g.n_kl == 0) {
                nc.zero_flag(k, l) = 1.0;
                continue;
            }
            const auto& yk = panel.series[k].values;
            const auto& yl = panel.series[l].values;
            const std::size_t nl = panel.series[l].n();
            double sum = 0.0;
            for (std::size_t p = 0; p < g.times.size(); ++p) {
                std::size_t ik = g.idx_k[p];
                std::size_t il = g.idx_l[p];
                // backward increment on the k leg, forward on the l leg;
                // joint points whose increments fall off the grid are skipped
                if (ik == 0 || il + 1 > nl) continue;
                sum += (yk[ik] - yk[ik - 1]) * (yl[il + 1] - yl[il]);
            }
            nc.psi(k, l) = -sum / static_cast<double>(g.n_kl);
        }
    return nc;
}

SpotVol spot_vol(const HyContext& ctx, double l_n, std::size_t points) {
    if (!(l_n > 0.0 && l_n < 1.0)) throw ValidationError("spot_vol: l_n must lie in (0,1)");
    if (points < 2) throw ValidationError("spot_vol: need at least 2 evaluation points");
    const std::size_t d = ctx.panel().d();

    SpotVol sv;
    sv.l_n = l_n;
    double scale = std::sqrt(static_cast<double>(ctx.panel().n_total)) * l_n;
    if (scale < 5.0)
        sv.warning = "sqrt(n)*l_n = " + std::to_string(scale) +
                     " is small; spot covariation estimates will be noisy";

    std::map<double, Matrix> cache;
    auto partial = [&](double t) -> const Matrix& {
        if (t > 1.0) t = 1.0;
        auto it = cache.find(t);
        if (it == cache.end()) it = cache.emplace(t, hy_partial(ctx, t)).first;
        return it->second;
    };

    Matrix zero(d, d);
    for (std::size_t i = 0; i < points; ++i) {
        double s = static_cast<double>(i) / static_cast<double>(points - 1);
        double hi = std::max(s, l_n);
        double lo = hi - l_n;
        Matrix m = partial(hi) - (lo > 0.0 ? partial(lo) : zero);
        m *= 1.0 / l_n;
        sv.times.push_back(s);
        sv.values.push_back(std::move(m));
    }
    return sv;
}

SpotVol spot_vol(const Panel& panel, const Kernel& kernel, std::size_t k_n, double l_n) {
    HyContext ctx(panel, kernel, k_n);
    return spot_vol(ctx, l_n);
}

std::vector<std::size_t> VarianceTensor::negative_diagonals() const {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < vhat_.rows(); ++a)
        if (vhat_(a, a) < 0.0) out.push_back(a);
    return out;
}

VarianceTensor var_subsample(const HyContext& ctx, double varpi, double eta, bool enforce_eta) {
    if (!(varpi > 0.0)) throw ValidationError("var_subsample: varpi must be positive");
    if (enforce_eta && !(eta > 0.5 && eta < 2.0 / 3.0))
        throw ValidationError("var_subsample: eta must lie in (1/2, 2/3)");
    if (!(eta > 0.0 && eta < 1.0)) throw ValidationError("var_subsample: eta must lie in (0,1)");

    const double n = static_cast<double>(ctx.panel().n_total);
    const std::size_t d = ctx.panel().d();
    double beta = std::floor(varpi * std::pow(n, eta) + 0.5);
    if (beta < 1.0) beta = 1.0;
    const std::size_t blocks = static_cast<std::size_t>(std::floor(n / beta));
    if (blocks < 3)
        throw NumericalError("var_subsample: only " + std::to_string(blocks) +
                             " blocks available (need at least 3); decrease eta or varpi");

    const double width = beta / n; // block alpha covers [alpha*width, (alpha+1)*width)
    std::vector<std::vector<double>> B(d * d, std::vector<double>(blocks, 0.0));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
            auto ranges = ctx.pair_ranges(k, l);
            const auto& ak = ctx.asset(k);
            const auto& al = ctx.asset(l);
            auto& Bkl = B[l * d + k];
            for (std::size_t i = 0; i < ak.ybar.size(); ++i) {
                std::size_t alpha = static_cast<std::size_t>(ak.wstart[i] / width);
                if (alpha >= blocks) continue;
                Bkl[alpha] +=
                    ak.ybar[i] * (al.prefix[ranges.hi[i]] - al.prefix[ranges.lo[i]]);
            }
            for (auto& v : Bkl) v *= ctx.norm();
        }

    VarianceTensor V(d, VarianceMethod::Subsample);
    const double scale = 0.5 * std::sqrt(n);
    for (std::size_t a = 0; a < d * d; ++a)
        for (std::size_t b = a; b < d * d; ++b) {
            double s = 0.0;
            for (std::size_t al = 1; al < blocks; ++al)
                s += 2.0 * B[a][al] * B[b][al] - B[a][al] * B[b][al - 1] -
                     B[a][al - 1] * B[b][al];
            s *= scale;
            V.vec_matrix()(a, b) = s;
            V.vec_matrix()(b, a) = s;
        }
    return V;
}

VarianceTensor var_subsample(const Panel& panel, const Kernel& kernel, std::size_t k_n,
                             double varpi, double eta, bool enforce_eta) {
    HyContext ctx(panel, kernel, k_n);
    return var_subsample(ctx, varpi, eta, enforce_eta);
}

namespace {

struct GammaKey {
    int variant;
    long long x1, x2, a;
    bool operator==(const GammaKey& o) const {
        return variant == o.variant && x1 == o.x1 && x2 == o.x2 && a == o.a;
    }
};
struct GammaKeyHash {
    std::size_t operator()(const GammaKey& k) const {
        std::size_t h = static_cast<std::size_t>(k.variant);
        auto mix = [&h](long long v) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        };
        mix(k.x1);
        mix(k.x2);
        mix(k.a);
        return h;
    }
};
using GammaCache = std::unordered_map<GammaKey, double, GammaKeyHash>;

long long quant(double v) { return std::llround(v * 1e9); }

// s-locations where the u-integrand of psi_v(s, x) changes structure,
// rescaled when the factor is evaluated at a*s
void add_factor_breaks(std::vector<double>& br, const Kernel& k, double x, double scale) {
    std::vector<double> targets = {0.0, 1.0};
    targets.insert(targets.end(), k.kinks().begin(), k.kinks().end());
    for (double c : targets)
        for (double ut : targets) {
            br.push_back((1.0 - ut + c / x) / scale);
            br.push_back(((c - 1.0) / x - ut) / scale);
        }
}

// int_{-L}^{L} psi_v(s, x1) psi_v(a s, x2) ds with L = 1 + 1/x1 (the
// support bound of the first factor)
double gamma_s_integral(const Kernel& kern, PsiVariant v, double x1, double x2, double a,
                        GammaCache* cache) {
    GammaKey key{static_cast<int>(v), quant(x1), quant(x2), quant(a)};
    if (cache) {
        auto it = cache->find(key);
        if (it != cache->end()) return it->second;
    }
    const double L = 1.0 + 1.0 / x1;
    QuadSettings inner;
    inner.abs_tol = 1e-11;
    QuadSettings outer;
    outer.abs_tol = 1e-8;
    auto f = [&](double s) {
        return psi_overlap(kern, s, x1, v, inner) * psi_overlap(kern, a * s, x2, v, inner);
    };
    std::vector<double> br;
    add_factor_breaks(br, kern, x1, 1.0);
    add_factor_breaks(br, kern, x2, a);
    double val = integrate_with_breaks(f, -L, L, std::move(br), outer);
    if (cache) cache->emplace(key, val);
    return val;
}

constexpr int NEED_GAMMA = 1;
constexpr int NEED_BAR = 2;
constexpr int NEED_TILDE = 4;

// joint grids thinner than this cannot support an f'_{kl} estimate; the
// corresponding prefactor terms are zeroed and flagged
constexpr std::size_t MIN_JOINT_POINTS = 10;

GammaTriple gamma_impl(const TimeTransform& tt, const Kernel& kern, double u, std::size_t k,
                       std::size_t l, std::size_t k2, std::size_t l2, int need,
                       GammaCache* cache) {
    if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("gamma_functions: u must lie in [0,1]");
    const std::size_t d = tt.d();
    if (k >= d || l >= d || k2 >= d || l2 >= d)
        throw ValidationError("gamma_functions: asset index out of range");

    const double x1 = tt.h(k, l, u);   // h_{kl}
    const double x2 = tt.h(k2, l2, u); // h_{k'l'}
    const double a = tt.h(l2, l, u);   // h_{l'l}
    const double denom = tt.m(l) * tt.fprime(l, u);

    GammaTriple out;
    if (need & NEED_GAMMA)
        out.gamma = gamma_s_integral(kern, PsiVariant::GG, x1, x2, a, cache) / denom;

    const std::size_t n_kk2 = tt.joint(k, k2).n_kl;
    const std::size_t n_ll2 = tt.joint(l, l2).n_kl;

    if (need & NEED_BAR) {
        if (n_kk2 >= MIN_JOINT_POINTS) {
            double pref = tt.m_pair(k, k2) * tt.fprime_pair(k, k2, u) / denom;
            out.gamma_bar = pref * gamma_s_integral(kern, PsiVariant::GGp, x1, x2, a, cache);
        } else if (n_kk2 > 0) {
            out.bar_dropped = true;
        }
    }
    if (need & NEED_TILDE) {
        if (n_kk2 >= MIN_JOINT_POINTS && n_ll2 >= MIN_JOINT_POINTS) {
            double pref = tt.m_pair(k, k2) * tt.fprime_pair(k, k2, u) * tt.m_pair(l, l2) *
                          tt.fprime_pair(l, l2, u) / denom;
            out.gamma_tilde = pref * gamma_s_integral(kern, PsiVariant::GpGp, x1, x2, a, cache);
        } else if (n_kk2 > 0 && n_ll2 > 0) {
            out.tilde_dropped = true;
        }
    }
    return out;
}

} // namespace

GammaTriple gamma_functions(const TimeTransform& tt, const Kernel& kernel, double u,
                            std::size_t k, std::size_t l, std::size_t k2, std::size_t l2) {
    return gamma_impl(tt, kernel, u, k, l, k2, l2, NEED_GAMMA | NEED_BAR | NEED_TILDE, nullptr);
}

VarianceTensor var_plugin(const HyContext& ctx, const TimeTransform& tt, double l_n,
                          std::size_t u_points, const NoiseCov* psi_override) {
    const std::size_t d = ctx.panel().d();
    if (u_points < 5) u_points = 5;
    if (u_points % 2 == 0) ++u_points;

    SpotVol sv = spot_vol(ctx, l_n, u_points);
    NoiseCov nc = psi_override ? *psi_override : noise_cov(ctx.panel(), tt);
    const Kernel& kern = ctx.kernel();
    const double theta = ctx.theta_eff();
    const double psi4 = sq(sq(kern.psi()));

    // composite Simpson weights on the uniform u grid
    std::vector<double> w(u_points);
    const double h = 1.0 / static_cast<double>(u_points - 1);
    for (std::size_t i = 0; i < u_points; ++i)
        w[i] = (i == 0 || i + 1 == u_points) ? h / 3.0 : (i % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);

    GammaCache cache;
    VarianceTensor V(d, VarianceMethod::Plugin);
    std::size_t dropped = 0;

    for (std::size_t a = 0; a < d * d; ++a) {
        const std::size_t k = a % d, l = a / d;
        for (std::size_t b = a; b < d * d; ++b) {
            const std::size_t k2 = b % d, l2 = b / d;
            double acc = 0.0;
            for (std::size_t ui = 0; ui < u_points; ++ui) {
                const double u = sv.times[ui];
                const Matrix& S = sv.values[ui];
                GammaTriple g1 = gamma_impl(tt, kern, u, k, l, k2, l2,
                                            NEED_GAMMA | NEED_BAR | NEED_TILDE, &cache);
                GammaTriple g2 = gamma_impl(tt, kern, u, k, l, l2, k2,
                                            NEED_GAMMA | NEED_BAR | NEED_TILDE, &cache);
                GammaTriple g3 = gamma_impl(tt, kern, u, l, k, l2, k2, NEED_BAR, &cache);
                GammaTriple g4 = gamma_impl(tt, kern, u, l, k, k2, l2, NEED_BAR, &cache);
                dropped += static_cast<std::size_t>(g1.bar_dropped) + g1.tilde_dropped +
                           g2.bar_dropped + g2.tilde_dropped + g3.bar_dropped + g4.bar_dropped;

                double term =
                    theta * (g1.gamma * S(k, k2) * S(l, l2) + g2.gamma * S(k, l2) * S(l, k2)) +
                    (1.0 / theta) *
                        (nc.psi(l, l2) * g3.gamma_bar * S(k, k2) +
                         nc.psi(l, k2) * g4.gamma_bar * S(k, l2) +
                         nc.psi(k, l2) * g2.gamma_bar * S(l, k2) +
                         nc.psi(k, k2) * g1.gamma_bar * S(l, l2)) +
                    (1.0 / (theta * theta * theta)) *
                        (nc.psi(k, k2) * nc.psi(l, l2) * g1.gamma_tilde +
                         nc.psi(k, l2) * nc.psi(l, k2) * g2.gamma_tilde);
                acc += w[ui] * term;
            }
            acc /= psi4;
            V.vec_matrix()(a, b) = acc;
            V.vec_matrix()(b, a) = acc;
        }
    }
    V.dropped_terms = dropped;
    return V;
}

VarianceTensor var_plugin(const Panel& panel, const TimeTransform& tt, const Kernel& kernel,
                          std::size_t k_n, double l_n) {
    HyContext ctx(panel, kernel, k_n);
    return var_plugin(ctx, tt, l_n);
}

double var_univariate(const TickSeries& series, const Kernel& kernel, std::size_t k_n,
                      double theta) {
    if (!(theta > 0.0)) throw ValidationError("var_univariate: theta must be positive");
    Panel panel = build_panel({series});
    HyContext ctx(panel, kernel, k_n);

    const auto& yb = ctx.asset(0).ybar;
    double quart = 0.0;
    for (std::size_t i = 1; i < yb.size(); ++i) quart += sq(sq(yb[i]));

    double hy = hy_matrix(ctx).raw(0, 0);
    TimeTransform tt = empirical_time_transform(panel);
    double Psi = noise_cov(panel, tt).psi(0, 0);

    const KappaConstants& kc = kernel.kappas();
    const double mu = kernel.mu();
    const double mut = kernel.mu_tilde();
    const double psi4 = sq(sq(kernel.psi()));

    double t1 = kc.kappa / (3.0 * theta * mu * mu) * quart;
    double t2 = (2.0 / theta) * Psi * hy * (kc.kappa_bar - kc.kappa * mut / mu);
    double t3 = Psi * Psi / (theta * theta * theta) *
                (kc.kappa_tilde - kc.kappa * mut * mut / (mu * mu));
    return 2.0 / psi4 * (t1 + t2 + t3);
}

} // namespace covest
