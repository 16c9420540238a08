#include "covest/hy.hpp"

#include <algorithm>
#include <cmath>

#include "covest/common.hpp"

namespace covest {

HyContext::HyContext(const Panel& panel, const Kernel& kernel, std::size_t k_n)
    : panel_(&panel), kernel_(&kernel), k_n_(k_n) {
    std::size_t min_nk = panel.series.front().n();
    for (const auto& s : panel.series) min_nk = std::min(min_nk, s.n());
    if (k_n > min_nk)
        throw ValidationError("hy: k_n = " + std::to_string(k_n) +
                              " exceeds the smallest interval count " + std::to_string(min_nk));
    if (k_n < 2) throw ValidationError("hy: k_n must be at least 2");

    theta_eff_ = static_cast<double>(k_n) / std::sqrt(static_cast<double>(panel.n_total));
    norm_ = 1.0 / sq(kernel.psi() * static_cast<double>(k_n));

    assets_.resize(panel.d());
    for (std::size_t k = 0; k < panel.d(); ++k) {
        const TickSeries& s = panel.series[k];
        AssetWindows& a = assets_[k];
        a.ybar = preaverage(s, k_n, kernel).values;
        const std::size_t nw = a.ybar.size();
        a.wstart.resize(nw);
        a.wend.resize(nw);
        for (std::size_t i = 0; i < nw; ++i) {
            a.wstart[i] = s.times[i];
            a.wend[i] = s.times[std::min(i + k_n, s.n())];
        }
        a.prefix.resize(nw + 1, 0.0);
        for (std::size_t i = 0; i < nw; ++i) a.prefix[i + 1] = a.prefix[i] + a.ybar[i];
    }
}

HyContext::PairRanges HyContext::pair_ranges(std::size_t k, std::size_t l) const {
    const AssetWindows& ak = assets_[k];
    const AssetWindows& al = assets_[l];
    const std::size_t nk = ak.ybar.size();
    const std::size_t nl = al.ybar.size();
    PairRanges r;
    r.lo.resize(nk);
    r.hi.resize(nk);
    // window j overlaps window i iff wstart_l[j] < wend_k[i] and
    // wend_l[j] > wstart_k[i]; both bounds are monotone in i
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < nk; ++i) {
        while (lo < nl && !(al.wend[lo] > ak.wstart[i])) ++lo;
        if (hi < lo) hi = lo;
        while (hi < nl && al.wstart[hi] < ak.wend[i]) ++hi;
        r.lo[i] = lo;
        r.hi[i] = std::max(hi, lo);
    }
    return r;
}

static CovEstimate make_estimate(const HyContext& ctx) {
    const std::size_t d = ctx.panel().d();
    CovEstimate est;
    est.matrix = Matrix(d, d);
    est.raw = Matrix(d, d);
    est.calibration = Matrix(d, d, 1.0);
    est.overlap_counts = Matrix(d, d);
    est.k_n = ctx.k_n();
    est.theta = ctx.theta_eff();
    return est;
}

CovEstimate hy_matrix(const HyContext& ctx) {
    const std::size_t d = ctx.panel().d();
    CovEstimate est = make_estimate(ctx);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k; l < d; ++l) {
            auto ranges = ctx.pair_ranges(k, l);
            const auto& ak = ctx.asset(k);
            const auto& al = ctx.asset(l);
            double sum = 0.0;
            double count = 0.0;
            for (std::size_t i = 0; i < ak.ybar.size(); ++i) {
                sum += ak.ybar[i] * (al.prefix[ranges.hi[i]] - al.prefix[ranges.lo[i]]);
                count += static_cast<double>(ranges.hi[i] - ranges.lo[i]);
            }
            sum *= ctx.norm();
            est.raw(k, l) = sum;
            est.raw(l, k) = sum;
            est.overlap_counts(k, l) = count;
            est.overlap_counts(l, k) = count;
        }
    est.matrix = est.raw;
    return est;
}

CovEstimate hy_matrix(const Panel& panel, const Kernel& kernel, std::size_t k_n) {
    HyContext ctx(panel, kernel, k_n);
    return hy_matrix(ctx);
}

CovEstimate hy_naive_oracle(const Panel& panel, const Kernel& kernel, std::size_t k_n) {
    const std::size_t d = panel.d();
    for (const auto& s : panel.series)
        if (k_n < 2 || k_n > s.n())
            throw ValidationError("hy: k_n out of range for asset '" + s.asset + "'");

    // direct transcription of the double sum, including its own
    // pre-averaging, kept deliberately separate from the fast path
    std::vector<std::vector<double>> bars(d);
    for (std::size_t k = 0; k < d; ++k) {
        const auto& y = panel.series[k].values;
        const std::size_t nk = panel.series[k].n();
        for (std::size_t i = 0; i + k_n <= nk + 1; ++i) {
            double acc = 0.0;
            for (std::size_t j = 1; j < k_n; ++j)
                acc += kernel.g(static_cast<double>(j) / static_cast<double>(k_n)) *
                       (y[i + j] - y[i + j - 1]);
            bars[k].push_back(acc);
        }
    }

    CovEstimate est;
    est.matrix = Matrix(d, d);
    est.raw = Matrix(d, d);
    est.calibration = Matrix(d, d, 1.0);
    est.overlap_counts = Matrix(d, d);
    est.k_n = k_n;
    est.theta = static_cast<double>(k_n) / std::sqrt(static_cast<double>(panel.n_total));

    const double norm = 1.0 / sq(kernel.psi() * static_cast<double>(k_n));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
            const auto& tk = panel.series[k].times;
            const auto& tl = panel.series[l].times;
            const std::size_t nk = panel.series[k].n();
            const std::size_t nl = panel.series[l].n();
            double sum = 0.0, count = 0.0;
            for (std::size_t i = 0; i < bars[k].size(); ++i)
                for (std::size_t j = 0; j < bars[l].size(); ++j) {
                    double s_lo = std::max(tk[i], tl[j]);
                    double s_hi = std::min(tk[std::min(i + k_n, nk)], tl[std::min(j + k_n, nl)]);
                    if (s_lo < s_hi) {
                        sum += bars[k][i] * bars[l][j];
                        count += 1.0;
                    }
                }
            est.raw(k, l) = sum * norm;
            est.overlap_counts(k, l) = count;
        }
    est.matrix = est.raw;
    return est;
}

double hy_block(const HyContext& ctx, std::size_t k, std::size_t l, double a, double b) {
    if (k >= ctx.panel().d() || l >= ctx.panel().d())
        throw ValidationError("hy_block: asset index out of range");
    if (!(a < b)) return 0.0;
    auto ranges = ctx.pair_ranges(k, l);
    const auto& ak = ctx.asset(k);
    const auto& al = ctx.asset(l);
    double sum = 0.0;
    for (std::size_t i = 0; i < ak.ybar.size(); ++i) {
        if (ak.wstart[i] < a || ak.wstart[i] >= b) continue;
        sum += ak.ybar[i] * (al.prefix[ranges.hi[i]] - al.prefix[ranges.lo[i]]);
    }
    return sum * ctx.norm();
}

double hy_block(const Panel& panel, const Kernel& kernel, std::size_t k_n, std::size_t k,
                std::size_t l, double a, double b) {
    HyContext ctx(panel, kernel, k_n);
    return hy_block(ctx, k, l, a, b);
}

Matrix hy_partial(const HyContext& ctx, double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("hy_partial: t must lie in (0, 1]");
    const std::size_t d = ctx.panel().d();
    Matrix out(d, d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k; l < d; ++l) {
            auto ranges = ctx.pair_ranges(k, l);
            const auto& ak = ctx.asset(k);
            const auto& al = ctx.asset(l);
            // j windows with wend <= t form a prefix since wend is monotone
            std::size_t jcap = static_cast<std::size_t>(
                std::upper_bound(al.wend.begin(), al.wend.end(), t) - al.wend.begin());
            double sum = 0.0;
            for (std::size_t i = 0; i < ak.ybar.size(); ++i) {
                if (ak.wend[i] > t) continue;
                std::size_t hi = std::min(ranges.hi[i], jcap);
                if (hi > ranges.lo[i])
                    sum += ak.ybar[i] * (al.prefix[hi] - al.prefix[ranges.lo[i]]);
            }
            sum *= ctx.norm();
            out(k, l) = sum;
            out(l, k) = sum;
        }
    return out;
}

Matrix hy_partial(const Panel& panel, const Kernel& kernel, std::size_t k_n, double t) {
    HyContext ctx(panel, kernel, k_n);
    return hy_partial(ctx, t);
}

void apply_calibration(CovEstimate& est, const Matrix& divisors) {
    if (!divisors.same_shape(est.raw))
        throw ValidationError("apply_calibration: factor matrix shape mismatch");
    for (std::size_t k = 0; k < est.raw.rows(); ++k)
        for (std::size_t l = 0; l < est.raw.cols(); ++l) {
            if (!(divisors(k, l) > 0.0))
                throw ValidationError("apply_calibration: factors must be positive");
            est.matrix(k, l) = est.raw(k, l) / divisors(k, l);
        }
    est.calibration = divisors;
    est.calibrated = true;
}

} // namespace covest
