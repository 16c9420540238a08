#include "covest/grids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covest/common.hpp"

namespace covest {

namespace {

std::string asset_label(const TickSeries& s, std::size_t k) {
    if (!s.asset.empty()) return "'" + s.asset + "'";
    return "#" + std::to_string(k);
}

// Windowed divided differences of the interpolant through (t_i, i/n):
// slope over intervals [b, b+w) is (w/n) / (t_{b+w} - t_b). The window is
// centered and shifted inside the grid near the edges. Values are rescaled
// afterwards so the slopes integrate to exactly total_mass over the grid
// span plus the constant boundary extensions.
std::vector<double> smoothed_slopes(const std::vector<double>& t, double total_mass,
                                    double ext_left, double ext_right) {
    const std::size_t n = t.size() - 1;
    std::size_t w = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    if (w < 1) w = 1;
    if (w > n) w = n;

    std::vector<double> s(n);
    const double mass = total_mass * static_cast<double>(w) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t b = (i >= w / 2) ? i - w / 2 : 0;
        if (b + w > n) b = n - w;
        s[i] = mass / (t[b + w] - t[b]);
    }

    double integral = s.front() * ext_left + s.back() * ext_right;
    for (std::size_t i = 0; i < n; ++i) integral += s[i] * (t[i + 1] - t[i]);
    for (auto& v : s) v *= total_mass / integral;
    return s;
}

// piecewise-constant lookup with constant extension outside the grid span
double slope_at(const std::vector<double>& t, const std::vector<double>& s, double x) {
    if (x <= t.front()) return s.front();
    if (x >= t.back()) return s.back();
    auto it = std::upper_bound(t.begin(), t.end(), x);
    return s[static_cast<std::size_t>(it - t.begin()) - 1];
}

} // namespace

Panel build_panel(std::vector<TickSeries> series) {
    if (series.empty()) throw ValidationError("build_panel: no series given");
    Panel p;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const TickSeries& s = series[k];
        std::string who = "asset " + asset_label(s, k);
        if (s.times.size() != s.values.size())
            throw ValidationError("build_panel: " + who + ": times/values length mismatch");
        if (s.times.size() < 2)
            throw ValidationError("build_panel: " + who + ": needs at least 2 observations");
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            if (!std::isfinite(s.times[i]) || !std::isfinite(s.values[i]))
                throw ValidationError("build_panel: " + who + ": non-finite entry at index " +
                                      std::to_string(i));
            if (s.times[i] < 0.0 || s.times[i] > 1.0)
                throw ValidationError("build_panel: " + who + ": time outside [0,1] at index " +
                                      std::to_string(i));
            if (i > 0 && !(s.times[i] > s.times[i - 1]))
                throw ValidationError("build_panel: " + who +
                                      ": times not strictly increasing at index " +
                                      std::to_string(i));
        }
        if (s.times.front() != 0.0)
            p.warnings.push_back(who + ": first observation at t=" +
                                 std::to_string(s.times.front()) + ", not 0");
        if (s.times.back() != 1.0)
            p.warnings.push_back(who + ": last observation at t=" +
                                 std::to_string(s.times.back()) + ", not 1");
        p.n_total += s.n();
    }
    p.series = std::move(series);
    return p;
}

void TimeTransform::check_asset(std::size_t k) const {
    if (k >= assets_.size()) throw ValidationError("time transform: asset index out of range");
}

double TimeTransform::m(std::size_t k) const {
    check_asset(k);
    return assets_[k].m;
}

double TimeTransform::f(std::size_t k, double x) const {
    check_asset(k);
    const auto& a = assets_[k];
    const auto& t = a.times;
    const double n = static_cast<double>(t.size() - 1);
    std::size_t i;
    if (x <= t.front())
        i = 0;
    else if (x >= t.back())
        i = t.size() - 2;
    else
        i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
    double frac = (x - t[i]) / (t[i + 1] - t[i]);
    return (static_cast<double>(i) + frac) / n;
}

double TimeTransform::fprime(std::size_t k, double x) const {
    check_asset(k);
    return slope_at(assets_[k].times, assets_[k].slopes, x);
}

const JointGrid& TimeTransform::joint(std::size_t k, std::size_t l) const {
    check_asset(k);
    check_asset(l);
    return pairs_[k * d() + l].grid;
}

double TimeTransform::m_pair(std::size_t k, std::size_t l) const {
    check_asset(k);
    check_asset(l);
    return pairs_[k * d() + l].m;
}

double TimeTransform::fprime_pair(std::size_t k, std::size_t l, double x) const {
    check_asset(k);
    check_asset(l);
    const auto& pm = pairs_[k * d() + l];
    if (pm.slopes.empty()) return 0.0; // fewer than 2 joint points
    return slope_at(pm.grid.times, pm.slopes, x);
}

double TimeTransform::h(std::size_t k, std::size_t l, double x) const {
    double num = m(k) * fprime(k, x);
    double den = m(l) * fprime(l, x);
    return num / den;
}

double TimeTransform::comparability_bound() const {
    double M = 1.0;
    for (const auto& a : assets_)
        for (double s : a.slopes) {
            if (s > M) M = s;
            if (1.0 / s > M) M = 1.0 / s;
        }
    return M;
}

TimeTransform empirical_time_transform(const Panel& panel, double joint_tolerance) {
    if (panel.series.empty()) throw ValidationError("time transform: empty panel");
    if (joint_tolerance < 0.0) throw ValidationError("time transform: negative joint tolerance");

    TimeTransform tt;
    tt.n_total_ = panel.n_total;
    const std::size_t d = panel.d();
    tt.assets_.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        auto& a = tt.assets_[k];
        a.times = panel.series[k].times;
        a.m = static_cast<double>(panel.series[k].n()) / static_cast<double>(panel.n_total);
        a.slopes = smoothed_slopes(a.times, 1.0, a.times.front(), 1.0 - a.times.back());
    }

    tt.pairs_.resize(d * d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
            auto& pm = tt.pairs_[k * d + l];
            if (l < k) {
                // mirror of (l,k) with index roles swapped
                const auto& src = tt.pairs_[l * d + k];
                pm.grid.times = src.grid.times;
                pm.grid.idx_k = src.grid.idx_l;
                pm.grid.idx_l = src.grid.idx_k;
                pm.grid.n_kl = src.grid.n_kl;
                pm.slopes = src.slopes;
                pm.m = src.m;
                continue;
            }
            const auto& tk = panel.series[k].times;
            const auto& tl = panel.series[l].times;
            std::size_t i = 0, j = 0;
            while (i < tk.size() && j < tl.size()) {
                if (std::abs(tk[i] - tl[j]) <= joint_tolerance) {
                    // a tick matching two consecutive ticks of the other
                    // asset would collapse them into one joint point
                    if (k != l &&
                        ((i + 1 < tk.size() && std::abs(tk[i + 1] - tl[j]) <= joint_tolerance) ||
                         (j + 1 < tl.size() && std::abs(tl[j + 1] - tk[i]) <= joint_tolerance)))
                        throw ValidationError(
                            "time transform: joint tolerance merges distinct times of assets " +
                            std::to_string(k) + " and " + std::to_string(l) +
                            " into a zero-length interval");
                    pm.grid.times.push_back(tk[i]);
                    pm.grid.idx_k.push_back(i);
                    pm.grid.idx_l.push_back(j);
                    ++i;
                    ++j;
                } else if (tk[i] < tl[j]) {
                    ++i;
                } else {
                    ++j;
                }
            }
            for (double t : pm.grid.times)
                if (t > 0.0) ++pm.grid.n_kl;
            pm.m = static_cast<double>(pm.grid.n_kl) / static_cast<double>(panel.n_total);
            if (pm.grid.times.size() >= 2) {
                double nkl = static_cast<double>(pm.grid.n_kl);
                double gaps = static_cast<double>(pm.grid.times.size() - 1);
                pm.slopes = smoothed_slopes(pm.grid.times, gaps / nkl, pm.grid.times.front(),
                                            1.0 - pm.grid.times.back());
            }
        }
    return tt;
}

std::vector<JointPoint> joint_points(const TimeTransform& tt, std::size_t k, std::size_t l) {
    const JointGrid& g = tt.joint(k, l);
    std::vector<JointPoint> out;
    out.reserve(g.times.size());
    for (std::size_t p = 0; p < g.times.size(); ++p)
        out.push_back({p, g.times[p], g.idx_k[p], g.idx_l[p]});
    return out;
}

GridDiagnostics grid_diagnostics(const Panel& panel, const TimeTransform& tt) {
    const std::size_t d = panel.d();
    GridDiagnostics dg;
    dg.comparability = tt.comparability_bound();
    dg.interleaving = Matrix(d, d);
    dg.m_pair = Matrix(d, d);
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l) {
            dg.m_pair(k, l) = tt.m_pair(k, l);
            if (k == l) {
                dg.interleaving(k, l) = 1.0;
                continue;
            }
            // max # of l-grid points in one half-open k-grid interval (a, b]
            const auto& tk = panel.series[k].times;
            const auto& tl = panel.series[l].times;
            std::size_t worst = 0, j = 0;
            while (j < tl.size() && tl[j] <= tk.front()) ++j;
            for (std::size_t i = 0; i + 1 < tk.size(); ++i) {
                std::size_t c = 0;
                while (j < tl.size() && tl[j] <= tk[i + 1]) {
                    ++c;
                    ++j;
                }
                worst = std::max(worst, c);
            }
            dg.interleaving(k, l) = static_cast<double>(worst);
        }
    return dg;
}

} // namespace covest
