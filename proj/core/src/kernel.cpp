#include "covest/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "covest/common.hpp"

namespace covest {

namespace {

// Primitive of g built numerically: cumulative values on a fine grid whose
// cell boundaries include every kink, plus a single Gauss-Legendre panel for
// the partial cell. Used only when no analytic primitive is supplied.
std::function<double(double)> build_primitive(const std::function<double(double)>& g,
                                              const std::vector<double>& kinks) {
    const int cells = 1024;
    std::vector<double> xs;
    xs.reserve(cells + 1 + kinks.size());
    for (int i = 0; i <= cells; ++i) xs.push_back(static_cast<double>(i) / cells);
    xs.insert(xs.end(), kinks.begin(), kinks.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    const GLRule& r = gl_rule(15);
    auto panel = [&](double a, double b) {
        double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
        for (std::size_t q = 0; q < r.nodes.size(); ++q) s += r.weights[q] * g(c + h * r.nodes[q]);
        return s * h;
    };

    std::vector<double> cum(xs.size(), 0.0);
    for (std::size_t i = 1; i < xs.size(); ++i) cum[i] = cum[i - 1] + panel(xs[i - 1], xs[i]);

    return [xs = std::move(xs), cum = std::move(cum), g](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return cum.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        const GLRule& rr = gl_rule(15);
        double a = xs[i], c = 0.5 * (a + x), h = 0.5 * (x - a), s = 0.0;
        for (std::size_t q = 0; q < rr.nodes.size(); ++q) s += rr.weights[q] * g(c + h * rr.nodes[q]);
        return cum[i] + s * h;
    };
}

double psi_overlap_impl(const Kernel& k, double s, double x, PsiVariant variant,
                        const QuadSettings& q) {
    if (!(x > 0.0)) throw ValidationError("psi_overlap: x must be positive");
    if (std::abs(s) >= 1.0 + 1.0 / x) return 0.0;

    // inner integral of f_v over ((u-1+s)x, 1+x(s+u)) equals Fv(hi) - Fv(lo)
    // with Fv the clamped primitive (G for GG, g itself for the g' variants)
    const bool outer_prime = (variant == PsiVariant::GpGp);
    const bool inner_prime = (variant != PsiVariant::GG);

    auto Fv = [&](double v) {
        if (inner_prime) {
            if (v <= 0.0) return 0.0;
            if (v >= 1.0) return 0.0; // g(1) = 0
            return k.g(v);
        }
        return k.primitive(v);
    };

    auto integrand = [&](double u) {
        double lo = (u - 1.0 + s) * x;
        double hi = 1.0 + x * (s + u);
        double fu = outer_prime ? k.gp(u) : k.g(u);
        return fu * (Fv(hi) - Fv(lo));
    };

    // breakpoints: kinks of f_u plus every u where lo or hi crosses a kink
    // of the inner primitive or the edge of [0,1]
    std::vector<double> targets = {0.0, 1.0};
    targets.insert(targets.end(), k.kinks().begin(), k.kinks().end());
    std::vector<double> breaks = k.kinks();
    for (double c : targets) {
        breaks.push_back(1.0 - s + c / x);   // lo(u) = c
        breaks.push_back((c - 1.0) / x - s); // hi(u) = c
    }
    return integrate_with_breaks(integrand, 0.0, 1.0, std::move(breaks), q);
}

KappaConstants compute_kappas(const Kernel& k) {
    QuadSettings inner = k.quad();
    inner.abs_tol = 1e-12;
    inner.gl_points = 21;
    QuadSettings outer = k.quad();
    outer.abs_tol = 1e-9;

    // s-locations where the structure of the u-integrand changes (x = 1)
    std::vector<double> targets = {0.0, 1.0};
    targets.insert(targets.end(), k.kinks().begin(), k.kinks().end());
    std::vector<double> sbreaks;
    for (double c : targets)
        for (double ut : targets) {
            sbreaks.push_back(1.0 + c - ut);
            sbreaks.push_back(c - 1.0 - ut);
        }

    auto kap = [&](PsiVariant v) {
        auto f = [&](double s) { return sq(psi_overlap_impl(k, s, 1.0, v, inner)); };
        return integrate_with_breaks(f, -2.0, 2.0, sbreaks, outer);
    };

    KappaConstants out;
    out.kappa = kap(PsiVariant::GG);
    out.kappa_bar = kap(PsiVariant::GGp);
    out.kappa_tilde = kap(PsiVariant::GpGp);
    return out;
}

} // namespace

Kernel Kernel::make(std::string name, Fn g, Fn gp, std::vector<double> interior_kinks,
                    Fn primitive, QuadSettings quad) {
    if (!g || !gp) throw ValidationError("kernel '" + name + "': g and gp are required");

    std::sort(interior_kinks.begin(), interior_kinks.end());
    interior_kinks.erase(std::unique(interior_kinks.begin(), interior_kinks.end()),
                         interior_kinks.end());
    for (double c : interior_kinks)
        if (!(c > 0.0 && c < 1.0))
            throw ValidationError("kernel '" + name + "': kinks must lie strictly inside (0,1)");

    if (std::abs(g(0.0)) > 1e-12 || std::abs(g(1.0)) > 1e-12)
        throw ValidationError("kernel '" + name + "': g must vanish at 0 and 1");

    // zero outside [0,1] regardless of what the callable does there
    Kernel k;
    k.name_ = std::move(name);
    k.g_ = [g](double x) { return (x < 0.0 || x > 1.0) ? 0.0 : g(x); };
    k.gp_ = [gp](double x) { return (x < 0.0 || x > 1.0) ? 0.0 : gp(x); };
    k.kinks_ = std::move(interior_kinks);
    k.quad_ = quad;

    // derivative consistency at interior points of each smooth piece
    {
        std::vector<double> edges = {0.0};
        edges.insert(edges.end(), k.kinks_.begin(), k.kinks_.end());
        edges.push_back(1.0);
        const double h = 1e-6;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            for (double frac : {0.31, 0.5, 0.77}) {
                double u = edges[i] + frac * (edges[i + 1] - edges[i]);
                if (u - h <= edges[i] || u + h >= edges[i + 1]) continue;
                double fd = (k.g_(u + h) - k.g_(u - h)) / (2.0 * h);
                if (std::abs(fd - k.gp_(u)) > 1e-4 * std::max(1.0, std::abs(k.gp_(u))))
                    throw ValidationError("kernel '" + k.name_ +
                                          "': gp is inconsistent with g near x=" +
                                          std::to_string(u));
            }
    }

    QuadSettings tight = quad;
    tight.abs_tol = 1e-12;
    k.psi_ = integrate_with_breaks(k.g_, 0.0, 1.0, k.kinks_, tight);
    if (!(k.psi_ > 1e-12))
        throw ValidationError("kernel '" + k.name_ + "': int_0^1 g must be positive");
    k.mu_ = integrate_with_breaks([&](double x) { return sq(k.g_(x)); }, 0.0, 1.0, k.kinks_, tight);
    k.mu_tilde_ =
        integrate_with_breaks([&](double x) { return sq(k.gp_(x)); }, 0.0, 1.0, k.kinks_, tight);

    if (primitive) {
        for (double x : {0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0}) {
            double ref = integrate_with_breaks(k.g_, 0.0, x, k.kinks_, tight);
            if (std::abs(primitive(x) - ref) > 1e-7)
                throw ValidationError("kernel '" + k.name_ +
                                      "': supplied primitive disagrees with int_0^x g at x=" +
                                      std::to_string(x));
        }
        double psi = k.psi_;
        k.primitive_ = [primitive, psi](double x) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return psi;
            return primitive(x);
        };
    } else {
        k.primitive_ = build_primitive(k.g_, k.kinks_);
    }

    k.kappas_ = compute_kappas(k);
    return k;
}

double Kernel::g(double x) const { return g_(x); }
double Kernel::gp(double x) const { return gp_(x); }
double Kernel::primitive(double x) const { return primitive_(x); }

const Kernel& Kernel::triangle() {
    static const Kernel k = make(
        "triangle", [](double x) { return std::min(x, 1.0 - x); },
        [](double x) { return x < 0.5 ? 1.0 : -1.0; }, {0.5},
        [](double x) { return x <= 0.5 ? 0.5 * x * x : 0.25 - 0.5 * sq(1.0 - x); });
    return k;
}

const Kernel& Kernel::sine() {
    static const Kernel k = make(
        "sine", [](double x) { return std::sin(std::numbers::pi * x); },
        [](double x) { return std::numbers::pi * std::cos(std::numbers::pi * x); }, {},
        [](double x) { return (1.0 - std::cos(std::numbers::pi * x)) / std::numbers::pi; });
    return k;
}

const Kernel& Kernel::parabola() {
    static const Kernel k = make(
        "parabola", [](double x) { return x * (1.0 - x); }, [](double x) { return 1.0 - 2.0 * x; },
        {}, [](double x) { return 0.5 * x * x - x * x * x / 3.0; });
    return k;
}

const Kernel& Kernel::by_name(const std::string& name) {
    if (name == "triangle") return triangle();
    if (name == "sine") return sine();
    if (name == "parabola") return parabola();
    throw ValidationError("unknown kernel '" + name + "' (known: triangle, sine, parabola)");
}

double psi_overlap(const Kernel& k, double s, double x, PsiVariant variant) {
    return psi_overlap_impl(k, s, x, variant, k.quad());
}

double psi_overlap(const Kernel& k, double s, double x, PsiVariant variant,
                   const QuadSettings& settings) {
    return psi_overlap_impl(k, s, x, variant, settings);
}

KappaConstants kappa_constants(const Kernel& k) { return k.kappas(); }

KernelConstants kernel_constants(const Kernel& k) {
    KernelConstants c;
    c.name = k.name();
    c.psi = k.psi();
    c.mu = k.mu();
    c.mu_tilde = k.mu_tilde();
    c.kappas = k.kappas();
    return c;
}

} // namespace covest
