#include "covest/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "covest/common.hpp"

namespace covest {

namespace {

GLRule compute_gl_rule(int n) {
    // Newton iteration on Legendre polynomials, nodes seeded by the
    // Chebyshev-like asymptotic approximation. Exploits symmetry.
    GLRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

double gl_panel(const std::function<double(double)>& f, double a, double b, const GLRule& r) {
    double c = 0.5 * (a + b);
    double h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
    return s * h;
}

double adaptive(const std::function<double(double)>& f, double a, double b, double whole,
                double tol, int depth, const GLRule& r) {
    double c = 0.5 * (a + b);
    double left = gl_panel(f, a, c, r);
    double right = gl_panel(f, c, b, r);
    if (std::abs(left + right - whole) <= tol) return left + right;
    if (depth <= 0)
        throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]");
    return adaptive(f, a, c, left, 0.5 * tol, depth - 1, r) +
           adaptive(f, c, b, right, 0.5 * tol, depth - 1, r);
}

} // namespace

const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl_rule(n)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadSettings& settings) {
    if (!(a <= b)) throw ValidationError("integrate: interval bounds out of order");
    if (a == b) return 0.0;
    const GLRule& r = gl_rule(settings.gl_points);
    double whole = gl_panel(f, a, b, r);
    return adaptive(f, a, b, whole, settings.abs_tol, settings.max_depth, r);
}

double integrate_with_breaks(const std::function<double(double)>& f, double a, double b,
                             std::vector<double> breaks, const QuadSettings& settings) {
    if (!(a <= b)) throw ValidationError("integrate: interval bounds out of order");
    if (a == b) return 0.0;
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<double> pts;
    for (double x : breaks)
        if (x >= a && x <= b) pts.push_back(x);

    // equal share of the tolerance per smooth piece
    QuadSettings piece = settings;
    piece.abs_tol = settings.abs_tol / static_cast<double>(pts.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] - pts[i] < 1e-14) continue;
        total += integrate(f, pts[i], pts[i + 1], piece);
    }
    return total;
}

} // namespace covest
