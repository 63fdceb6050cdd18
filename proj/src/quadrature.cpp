#include "vgp/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace vgp {

namespace {

double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                       double fa, double fm, double fb, double whole,
                       double abs_tol, double rel_tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (depth <= 0 ||
        std::abs(err) <= 15.0 * std::max(abs_tol, rel_tol * std::abs(left + right))) {
        return left + right + err / 15.0;
    }
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, rel_tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_depth) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, b, fa, fm, fb, whole, abs_tol, rel_tol, max_depth);
}

double adaptive_simpson_seeded(const std::function<double(double)>& f, double a, double b,
                               std::size_t initial_segments,
                               double abs_tol, double rel_tol, int max_depth) {
    if (!(b > a)) return 0.0;
    if (initial_segments < 1) initial_segments = 1;
    double acc = 0.0;
    const double seg_tol = abs_tol / static_cast<double>(initial_segments);
    for (std::size_t s = 0; s < initial_segments; ++s) {
        const double x0 = a + (b - a) * static_cast<double>(s) / initial_segments;
        const double x1 = (s + 1 == initial_segments)
                              ? b
                              : a + (b - a) * static_cast<double>(s + 1) / initial_segments;
        acc += adaptive_simpson(f, x0, x1, seg_tol, rel_tol, max_depth);
    }
    return acc;
}

double composite_simpson(const std::function<double(double)>& f, double a, double b,
                         std::size_t n) {
    if (!(b > a)) return 0.0;
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double acc = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) {
        const double x = a + h * static_cast<double>(i);
        acc += f(x) * ((i % 2) ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

double integrate_left_singular(const std::function<double(double)>& f, double a, double b,
                               double power, double abs_tol, double rel_tol) {
    if (!(b > a)) return 0.0;
    if (power < 1.0) throw std::invalid_argument("integrate_left_singular: power must be >= 1");
    const double len = b - a;
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double x = a + len * std::pow(u, power);
        return f(x) * len * power * std::pow(u, power - 1.0);
    };
    return adaptive_simpson(g, 0.0, 1.0, abs_tol, rel_tol);
}

double integrate_right_singular(const std::function<double(double)>& f, double a, double b,
                                double power, double abs_tol, double rel_tol) {
    if (!(b > a)) return 0.0;
    if (power < 1.0) throw std::invalid_argument("integrate_right_singular: power must be >= 1");
    const double len = b - a;
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double x = b - len * std::pow(u, power);
        return f(x) * len * power * std::pow(u, power - 1.0);
    };
    return adaptive_simpson(g, 0.0, 1.0, abs_tol, rel_tol);
}

} // namespace vgp
