#include "vgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "vgp/quadrature.hpp"

namespace vgp {

namespace {

double bump_value(int shape, double t, double s) {
    switch (shape) {
        case 0: return std::sin(std::numbers::pi * t) * std::sin(std::numbers::pi * s);
        case 1: return std::exp(-((t - 0.6) * (t - 0.6) + (s - 0.3) * (s - 0.3)) / 0.02);
        case 2: return (t > 0.5) ? 1.0 : 0.0; // jump in t, breaks C^1
        default:
            throw std::invalid_argument("KernelSpec: unknown bump shape " + std::to_string(shape));
    }
}

// Inner integral of the fractional kernel, H > 1/2:
//   J = int_s^t (u-s)^{H-3/2} u^{H-1/2} du, regularized by u = s + w^q, q = 1/(H-1/2).
double fractional_inner_high(double hurst, double t, double s) {
    const double q = 1.0 / (hurst - 0.5);
    const double wmax = std::pow(t - s, 1.0 / q);
    auto g = [&](double w) { return std::pow(s + std::pow(w, q), hurst - 0.5); };
    return q * adaptive_simpson(g, 0.0, wmax, 1e-14, 1e-8);
}

// Same for H < 1/2: J = int_s^t (u-s)^{H-1/2} u^{H-3/2} du, u = s + w^q, q = 1/(H+1/2).
double fractional_inner_low(double hurst, double t, double s) {
    const double q = 1.0 / (hurst + 0.5);
    const double wmax = std::pow(t - s, 1.0 / q);
    auto g = [&](double w) { return std::pow(s + std::pow(w, q), hurst - 1.5); };
    return q * adaptive_simpson(g, 0.0, wmax, 1e-14, 1e-8);
}

double fractional_eval(double hurst, double scale, double t, double s) {
    // Unbounded endpoints (s=0 for H>1/2, s=t for H<1/2) are clamped to 0;
    // quadratures that touch them use substituted rules instead of node values.
    if (s <= 0.0 || s >= t) return 0.0;
    if (hurst > 0.5) {
        return scale * std::pow(s, 0.5 - hurst) * fractional_inner_high(hurst, t, s);
    }
    const double direct = std::pow(t / s, hurst - 0.5) * std::pow(t - s, hurst - 0.5);
    const double correction =
        (hurst - 0.5) * std::pow(s, 0.5 - hurst) * fractional_inner_low(hurst, t, s);
    return scale * (direct - correction);
}

} // namespace

KernelSpec::KernelSpec(std::variant<Wiener, BrownianBridge, OrnsteinUhlenbeck, FractionalBM,
                                    Tabulated, Perturbed> fam,
                       bool stationary)
    : family_(std::move(fam)), stationary_(stationary) {}

KernelSpec KernelSpec::wiener() { return KernelSpec(Wiener{}, true); }

KernelSpec KernelSpec::brownian_bridge() { return KernelSpec(BrownianBridge{}, false); }

KernelSpec KernelSpec::ornstein_uhlenbeck(double rate) {
    if (!(rate > 0.0))
        throw std::invalid_argument("KernelSpec: Ornstein-Uhlenbeck rate must be > 0");
    return KernelSpec(OrnsteinUhlenbeck{rate}, true);
}

KernelSpec KernelSpec::fractional_bm(double hurst, double scale) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw std::invalid_argument("KernelSpec: Hurst index must be in (0,1)");
    if (!(scale > 0.0))
        throw std::invalid_argument("KernelSpec: fractional scale must be > 0");
    if (std::abs(hurst - 0.5) < 1e-12) return wiener();
    return KernelSpec(FractionalBM{hurst, scale}, false);
}

KernelSpec KernelSpec::fractional_bm_calibrated(double hurst) {
    return fractional_bm(hurst, calibrate_fractional_scale(hurst));
}

KernelSpec KernelSpec::tabulated(TimeGrid::Ptr grid, Eigen::MatrixXd values, bool stationary) {
    if (!grid) throw std::invalid_argument("KernelSpec::tabulated: null grid");
    const auto n = static_cast<Eigen::Index>(grid->size());
    if (values.rows() != n || values.cols() != n)
        throw std::invalid_argument("KernelSpec::tabulated: value matrix does not match grid");
    // enforce the Volterra triangle on the stored table
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) values(i, j) = 0.0;
    return KernelSpec(Tabulated{std::move(grid),
                                std::make_shared<Eigen::MatrixXd>(std::move(values)),
                                stationary},
                      stationary);
}

KernelSpec KernelSpec::perturbed(KernelSpec base, double amplitude, int bump_shape) {
    if (!(amplitude >= 0.0))
        throw std::invalid_argument("KernelSpec::perturbed: amplitude must be >= 0");
    bump_value(bump_shape, 0.5, 0.25); // validates the shape id
    return KernelSpec(Perturbed{std::make_shared<KernelSpec>(std::move(base)), amplitude,
                                bump_shape},
                      false);
}

double KernelSpec::eval(double t, double s) const {
    if (s > t) return 0.0;
    return std::visit(
        [&](const auto& fam) -> double {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Wiener>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, BrownianBridge>) {
                if (s >= 1.0) return 0.0; // K(1,1) as the limit from below
                return (1.0 - t) / (1.0 - s);
            } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>) {
                return std::exp(-fam.rate * (t - s));
            } else if constexpr (std::is_same_v<T, FractionalBM>) {
                return fractional_eval(fam.hurst, fam.scale, t, s);
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                const auto& g = *fam.grid;
                const auto& v = *fam.values;
                const std::size_t i = g.floor_index(t);
                const std::size_t j = g.floor_index(s);
                const std::size_t i1 = std::min(i + 1, g.size() - 1);
                const std::size_t j1 = std::min(j + 1, g.size() - 1);
                const double dt = g.node(i1) > g.node(i)
                                      ? (t - g.node(i)) / (g.node(i1) - g.node(i)) : 0.0;
                const double ds = g.node(j1) > g.node(j)
                                      ? (s - g.node(j)) / (g.node(j1) - g.node(j)) : 0.0;
                const double a = v(i, j) * (1 - dt) + v(i1, j) * dt;
                const double b = v(i, j1) * (1 - dt) + v(i1, j1) * dt;
                return a * (1 - ds) + b * ds;
            } else {
                static_assert(std::is_same_v<T, Perturbed>);
                return fam.base->eval(t, s) + fam.amplitude * bump_value(fam.bump_shape, t, s);
            }
        },
        family_);
}

double KernelSpec::deriv_t(double t, double s) const {
    if (deriv_mode_ == DerivativeMode::Analytic) {
        if (std::holds_alternative<Wiener>(family_)) return 0.0;
        if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&family_))
            return (s <= t) ? -ou->rate * eval(t, s) : 0.0;
        if (std::holds_alternative<BrownianBridge>(family_))
            return (s <= t && s < 1.0) ? -1.0 / (1.0 - s) : 0.0;
    }
    const double d = fd_step_;
    const double tl = std::max(t - d, s), tr = std::min(t + d, 1.0);
    if (!(tr > tl)) return 0.0;
    return (eval(tr, s) - eval(tl, s)) / (tr - tl);
}

std::string KernelSpec::name() const {
    return std::visit(
        [&](const auto& fam) -> std::string {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, Wiener>) return "wiener";
            else if constexpr (std::is_same_v<T, BrownianBridge>) return "bridge";
            else if constexpr (std::is_same_v<T, OrnsteinUhlenbeck>)
                return "ou(rate=" + std::to_string(fam.rate) + ")";
            else if constexpr (std::is_same_v<T, FractionalBM>)
                return "fbm(H=" + std::to_string(fam.hurst) + ",c=" + std::to_string(fam.scale) + ")";
            else if constexpr (std::is_same_v<T, Tabulated>) return "tabulated";
            else return "perturbed(" + fam.base->name() + ",a=" + std::to_string(fam.amplitude) +
                        ",shape=" + std::to_string(fam.bump_shape) + ")";
        },
        family_);
}

bool KernelSpec::is_fractional() const {
    return std::holds_alternative<FractionalBM>(family_);
}

double KernelSpec::left_endpoint_power() const {
    if (const auto* f = std::get_if<FractionalBM>(&family_)) {
        if (f->hurst > 0.5) return 1.0 / (2.0 - 2.0 * f->hurst) + 1.0;
    }
    return 0.0;
}

double KernelSpec::diagonal_power() const {
    if (const auto* f = std::get_if<FractionalBM>(&family_)) {
        if (f->hurst < 0.5) return 0.5 / f->hurst + 0.5;
    }
    return 0.0;
}

GridFunction kernel_slice(const KernelSpec& spec, double t, TimeGrid::Ptr grid) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("kernel_slice: t must be in [0,1]");
    std::vector<double> v(grid->size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double s = grid->node(i);
        if (s <= t) v[i] = spec.eval(t, s);
    }
    return GridFunction(std::move(grid), std::move(v));
}

ValidationReport validate_kernel(const KernelSpec& spec, TimeGrid::Ptr grid) {
    ValidationReport rep;
    const auto& nodes = grid->nodes();
    const std::size_t m = nodes.size();

    rep.volterra_ok = true;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (spec.eval(nodes[i], nodes[j]) != 0.0) {
                rep.volterra_ok = false;
                rep.warnings.push_back("kernel does not vanish above the diagonal");
                break;
            }
        }
        if (!rep.volterra_ok) break;
    }

    double min_abs = std::numeric_limits<double>::infinity();
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) {
        const GridFunction g = kernel_slice(spec, nodes[i], grid);
        // segment trapezoid over the support [0, t_i]: the edge node carries
        // half weight, so indicator-type slices integrate exactly
        for (std::size_t j = 0; j < m; ++j) sq[j] = g[j] * g[j];
        rep.sup_l2 = std::max(rep.sup_l2, grid->segment_integral(sq, 0, i));
        for (std::size_t j = 0; j <= i; ++j) min_abs = std::min(min_abs, std::abs(g[j]));
    }

    rep.kernel_at_origin = spec.eval(0.0, 0.0);

    // Lipschitz-in-t estimate over adjacent grid times; s restricted to the
    // common support [0, t_i] so that the moving indicator edge is not counted.
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double dt = nodes[i + 1] - nodes[i];
        for (std::size_t j = 0; j <= i; ++j) {
            const double diff =
                std::abs(spec.eval(nodes[i + 1], nodes[j]) - spec.eval(nodes[i], nodes[j]));
            rep.lipschitz_l = std::max(rep.lipschitz_l, diff / dt);
        }
    }

    if (std::abs(rep.kernel_at_origin) < 1e-9)
        rep.warnings.push_back(
            "K(0,0) is numerically zero: small-time envelope and local-time criteria do not apply");
    if (const auto* f = std::get_if<KernelSpec::FractionalBM>(&spec.family())) {
        if (f->hurst < 0.5)
            rep.warnings.push_back(
                "fractional kernel with H<1/2 is experimental: singular along the diagonal, "
                "Lipschitz estimate is the observed grid maximum only");
    }
    if (min_abs < 1e-12)
        rep.warnings.push_back(
            "kernel attains zero on the triangle: the minimum-kernel sufficient condition "
            "for local times does not cover this kernel");
    return rep;
}

double fractional_variance_at_one(double hurst, double scale) {
    auto k2 = [&](double r) {
        const double v = fractional_eval(hurst, scale, 1.0, r);
        return v * v;
    };
    if (hurst > 0.5) {
        // integrand ~ r^{1-2H} near 0
        const double p = 1.0 / (2.0 - 2.0 * hurst) + 1.0;
        return integrate_left_singular(k2, 0.0, 1.0, p, 1e-12, 1e-9);
    }
    // integrand ~ (1-r)^{2H-1} near 1
    const double p = 0.5 / hurst + 0.5;
    return adaptive_simpson(k2, 0.0, 0.5, 1e-12, 1e-9) +
           integrate_right_singular(k2, 0.5, 1.0, p, 1e-12, 1e-9);
}

double calibrate_fractional_scale(double hurst) {
    static std::mutex mu;
    static std::map<double, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(hurst);
        if (it != cache.end()) return it->second;
    }
    const double v1 = fractional_variance_at_one(hurst, 1.0);
    if (!(v1 > 0.0) || !std::isfinite(v1))
        throw std::runtime_error("calibrate_fractional_scale: degenerate variance");
    const double scale = 1.0 / std::sqrt(v1);
    std::lock_guard<std::mutex> lock(mu);
    cache[hurst] = scale;
    return scale;
}

double fractional_covariance_reference(double hurst, double t, double s) {
    return 0.5 * (std::pow(t, 2 * hurst) + std::pow(s, 2 * hurst) -
                  std::pow(std::abs(t - s), 2 * hurst));
}

} // namespace vgp
