#include "vgp/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vgp/covariance.hpp"
#include "vgp/errors.hpp"
#include "vgp/parallel.hpp"
#include "vgp/quadrature.hpp"

namespace vgp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double mollifier(double z, double y, double eps) {
    const double d = z - y;
    return std::exp(-d * d / (2.0 * eps)) / std::sqrt(kTwoPi * eps);
}

// int over [s0,s1] x [t0,t1] (t0 >= s1) of (t-s)^{-1/2}
double inv_sqrt_gap_rect(double s0, double s1, double t0, double t1) {
    auto g = [](double x) { return std::pow(std::max(x, 0.0), 1.5); };
    return (4.0 / 3.0) * (g(t1 - s0) - g(t1 - s1) - g(t0 - s0) + g(t0 - s1));
}

} // namespace

LocalTimeCurve mollified_local_time(std::span<const double> path, TimeGrid::Ptr grid,
                                    double eps, double y) {
    if (!(eps > 0.0)) throw std::invalid_argument("mollified_local_time: eps must be > 0");
    if (path.size() != grid->size())
        throw std::invalid_argument("mollified_local_time: path length does not match grid");
    LocalTimeCurve curve;
    curve.epsilon = eps;
    curve.level = y;
    curve.values.resize(grid->size(), 0.0);
    double prev = mollifier(path[0], y, eps);
    for (std::size_t i = 1; i < grid->size(); ++i) {
        const double cur = mollifier(path[i], y, eps);
        const double dt = grid->node(i) - grid->node(i - 1);
        curve.values[i] = curve.values[i - 1] + 0.5 * dt * (prev + cur);
        prev = cur;
    }
    curve.grid = std::move(grid);
    return curve;
}

double occupation_mass(std::span<const double> path, TimeGrid::Ptr grid,
                       double eps, std::size_t t_index) {
    if (!(eps > 0.0)) throw std::invalid_argument("occupation_mass: eps must be > 0");
    if (path.size() != grid->size())
        throw std::invalid_argument("occupation_mass: path length does not match grid");
    if (t_index >= grid->size())
        throw std::invalid_argument("occupation_mass: t_index out of range");

    const double root = std::sqrt(eps);
    const auto [mn, mx] = std::minmax_element(path.begin(), path.end());
    const double lo = *mn - 8.0 * root;
    const double hi = *mx + 8.0 * root;
    const double dy = root / 8.0;
    const auto ny = static_cast<std::size_t>(std::ceil((hi - lo) / dy)) + 1;

    // sum over the level grid first; the result is the time-trapezoid of a
    // value that equals 1 up to mollifier tail truncation
    double acc = 0.0;
    for (std::size_t i = 1; i <= t_index; ++i) {
        const double dt = grid->node(i) - grid->node(i - 1);
        for (std::size_t step = 0; step < 2; ++step) {
            const double x = path[step == 0 ? i - 1 : i];
            double mass = 0.0;
            for (std::size_t k = 0; k < ny; ++k) mass += mollifier(x, lo + dy * k, eps);
            acc += 0.5 * dt * mass * dy;
        }
    }
    return acc;
}

double expected_local_time(const KernelSpec& spec, double t, double y, double eps) {
    if (!(t > 0.0 && t <= 1.0))
        throw std::invalid_argument("expected_local_time: t must be in (0,1]");
    if (eps < 0.0) throw std::invalid_argument("expected_local_time: eps must be >= 0");

    auto integrand = [&](double s) {
        const double v = process_variance(spec, s) + eps;
        if (!(v > 0.0))
            throw NumericError("expected_local_time: degenerate variance with eps = 0");
        return std::exp(-y * y / (2.0 * v)) / std::sqrt(kTwoPi * v);
    };
    if (eps > 0.0) return adaptive_simpson_seeded(integrand, 0.0, t, 16, 1e-11, 1e-8);
    // eps = 0: the integrand blows up like sigma^{-1}(s) at s = 0; the power-8
    // substitution absorbs variance growth sigma^2 ~ s^gamma up to gamma = 1.75
    return integrate_left_singular(integrand, 0.0, t, 8.0, 1e-12, 1e-8);
}

LocalTimeCurveStats local_time_curve_stats(const PathEnsemble& ens, double eps, double y) {
    const std::size_t n = ens.n_paths();
    const std::size_t m = ens.grid->size();
    if (n < 2) throw std::invalid_argument("local_time_curve_stats: need at least 2 paths");

    Eigen::MatrixXd curves(n, m);
    parallel_for(n, [&](std::size_t p) {
        std::vector<double> path(m);
        for (std::size_t i = 0; i < m; ++i) path[i] = ens.paths(p, i);
        const LocalTimeCurve c = mollified_local_time(path, ens.grid, eps, y);
        for (std::size_t i = 0; i < m; ++i) curves(p, i) = c.values[i];
    });

    LocalTimeCurveStats st;
    st.grid = ens.grid;
    st.epsilon = eps;
    st.level = y;
    st.mean.resize(m);
    st.std_err.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double mu = curves.col(i).mean();
        const double var = (curves.col(i).array() - mu).square().sum() / double(n - 1);
        st.mean[i] = mu;
        st.std_err[i] = std::sqrt(std::max(var, 0.0) / double(n));
    }
    return st;
}

BandedValue l2_moment_formula(const KernelSpec& spec, TimeGrid::Ptr grid) {
    const CovarianceMatrix R = cov_matrix(spec, grid);
    const std::size_t m = grid->size();
    const auto& t = grid->nodes();

    auto inc_var = [&](std::size_t i, std::size_t j) {
        return R(i, i) + R(j, j) - 2.0 * R(i, j);
    };

    BandedValue out;
    double est = 0.0;
    for (std::size_t ci = 0; ci + 1 < m; ++ci) {        // s cell
        for (std::size_t cj = ci + 2; cj + 1 < m; ++cj) { // t cell, off the band
            double acc = 0.0;
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = 0; b < 2; ++b) {
                    const double v = inc_var(ci + a, cj + b);
                    if (!(v > 0.0))
                        throw NumericError("l2_moment_formula: vanishing increment variance off the diagonal");
                    acc += 1.0 / std::sqrt(v);
                }
            est += 0.25 * acc * (t[ci + 1] - t[ci]) * (t[cj + 1] - t[cj]);
        }
    }
    out.estimate = est / std::numbers::pi;

    // near-diagonal minorant incVar >= c (t-s); the constant is read off the
    // first two rings, where the ratio is monotone for smooth kernels
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        c = std::min(c, inc_var(i, i + 1) / (t[i + 1] - t[i]));
        if (i + 2 < m) c = std::min(c, inc_var(i, i + 2) / (t[i + 2] - t[i]));
    }
    c *= 1.0 - 1e-3;
    if (!(c > 0.0)) throw NumericError("l2_moment_formula: degenerate near-diagonal variance");

    double band = 0.0;
    for (std::size_t ci = 0; ci + 1 < m; ++ci) {
        band += (4.0 / 3.0) * std::pow(t[ci + 1] - t[ci], 1.5); // diagonal triangle
        if (ci + 2 < m)
            band += inv_sqrt_gap_rect(t[ci], t[ci + 1], t[ci + 1], t[ci + 2]);
    }
    out.band_bound = band / (std::numbers::pi * std::sqrt(c));
    return out;
}

ContinuityResult kernel_continuity_experiment(const KernelSpec& base,
                                              const std::vector<double>& amplitudes,
                                              TimeGrid::Ptr grid, std::size_t n, Seed seed,
                                              int bump_shape) {
    if (amplitudes.empty())
        throw std::invalid_argument("kernel_continuity_experiment: empty amplitude list");
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        if (!(amplitudes[i] >= 0.0))
            throw std::invalid_argument("kernel_continuity_experiment: amplitudes must be >= 0");
        if (i > 0 && !(amplitudes[i] < amplitudes[i - 1]))
            throw std::invalid_argument("kernel_continuity_experiment: amplitudes must be decreasing");
    }

    if (!grid->is_uniform())
        throw std::invalid_argument("kernel_continuity_experiment: requires a uniform grid");
    const std::size_t m = grid->size();
    const auto& t = grid->nodes();
    const std::size_t rn = 4 * grid->cells(); // midpoint refinement, shared by all terms
    const double dr = 1.0 / static_cast<double>(rn);

    ContinuityResult result;

    // base kernel sampled once on (node, midpoint-r)
    Eigen::MatrixXd KB(m, rn);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < rn; ++r)
            KB(i, r) = base.eval(t[i], (static_cast<double>(r) + 0.5) * dr);

    // shared driving noise for the cross-check column
    PathEnsemble ref;
    if (n >= 2) ref = sample_volterra(base, grid, n, seed);

    for (const double a : amplitudes) {
        const KernelSpec pert = KernelSpec::perturbed(base, a, bump_shape);
        ContinuityRow row;
        row.amplitude = a;

        Eigen::MatrixXd KA(m, rn);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < rn; ++r)
                KA(i, r) = pert.eval(t[i], (static_cast<double>(r) + 0.5) * dr);

        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                row.sup_diff = std::max(row.sup_diff,
                                        std::abs(pert.eval(t[i], t[j]) - base.eval(t[i], t[j])));

        // E (X_a(t)-X(t))^2 = int_0^t (K_a - K)^2 under one driving noise
        for (std::size_t i = 0; i < m; ++i) {
            const double gap = (KA.row(i) - KB.row(i)).array().square().sum() * dr;
            row.max_var_gap = std::max(row.max_var_gap, gap);
        }

        // combined integrand of the three-term expansion on node pairs,
        // shared r-rule so the near-cancelling terms see identical quadrature:
        //   Va^{-1/2} + V^{-1/2} - Vx1^{-1/2} - Vx2^{-1/2}
        const double h = grid->spacing();
        double l2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {        // s node
            for (std::size_t j = i + 2; j < m; ++j) { // t node, off the band
                const auto da = (KA.row(j) - KA.row(i)).array();
                const auto db = (KB.row(j) - KB.row(i)).array();
                const auto dx1 = (KA.row(j) - KB.row(i)).array();
                const auto dx2 = (KB.row(j) - KA.row(i)).array();
                const double va = da.square().sum() * dr;
                const double vb = db.square().sum() * dr;
                const double v1 = dx1.square().sum() * dr;
                const double v2 = dx2.square().sum() * dr;
                if (!(va > 0.0 && vb > 0.0 && v1 > 0.0 && v2 > 0.0))
                    throw NumericError("kernel_continuity_experiment: degenerate joint variance");
                const double g = 1.0 / std::sqrt(va) + 1.0 / std::sqrt(vb) -
                                 1.0 / std::sqrt(v1) - 1.0 / std::sqrt(v2);
                l2 += g * h * h;
            }
        }
        row.l2_gap = l2 / std::numbers::pi;

        if (ref.has_noise && a > 0.0) {
            // cross-check: rebuild the perturbation from the same noise
            const auto& tt = grid->nodes();
            Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(m, grid->cells());
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < i; ++j) {
                    const double mid = 0.5 * (tt[j] + tt[j + 1]);
                    dK(i, j) = pert.eval(tt[i], mid) - base.eval(tt[i], mid);
                }
            const Eigen::MatrixXd D = ref.noise * dK.transpose(); // N x m
            bool disagree = false;
            for (std::size_t i = 0; i < m && !disagree; ++i) {
                const double emp = D.col(i).array().square().mean();
                const double ana = (KA.row(i) - KB.row(i)).array().square().sum() * dr;
                const double se = std::sqrt(
                    (D.col(i).array().square() - emp).square().sum() /
                    double(ref.n_paths() * (ref.n_paths() - 1)));
                disagree = std::abs(emp - ana) > 5.0 * se + 0.02 * ana + 1e-12;
            }
            if (disagree)
                result.warnings.push_back(
                    "shared-noise cross-check disagrees with the analytic variance gap at amplitude " +
                    std::to_string(a));
        }
        result.rows.push_back(row);
    }
    return result;
}

} // namespace vgp
