#include "vgp/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vgp/errors.hpp"
#include "vgp/hilbert.hpp"
#include "vgp/io.hpp"
#include "vgp/parallel.hpp"
#include "vgp/quadrature.hpp"

namespace vgp {

namespace {

constexpr double kJitterMax = 1e-10; // relative to max diagonal

double product_integral_impl(const KernelSpec& spec, double ta, double tb,
                             double r0, double r1, std::size_t segments) {
    if (!(r1 > r0)) return 0.0;
    auto f = [&](double r) { return spec.eval(ta, r) * spec.eval(tb, r); };

    const double left_p = spec.left_endpoint_power();
    const double diag_p = spec.diagonal_power();
    const double tmin = std::min(ta, tb);

    if (left_p > 0.0 && r0 == 0.0) {
        // integrand singular like a power at r = 0
        if (diag_p > 0.0 && r1 >= tmin) {
            const double mid = 0.5 * r1;
            return integrate_left_singular(f, 0.0, mid, left_p) +
                   integrate_right_singular(f, mid, r1, diag_p);
        }
        return integrate_left_singular(f, 0.0, r1, left_p);
    }
    if (diag_p > 0.0 && r1 >= tmin - 1e-15) {
        const double mid = 0.5 * (r0 + r1);
        return adaptive_simpson_seeded(f, r0, mid, segments / 2 + 1) +
               integrate_right_singular(f, mid, r1, diag_p);
    }
    return adaptive_simpson_seeded(f, r0, r1, segments);
}

} // namespace

double kernel_product_integral(const KernelSpec& spec, double ta, double tb,
                               double r0, double r1, std::size_t initial_segments) {
    return product_integral_impl(spec, ta, tb, r0, r1, initial_segments);
}

double process_variance(const KernelSpec& spec, double t) {
    if (t <= 0.0) return 0.0;
    return kernel_product_integral(spec, t, t, 0.0, t);
}

CovarianceMatrix::CovarianceMatrix(TimeGrid::Ptr grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("CovarianceMatrix: null grid");
    const auto n = static_cast<Eigen::Index>(grid_->size());
    if (values_.rows() != n || values_.cols() != n)
        throw std::invalid_argument("CovarianceMatrix: shape does not match grid");
}

const Eigen::MatrixXd& CovarianceMatrix::cholesky() const {
    std::call_once(factor_once_, [this] {
        const double max_diag = std::max(values_.diagonal().maxCoeff(), 0.0);
        const double neg_tol = 1e-12 * std::max(max_diag, 1e-300);
        double jit = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd a = values_;
            if (jit > 0.0) a.diagonal().array() += jit;
            double min_pivot = 0.0;
            auto [L, det] = cholesky_clamped(a, 1e-14, &min_pivot);
            (void)det;
            if (min_pivot >= -neg_tol) {
                factor_ = std::move(L);
                jitter_ = jit;
                return;
            }
            jit = (jit == 0.0) ? 1e-13 * max_diag : jit * 10.0;
            if (jit > kJitterMax * max_diag) break;
        }
        throw NumericError("CovarianceMatrix: factorization failed within jitter budget");
    });
    return factor_;
}

double CovarianceMatrix::jitter() const {
    cholesky();
    return jitter_;
}

void CovarianceMatrix::write_csv(const std::string& path) const {
    std::vector<std::string> header(grid_->size());
    for (std::size_t i = 0; i < header.size(); ++i)
        header[i] = CsvWriter::format_double(grid_->node(i));
    write_matrix_csv(path, values_, header);
}

CovarianceMatrix cov_matrix(const KernelSpec& spec, TimeGrid::Ptr grid) {
    const std::size_t m = grid->size();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m, m);
    const bool geometric = !grid->is_uniform();

    // one (i,j) block row per task, entries are independent
    parallel_for(m, [&](std::size_t i) {
        const double ti = grid->node(i);
        for (std::size_t j = 0; j <= i; ++j) {
            const double tj = grid->node(j);
            const double tmin = std::min(ti, tj);
            if (tmin <= 0.0) continue;
            // inner rule at least 4x finer than the outer grid (floor of 8),
            // and at least 64 segments on every interval of a geometric grid
            std::size_t cells_in_range = 0;
            for (std::size_t c = 0; c < grid->cells(); ++c)
                if (grid->node(c) < tmin) ++cells_in_range;
            std::size_t seg = std::clamp<std::size_t>(4 * cells_in_range, 8, 64);
            if (geometric) seg = 64;
            const double v = kernel_product_integral(spec, ti, tj, 0.0, tmin, seg);
            R(i, j) = v;
        }
    });
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) R(i, j) = R(j, i);
    return CovarianceMatrix(std::move(grid), std::move(R));
}

PairStats pair_stats(const KernelSpec& spec, double s, double t) {
    if (!(0.0 <= s && s < t && t <= 1.0))
        throw std::invalid_argument("pair_stats: need 0 <= s < t <= 1");
    PairStats ps;
    ps.var_s = kernel_product_integral(spec, s, s, 0.0, s);
    ps.var_t = kernel_product_integral(spec, t, t, 0.0, t);
    ps.cov = kernel_product_integral(spec, t, s, 0.0, s);
    const double tail = kernel_product_integral(spec, t, t, s, t);
    auto dk2 = [&](double r) {
        const double d = spec.eval(t, r) - spec.eval(s, r);
        return d * d;
    };
    double head = 0.0;
    if (s > 0.0) {
        if (spec.left_endpoint_power() > 0.0)
            head = integrate_left_singular(dk2, 0.0, s, spec.left_endpoint_power());
        else if (spec.diagonal_power() > 0.0)
            head = adaptive_simpson_seeded(dk2, 0.0, 0.5 * s, 16) +
                   integrate_right_singular(dk2, 0.5 * s, s, spec.diagonal_power());
        else
            head = adaptive_simpson_seeded(dk2, 0.0, s, 32);
    }
    ps.inc_var = tail + head;
    ps.det2 = ps.var_s * ps.var_t - ps.cov * ps.cov;
    return ps;
}

namespace {

// int over [s0,s1] of s^{-1/2} * 2*(sqrt(max(t1-s,0)) - sqrt(max(t0-s,0))) ds,
// the (s(t-s))^{-1/2} mass of the cell [s0,s1]x[t0,t1] intersected with {s<t}.
double minorant_cell_mass(double s0, double s1, double t0, double t1) {
    auto inner = [&](double s) {
        const double hi = t1 > s ? std::sqrt(t1 - s) : 0.0;
        const double lo = t0 > s ? std::sqrt(t0 - s) : 0.0;
        return 2.0 * (hi - lo);
    };
    // substitute s = u^2 to remove the s^{-1/2} factor
    auto g = [&](double u) { return 2.0 * inner(u * u); };
    return adaptive_simpson(g, std::sqrt(s0), std::sqrt(s1), 1e-13, 1e-10);
}

} // namespace

RudenkoResult rudenko_integral(const KernelSpec& spec, TimeGrid::Ptr grid) {
    const CovarianceMatrix R = cov_matrix(spec, grid);
    const std::size_t m = grid->size();
    const std::size_t cells = grid->cells();
    const auto& t = grid->nodes();

    Eigen::MatrixXd det2_at(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            det2_at(i, j) = R(i, i) * R(j, j) - R(i, j) * R(i, j);

    RudenkoResult out;
    double est = 0.0;
    for (std::size_t ci = 1; ci < cells; ++ci) {
        for (std::size_t cj = 1; cj < cells; ++cj) {
            if (std::max(ci, cj) - std::min(ci, cj) < 2) continue;
            double acc = 0.0;
            for (std::size_t a = 0; a < 2; ++a) {
                for (std::size_t b = 0; b < 2; ++b) {
                    const double det2 = det2_at(ci + a, cj + b);
                    if (!(det2 > 0.0))
                        throw NumericError(
                            "rudenko_integral: nonpositive determinant at (s,t)=(" +
                            std::to_string(t[ci + a]) + "," + std::to_string(t[cj + b]) +
                            "): degenerate process");
                    acc += 1.0 / std::sqrt(det2);
                }
            }
            est += 0.25 * acc * (t[ci + 1] - t[ci]) * (t[cj + 1] - t[cj]);
        }
    }
    out.estimate = est;

    // minorant constant: det2 >= (min K^2)^2 s (t-s) on the triangle
    double min_k2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double k = spec.eval(t[i], t[j]);
            min_k2 = std::min(min_k2, k * k);
        }
    out.minorant_c = min_k2 * min_k2;

    if (out.minorant_c <= 0.0) {
        out.band_bound = std::numeric_limits<double>::infinity();
        return out;
    }

    // excluded band in the upper half {s<t}: diagonal triangles, the
    // super-diagonal ring, and the s-axis strip; doubled for both orders
    double band = 0.0;
    for (std::size_t c = 0; c + 1 < m; ++c)
        band += minorant_cell_mass(t[c], t[c + 1], t[c], t[c + 1]);
    for (std::size_t c = 0; c + 2 < m; ++c)
        band += minorant_cell_mass(t[c], t[c + 1], t[c + 1], t[c + 2]);
    for (std::size_t cj = 2; cj + 1 < m; ++cj)
        band += minorant_cell_mass(t[0], t[1], t[cj], t[cj + 1]);
    out.band_bound = 2.0 * band / std::sqrt(out.minorant_c);
    return out;
}

LndReport lnd_diagnostics(const KernelSpec& spec, TimeGrid::Ptr grid, double zeta) {
    if (!(zeta > 0.0 && zeta < 2.0))
        throw std::invalid_argument("lnd_diagnostics: zeta must be in (0,2)");
    if (!grid->is_uniform())
        throw std::invalid_argument("lnd_diagnostics: requires a uniform grid");

    LndReport rep;
    const std::size_t m = grid->size();
    const std::size_t cells = grid->cells();
    const double h = grid->spacing();
    const auto& t = grid->nodes();

    // cached kernel slices: SL(b, j) = K(t_b, s_j) for j <= b
    Eigen::MatrixXd SL = Eigen::MatrixXd::Zero(m, m);
    parallel_for(m, [&](std::size_t b) {
        for (std::size_t j = 0; j <= b; ++j) SL(b, j) = spec.eval(t[b], t[j]);
    });
    // prefix trapezoids of K(t_b,.)^2: P(b, j) = int_0^{t_j}
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t b = 0; b < m; ++b)
        for (std::size_t j = 1; j <= b; ++j)
            P(b, j) = P(b, j - 1) + 0.5 * h * (SL(b, j - 1) * SL(b, j - 1) + SL(b, j) * SL(b, j));

    std::vector<std::size_t> window_cells;
    for (int j = 2;; ++j) {
        const double c = std::pow(2.0, -j);
        const std::size_t wc = static_cast<std::size_t>(std::llround(c * cells));
        if (wc < 4) {
            rep.warnings.push_back("window 2^-" + std::to_string(j) +
                                   " is below 4 grid cells; skipped");
            break;
        }
        rep.windows.push_back(c);
        window_cells.push_back(wc);
    }

    const std::size_t max_gap = window_cells.empty() ? 0 : window_cells.front();
    std::vector<double> min_by_gap(max_gap + 1, std::numeric_limits<double>::infinity());
    for (std::size_t b = 2; b < m; ++b) {
        const std::size_t gmax = std::min<std::size_t>(max_gap, b - 1);
        for (std::size_t g = 1; g <= gmax; ++g) {
            const std::size_t a = b - g; // s index, a >= 1
            double den = 0.0;
            for (std::size_t j = 1; j <= a; ++j) {
                const double d0 = SL(b, j - 1) - SL(a, j - 1);
                const double d1 = SL(b, j) - SL(a, j);
                den += 0.5 * h * (d0 * d0 + d1 * d1);
            }
            if (den <= 1e-300) continue; // independent increments: +inf sentinel
            const double num = P(b, b) - P(b, a);
            min_by_gap[g] = std::min(min_by_gap[g], num / den);
        }
    }
    for (std::size_t wi = 0; wi < window_cells.size(); ++wi) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t g = 1; g <= window_cells[wi]; ++g)
            best = std::min(best, min_by_gap[g]);
        rep.berman_ratio.push_back(best);
    }

    for (std::size_t wi = 0; wi < window_cells.size(); ++wi) {
        const std::size_t b = window_cells[wi]; // node at t = window
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < b; ++a) {
            const double gap = t[b] - t[a];
            const double val = std::pow(gap, -zeta) * (P(b, b) - P(b, a));
            best = std::min(best, val);
        }
        rep.zeta_liminf.push_back(best);
    }

    for (std::size_t wi = 0; wi < window_cells.size(); ++wi) {
        rep.strong_lnd_k3.push_back(strong_lnd_ratio(spec, grid, 3, window_cells[wi]));
        rep.strong_lnd_k4.push_back(strong_lnd_ratio(spec, grid, 4, window_cells[wi]));
    }
    return rep;
}

double strong_lnd_ratio(const KernelSpec& spec, TimeGrid::Ptr grid, int k,
                        std::size_t window_cells, double anchor) {
    if (k < 2) throw std::invalid_argument("strong_lnd_ratio: k must be >= 2");
    if (!grid->is_uniform())
        throw std::invalid_argument("strong_lnd_ratio: requires a uniform grid");
    const std::size_t cells = grid->cells();
    const std::size_t span = static_cast<std::size_t>(k - 1) * window_cells;
    if (span >= cells)
        throw std::invalid_argument("strong_lnd_ratio: window too wide for the grid");
    std::size_t i0 = static_cast<std::size_t>(std::llround(anchor * cells));
    if (i0 + span > cells) i0 = cells - span;

    std::vector<GridFunction> increments;
    GridFunction prev = kernel_slice(spec, grid->node(i0), grid);
    for (int mstep = 1; mstep < k; ++mstep) {
        GridFunction next = kernel_slice(spec, grid->node(i0 + mstep * window_cells), grid);
        increments.push_back(next - prev);
        prev = std::move(next);
    }
    const GramResult gr = gram(increments);
    double prod = 1.0;
    for (Eigen::Index i = 0; i < gr.matrix.rows(); ++i) prod *= gr.matrix(i, i);
    if (!(prod > 0.0)) throw NumericError("strong_lnd_ratio: vanishing increment norm");
    return gr.determinant / prod;
}

double integrator_constant(const CovarianceMatrix& cov, std::size_t trials, Seed seed) {
    if (trials < 1) throw std::invalid_argument("integrator_constant: trials must be >= 1");
    const std::size_t m = cov.size();
    const auto& t = cov.grid().nodes();
    double best = 0.0;
    std::vector<std::size_t> pick;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        RandomStream rs(seed.derived(trial));
        // uniform draws occupy counters 0..63, normal draws 64..127
        const std::size_t size =
            2 + static_cast<std::size_t>(rs.uniform(0) * 31.0); // 2..32
        pick.clear();
        for (std::size_t d = 1; pick.size() < std::min(size, m); ++d) {
            const auto idx = static_cast<std::size_t>(rs.uniform(d) * static_cast<double>(m));
            const std::size_t clamped = std::min(idx, m - 1);
            if (std::find(pick.begin(), pick.end(), clamped) == pick.end())
                pick.push_back(clamped);
            if (d > 4096) break; // cannot happen for m >= 33, guards tiny grids
        }
        std::sort(pick.begin(), pick.end());
        if (pick.size() < 2) continue;
        const std::size_t n_inc = pick.size() - 1;
        double num = 0.0, den = 0.0;
        std::vector<double> a(n_inc);
        for (std::size_t kk = 0; kk < n_inc; ++kk) a[kk] = rs.normal(64 + kk);
        for (std::size_t kk = 0; kk < n_inc; ++kk) {
            den += a[kk] * a[kk] * (t[pick[kk + 1]] - t[pick[kk]]);
            for (std::size_t ll = 0; ll < n_inc; ++ll) {
                const double ckl = cov(pick[kk + 1], pick[ll + 1]) - cov(pick[kk + 1], pick[ll]) -
                                   cov(pick[kk], pick[ll + 1]) + cov(pick[kk], pick[ll]);
                num += a[kk] * a[ll] * ckl;
            }
        }
        if (den > 0.0) best = std::max(best, num / den);
    }
    return best;
}

double integrator_constant(const KernelSpec& spec, TimeGrid::Ptr grid,
                           std::size_t trials, Seed seed) {
    return integrator_constant(cov_matrix(spec, std::move(grid)), trials, seed);
}

} // namespace vgp
