#include "vgp/silt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vgp/covariance.hpp"
#include "vgp/errors.hpp"
#include "vgp/hilbert.hpp"
#include "vgp/parallel.hpp"
#include "vgp/quadrature.hpp"

namespace vgp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_stationary(const PlanarEnsemble& ens) {
    if (!ens.component1.kernel || !ens.component1.kernel->stationary())
        throw ValidationError("silt requires stationary kernel");
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

inline double mollifier2(double q_sq, double eps) {
    return std::exp(-q_sq / (2.0 * eps)) / (kTwoPi * eps);
}

// lattice pair weights for k = 2: h_i h_j off the diagonal, halved on it
inline double pair_weight(const TimeGrid& g, std::size_t i, std::size_t j) {
    const auto& t = g.nodes();
    const double hi = (i + 1 < t.size()) ? t[i + 1] - t[i] : t[i] - t[i - 1];
    const double hj = (j + 1 < t.size()) ? t[j + 1] - t[j] : t[j] - t[j - 1];
    return (i == j) ? 0.5 * hi * hj : hi * hj;
}

SiltEstimate silt_impl(const PlanarEnsemble& ens, double eps, const SimplexConfig& cfg,
                       bool renormalized) {
    require_stationary(ens);
    if (!(eps > 0.0)) throw std::invalid_argument("silt: eps must be > 0");
    if (cfg.k < 2) throw std::invalid_argument("silt: k must be >= 2");
    if (cfg.mode == SimplexConfig::Mode::GridNested && cfg.k > 3)
        throw std::invalid_argument("silt: GridNested supports k in {2,3}");
    if (cfg.mode == SimplexConfig::Mode::MonteCarlo && cfg.samples < 1000)
        throw std::invalid_argument("silt: MonteCarlo needs at least 1000 samples");

    const TimeGrid& grid = ens.grid();
    const std::size_t m = grid.size();
    const std::size_t n = ens.n_paths();
    const auto& t = grid.nodes();

    // analytic centering over node pairs, shared across paths
    Eigen::MatrixXd c;
    if (renormalized) {
        const CovarianceMatrix R = cov_matrix(*ens.component1.kernel, ens.component1.grid);
        c.resize(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double v = R(i, i) + R(j, j) - 2.0 * R(i, j);
                c(i, j) = 1.0 / (kTwoPi * (std::max(v, 0.0) + eps));
            }
    }

    // Monte Carlo node tuples, shared across paths
    std::vector<std::vector<std::size_t>> tuples;
    if (cfg.mode == SimplexConfig::Mode::MonteCarlo) {
        tuples.resize(cfg.samples);
        const std::size_t cells = grid.cells();
        for (std::size_t s = 0; s < cfg.samples; ++s) {
            RandomStream rs(cfg.mc_seed.derived(s));
            std::vector<std::size_t> idx(cfg.k);
            for (int i = 0; i < cfg.k; ++i) {
                const double u = rs.uniform(static_cast<std::uint64_t>(i));
                idx[static_cast<std::size_t>(i)] =
                    std::min<std::size_t>(static_cast<std::size_t>(std::llround(u * cells)), m - 1);
            }
            std::sort(idx.begin(), idx.end());
            tuples[s] = std::move(idx);
        }
    }

    SiltEstimate est;
    est.per_path.assign(n, 0.0);
    est.epsilon = eps;
    est.k = cfg.k;
    est.renormalized = renormalized;

    const auto& x1 = ens.component1.paths;
    const auto& x2 = ens.component2.paths;
    auto factor = [&](std::size_t p, std::size_t i, std::size_t j) {
        const double d1 = x1(p, j) - x1(p, i);
        const double d2 = x2(p, j) - x2(p, i);
        const double f = mollifier2(d1 * d1 + d2 * d2, eps);
        return renormalized ? f - c(i, j) : f;
    };

    parallel_for(n, [&](std::size_t p) {
        double acc = 0.0;
        if (cfg.mode == SimplexConfig::Mode::GridNested) {
            if (cfg.k == 2) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = i; j < m; ++j) {
                        if (t[j] - t[i] < cfg.diagonal_cutoff) continue;
                        acc += pair_weight(grid, i, j) * factor(p, i, j);
                    }
            } else { // k == 3, cubic lattice sum
                const auto& tn = t;
                auto node_w = [&](std::size_t i) {
                    return (i + 1 < m) ? tn[i + 1] - tn[i] : tn[i] - tn[i - 1];
                };
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = i; j < m; ++j) {
                        if (t[j] - t[i] < cfg.diagonal_cutoff) continue;
                        const double fij = factor(p, i, j);
                        const double wij = node_w(i) * node_w(j);
                        for (std::size_t l = j; l < m; ++l) {
                            if (t[l] - t[j] < cfg.diagonal_cutoff) continue;
                            double w = wij * node_w(l);
                            if (i == j && j == l) w /= 6.0;       // ordering multiplicity
                            else if (i == j || j == l) w /= 2.0;
                            acc += w * fij * factor(p, j, l);
                        }
                    }
            }
        } else {
            const double inv_kfac = 1.0 / factorial(cfg.k);
            for (const auto& idx : tuples) {
                bool keep = true;
                double prod = 1.0;
                for (int q = 0; q + 1 < cfg.k; ++q) {
                    const std::size_t a = idx[static_cast<std::size_t>(q)];
                    const std::size_t b = idx[static_cast<std::size_t>(q + 1)];
                    if (t[b] - t[a] < cfg.diagonal_cutoff) { keep = false; break; }
                    prod *= factor(p, a, b);
                }
                if (keep) acc += prod * inv_kfac;
            }
            acc /= static_cast<double>(tuples.size());
        }
        est.per_path[p] = acc;
    });

    double mean = 0.0;
    for (double v : est.per_path) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : est.per_path) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    est.mean = mean;
    est.variance = var;
    est.std_err = std::sqrt(var / static_cast<double>(n));
    return est;
}

} // namespace

SiltEstimate silt_plain(const PlanarEnsemble& ens, double eps, const SimplexConfig& cfg) {
    return silt_impl(ens, eps, cfg, false);
}

SiltEstimate silt_rosen(const PlanarEnsemble& ens, double eps, const SimplexConfig& cfg) {
    return silt_impl(ens, eps, cfg, true);
}

double expected_silt2(const KernelSpec& spec, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("expected_silt2: eps must be > 0");
    auto outer = [&](double t) {
        auto inner = [&](double s) {
            const double v = (t - s > 1e-14) ? pair_stats(spec, s, t).inc_var : 0.0;
            return 1.0 / (kTwoPi * (v + eps));
        };
        return adaptive_simpson(inner, 0.0, t, 1e-11, 1e-8, 24);
    };
    return adaptive_simpson(outer, 0.0, 1.0, 1e-10, 1e-8, 24);
}

double expected_silt2_grid(const KernelSpec& spec, TimeGrid::Ptr grid, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("expected_silt2_grid: eps must be > 0");
    const CovarianceMatrix R = cov_matrix(spec, grid);
    const std::size_t m = grid->size();
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const double v = std::max(R(i, i) + R(j, j) - 2.0 * R(i, j), 0.0);
            acc += pair_weight(*grid, i, j) / (kTwoPi * (v + eps));
        }
    return acc;
}

FwIntegralResult regularized_fw_integral(const KernelSpec& spec, TimeGrid::Ptr grid,
                                         const GridFunction& h1, const GridFunction& h2,
                                         const SimplexConfig& cfg) {
    if (!spec.stationary())
        throw ValidationError("silt requires stationary kernel");
    if (std::abs(spec.eval(0.0, 0.0)) < 1e-12)
        throw ValidationError("regularized_fw_integral: kernel must not vanish at the origin");
    if (cfg.k < 2) throw std::invalid_argument("regularized_fw_integral: k must be >= 2");
    if (cfg.samples < 1000)
        throw std::invalid_argument("regularized_fw_integral: needs at least 1000 samples");
    const double spacing_min =
        grid->is_uniform() ? grid->spacing() : 1.0 / static_cast<double>(grid->cells());
    if (cfg.diagonal_cutoff < 2.0 * spacing_min)
        throw std::invalid_argument(
            "regularized_fw_integral: diagonal cutoff must be at least two grid cells");

    const std::size_t m = grid->size();
    const std::size_t cells = grid->cells();
    const auto& t = grid->nodes();
    const double inv_kfac = 1.0 / factorial(cfg.k);
    const double half_cutoff = 0.5 * cfg.diagonal_cutoff;

    std::vector<double> full(cfg.samples, 0.0), half(cfg.samples, 0.0);
    parallel_for(cfg.samples, [&](std::size_t s) {
        RandomStream rs(cfg.mc_seed.derived(s));
        std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.k));
        for (int i = 0; i < cfg.k; ++i) {
            const double u = rs.uniform(static_cast<std::uint64_t>(i));
            idx[static_cast<std::size_t>(i)] =
                std::min<std::size_t>(static_cast<std::size_t>(std::llround(u * cells)), m - 1);
        }
        std::sort(idx.begin(), idx.end());
        double min_gap = 2.0;
        for (int i = 0; i + 1 < cfg.k; ++i)
            min_gap = std::min(min_gap, t[idx[static_cast<std::size_t>(i + 1)]] -
                                            t[idx[static_cast<std::size_t>(i)]]);
        if (min_gap < half_cutoff) return; // below both cutoffs: contributes 0

        std::vector<GridFunction> incs;
        incs.reserve(static_cast<std::size_t>(cfg.k - 1));
        GridFunction prev = kernel_slice(spec, t[idx[0]], grid);
        for (int i = 1; i < cfg.k; ++i) {
            GridFunction next = kernel_slice(spec, t[idx[static_cast<std::size_t>(i)]], grid);
            incs.push_back(next - prev);
            prev = std::move(next);
        }
        const auto ortho = gram_schmidt(incs);
        double prod = 1.0;
        for (const auto& e : ortho) {
            const double nsq = e.norm_sq();
            const double c1 = inner_product(h1, e);
            const double c2 = inner_product(h2, e);
            prod *= (std::exp(-0.5 * (c1 * c1 + c2 * c2) / nsq) - 1.0) / nsq;
        }
        half[s] = prod * inv_kfac;
        if (min_gap >= cfg.diagonal_cutoff) full[s] = prod * inv_kfac;
    });

    auto stats = [&](const std::vector<double>& vals) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(vals.size() - 1);
        return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(vals.size())));
    };

    FwIntegralResult r;
    const auto [mf, sf] = stats(full);
    const auto [mh, sh] = stats(half);
    (void)sh;
    r.estimate = mf;
    r.std_err = sf;
    r.estimate_half_cutoff = mh;
    r.cutoff_sensitivity = std::abs(mh - mf);
    return r;
}

FwTransformResult fw_transform_mc(const PlanarEnsemble& ens, const std::vector<double>& times,
                                  double eps, const GridFunction& h1, const GridFunction& h2) {
    require_stationary(ens);
    if (!(eps > 0.0)) throw std::invalid_argument("fw_transform_mc: eps must be > 0");
    if (times.size() < 2) throw std::invalid_argument("fw_transform_mc: need k >= 2 times");
    if (!ens.component1.has_noise)
        throw std::invalid_argument("fw_transform_mc: ensemble has no noise matrix "
                                    "(use the Volterra sampler)");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("fw_transform_mc: times must be strictly increasing");

    const TimeGrid& grid = ens.grid();
    const TimeGrid::Ptr gp = ens.component1.grid;
    const std::size_t cells = grid.cells();
    const std::size_t n = ens.n_paths();
    const auto& t = grid.nodes();

    std::vector<std::size_t> idx(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) idx[i] = grid.nearest_index(times[i]);

    // midpoint samples of h against the noise increments; the compensator uses
    // the same coefficients, so the weight has unit mean exactly
    std::vector<double> c1(cells), c2(cells);
    double comp = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
        c1[j] = 0.5 * (h1[j] + h1[j + 1]);
        c2[j] = 0.5 * (h2[j] + h2[j + 1]);
        comp += (c1[j] * c1[j] + c2[j] * c2[j]) * (t[j + 1] - t[j]);
    }
    comp *= 0.5;

    const auto& x1 = ens.component1.paths;
    const auto& x2 = ens.component2.paths;
    const auto& w1 = ens.component1.noise;
    const auto& w2 = ens.component2.noise;

    std::vector<double> prod_vals(n), weight_vals(n);
    parallel_for(n, [&](std::size_t p) {
        double alpha = 1.0;
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
            const double d1 = x1(p, idx[i + 1]) - x1(p, idx[i]);
            const double d2 = x2(p, idx[i + 1]) - x2(p, idx[i]);
            alpha *= mollifier2(d1 * d1 + d2 * d2, eps);
        }
        double iw = 0.0;
        for (std::size_t j = 0; j < cells; ++j)
            iw += c1[j] * w1(p, j) + c2[j] * w2(p, j);
        const double weight = std::exp(iw - comp);
        prod_vals[p] = alpha * weight;
        weight_vals[p] = weight;
    });

    auto stats = [&](const std::vector<double>& vals) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(vals.size() - 1);
        return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(vals.size())));
    };

    FwTransformResult r;
    std::tie(r.estimate, r.std_err) = stats(prod_vals);
    std::tie(r.weight_mean, r.weight_std_err) = stats(weight_vals);

    // closed-form Gaussian value from the increment Gram matrix
    const auto& spec = *ens.component1.kernel;
    std::vector<GridFunction> incs;
    GridFunction prev = kernel_slice(spec, t[idx[0]], gp);
    for (std::size_t i = 1; i < idx.size(); ++i) {
        GridFunction next = kernel_slice(spec, t[idx[i]], gp);
        incs.push_back(next - prev);
        prev = std::move(next);
    }
    const GramResult gr = gram(incs);
    Eigen::MatrixXd A = gr.matrix;
    A.diagonal().array() += eps;
    const auto k1 = static_cast<Eigen::Index>(incs.size());
    Eigen::VectorXd u1(k1), u2(k1);
    for (Eigen::Index i = 0; i < k1; ++i) {
        u1[i] = inner_product(incs[static_cast<std::size_t>(i)], h1);
        u2[i] = inner_product(incs[static_cast<std::size_t>(i)], h2);
    }
    auto [L, detA] = cholesky_clamped(A);
    (void)L;
    if (!(detA > 0.0)) throw NumericError("fw_transform_mc: singular shifted Gram matrix");
    const Eigen::VectorXd s1 = solve_spd(A, u1);
    const Eigen::VectorXd s2 = solve_spd(A, u2);
    const double quad = u1.dot(s1) + u2.dot(s2);
    r.analytic = std::pow(kTwoPi, -static_cast<double>(k1)) / detA * std::exp(-0.5 * quad);
    return r;
}

} // namespace vgp
