#include "vgp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vgp/covariance.hpp"
#include "vgp/simulate.hpp"

namespace vgp {

double lil_envelope(const KernelSpec& spec, double t) {
    if (!(t > 0.0 && t < std::exp(-1.0)))
        throw std::invalid_argument("lil_envelope: t must be in (0, e^{-1})");
    const double loglog = std::log(std::log(1.0 / t));
    const double var = process_variance(spec, t);
    return std::sqrt(2.0 * var * loglog);
}

LilResult lil_ratios(const KernelSpec& spec, const LilConfig& cfg) {
    if (!(cfg.q > 0.0 && cfg.q < 1.0))
        throw std::invalid_argument("lil_ratios: q must be in (0,1)");
    if (cfg.n_min > cfg.n_max || cfg.n_min < 1)
        throw std::invalid_argument("lil_ratios: need 1 <= n_min <= n_max");
    if (!(std::pow(cfg.q, cfg.n_min) < std::exp(-1.0)))
        throw std::invalid_argument("lil_ratios: q^{n_min} must be below e^{-1}");
    if (cfg.n_paths < 2) throw std::invalid_argument("lil_ratios: need n_paths >= 2");

    LilResult res;
    const TimeGrid::Ptr grid = TimeGrid::geometric(cfg.q, cfg.n_min, cfg.n_max);
    const CovarianceMatrix cov = cov_matrix(spec, grid);

    if (std::abs(spec.eval(0.0, 0.0)) < 1e-9)
        res.warnings.push_back("K(0,0) is numerically zero: the unit-constant envelope "
                               "statement does not apply to this kernel");

    // geometric nodes sit between the leading 0 and trailing 1
    std::vector<std::size_t> node_of_n;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        res.ns.push_back(n);
        const double t = std::pow(cfg.q, n);
        res.times.push_back(t);
        node_of_n.push_back(grid->nearest_index(t));
    }

    res.envelope.resize(res.ns.size());
    for (std::size_t i = 0; i < res.ns.size(); ++i) {
        const double t = res.times[i];
        const double var = cov(node_of_n[i], node_of_n[i]);
        const double loglog = std::log(std::log(1.0 / t));
        res.envelope[i] = loglog > 0.0 ? std::sqrt(2.0 * var * loglog) : 0.0;
    }

    const PathEnsemble ens = sample_exact(cov, cfg.n_paths, cfg.seed);

    res.per_path_max_ratio.resize(cfg.n_paths);
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        double mx = 0.0;
        bool first = true;
        for (std::size_t i = 0; i < res.ns.size(); ++i) {
            const double h = res.envelope[i];
            const double ratio = h > 0.0 ? ens.paths(p, node_of_n[i]) / h : 0.0;
            if (first || ratio > mx) { mx = ratio; first = false; }
        }
        res.per_path_max_ratio[p] = mx;
    }

    res.exceed_freq.resize(cfg.epsilons.size(), res.ns.size());
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
        for (std::size_t i = 0; i < res.ns.size(); ++i) {
            const double bar = (1.0 + cfg.epsilons[e]) * res.envelope[i];
            std::size_t count = 0;
            for (std::size_t p = 0; p < cfg.n_paths; ++p)
                if (ens.paths(p, node_of_n[i]) > bar) ++count;
            res.exceed_freq(e, i) =
                static_cast<double>(count) / static_cast<double>(cfg.n_paths);
        }
    }
    return res;
}

TailDecayResult tail_decay_check(const KernelSpec& spec, TimeGrid::Ptr grid,
                                 const std::vector<double>& lambdas, std::size_t n,
                                 Seed seed) {
    if (lambdas.size() < 2)
        throw std::invalid_argument("tail_decay_check: need at least 2 lambdas");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("tail_decay_check: lambdas must be increasing");
    if (n < 10000) throw std::invalid_argument("tail_decay_check: need n >= 10^4");

    const PathEnsemble ens = sample_volterra(spec, grid, n, seed);

    TailDecayResult res;
    double sig2 = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i)
        sig2 = std::max(sig2, process_variance(spec, grid->node(i)));
    res.sigma_sq_max = sig2;
    res.slope_bound = -(1.0 - 0.2) / (2.0 * sig2);

    const Eigen::VectorXd sup = ens.paths.rowwise().maxCoeff();
    for (double lam : lambdas) {
        TailDecayRow row;
        row.lambda = lam;
        row.exceed_count = static_cast<std::size_t>((sup.array() > lam).count());
        row.empirical = static_cast<double>(row.exceed_count) / static_cast<double>(n);
        row.in_fit = row.exceed_count >= 10;
        if (!row.in_fit)
            res.warnings.push_back("lambda=" + std::to_string(lam) +
                                   " has fewer than 10 exceedances; dropped from the fit");
        res.rows.push_back(row);
    }

    // least squares of log p on lambda^2 over retained rows
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (const auto& row : res.rows) {
        if (!row.in_fit) continue;
        const double x = row.lambda * row.lambda;
        const double y = std::log(row.empirical);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) {
        const double denom = static_cast<double>(cnt) * sxx - sx * sx;
        res.fitted_slope = (static_cast<double>(cnt) * sxy - sx * sy) / denom;
        res.slope_ok = res.fitted_slope <= res.slope_bound;
    } else {
        res.warnings.push_back("fewer than 2 usable lambdas; slope not fitted");
    }
    return res;
}

} // namespace vgp
