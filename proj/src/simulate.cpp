#include "vgp/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "vgp/parallel.hpp"

namespace vgp {

namespace {

constexpr std::size_t kPathBlock = 256; // fixed block size, independent of workers

} // namespace

PathEnsemble sample_exact(const CovarianceMatrix& cov, std::size_t n, Seed seed) {
    if (n < 1) throw std::invalid_argument("sample_exact: need n >= 1");
    const Eigen::MatrixXd& L = cov.cholesky();
    const std::size_t m = cov.size();

    PathEnsemble ens;
    ens.grid = cov.grid_ptr();
    ens.paths.resize(n, m);
    ens.has_noise = false;
    ens.seed = seed;
    ens.sampler_id = "exact";

    parallel_for_chunks(n, kPathBlock, [&](std::size_t b, std::size_t e) {
        Eigen::MatrixXd Z(m, e - b);
        for (std::size_t p = b; p < e; ++p) {
            RandomStream rs(seed.for_path(p));
            for (std::size_t i = 0; i < m; ++i)
                Z(i, p - b) = rs.normal(i);
        }
        ens.paths.middleRows(b, e - b) = (L * Z).transpose();
    });
    return ens;
}

PathEnsemble sample_volterra(const KernelSpec& spec, TimeGrid::Ptr grid,
                             std::size_t n, Seed seed) {
    if (n < 1) throw std::invalid_argument("sample_volterra: need n >= 1");
    const std::size_t m = grid->size();
    const std::size_t cells = grid->cells();
    const auto& t = grid->nodes();

    // kernel evaluated at interval midpoints; row i covers increments j < i
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, cells);
    parallel_for(m, [&](std::size_t i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double mid = 0.5 * (t[j] + t[j + 1]);
            K(i, j) = spec.eval(t[i], mid);
        }
    });

    std::vector<double> sqdt(cells);
    for (std::size_t j = 0; j < cells; ++j) sqdt[j] = std::sqrt(t[j + 1] - t[j]);

    PathEnsemble ens;
    ens.grid = grid;
    ens.paths.resize(n, m);
    ens.noise.resize(n, cells);
    ens.has_noise = true;
    ens.kernel = spec;
    ens.seed = seed;
    ens.sampler_id = "volterra";

    parallel_for_chunks(n, kPathBlock, [&](std::size_t b, std::size_t e) {
        Eigen::MatrixXd W(cells, e - b);
        for (std::size_t p = b; p < e; ++p) {
            RandomStream rs(seed.for_path(p));
            for (std::size_t j = 0; j < cells; ++j)
                W(j, p - b) = rs.normal(j) * sqdt[j];
        }
        ens.noise.middleRows(b, e - b) = W.transpose();
        ens.paths.middleRows(b, e - b) = (K * W).transpose();
    });
    return ens;
}

PlanarEnsemble sample_planar(const KernelSpec& spec, TimeGrid::Ptr grid,
                             std::size_t n, Seed seed) {
    PlanarEnsemble pe;
    pe.component1 = sample_volterra(spec, grid, n, seed.derived(0));
    pe.component2 = sample_volterra(spec, grid, n, seed.derived(1));
    return pe;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> empirical_cov(const PathEnsemble& ens) {
    const auto n = ens.paths.rows();
    if (n < 2) throw std::invalid_argument("empirical_cov: need at least 2 paths");
    const double dn = static_cast<double>(n);
    const Eigen::RowVectorXd mean = ens.paths.colwise().mean();
    Eigen::MatrixXd centered = ens.paths.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / (dn - 1.0);
    Eigen::MatrixXd se(cov.rows(), cov.cols());
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
        for (Eigen::Index j = 0; j < cov.cols(); ++j) {
            const double v = cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j);
            se(i, j) = v > 0.0 ? std::sqrt(v / dn) : 0.0;
        }
    return {std::move(cov), std::move(se)};
}

} // namespace vgp
