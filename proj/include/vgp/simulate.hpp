#pragma once

#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "vgp/covariance.hpp"
#include "vgp/grid.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"

namespace vgp {

/// N seeded sample paths on a grid. Paths are rows; the driving-noise matrix
/// holds the increments dW_j over [t_j, t_{j+1}] (empty for the exact sampler,
/// which has no canonical driving noise).
struct PathEnsemble {
    TimeGrid::Ptr grid;
    Eigen::MatrixXd paths;  // N x (M+1)
    Eigen::MatrixXd noise;  // N x M, or 0 x 0
    bool has_noise = false;
    std::optional<KernelSpec> kernel;
    Seed seed;
    std::string sampler_id; // "exact" | "volterra"

    std::size_t n_paths() const { return static_cast<std::size_t>(paths.rows()); }
};

/// Two coordinate ensembles driven by independent noises on a shared grid.
struct PlanarEnsemble {
    PathEnsemble component1;
    PathEnsemble component2;

    const TimeGrid& grid() const { return *component1.grid; }
    std::size_t n_paths() const { return component1.n_paths(); }
};

/// Exact Gaussian sampling from a covariance factor: path = L z.
PathEnsemble sample_exact(const CovarianceMatrix& cov, std::size_t n, Seed seed);

/// Discretized stochastic-integral sampler: X(t_i) = sum_{j<i} K(t_i, m_j) dW_j
/// with m_j the midpoint of [t_j, t_{j+1}]; retains the noise matrix.
PathEnsemble sample_volterra(const KernelSpec& spec, TimeGrid::Ptr grid,
                             std::size_t n, Seed seed);

/// Component-wise Volterra sampling with disjoint noise streams.
PlanarEnsemble sample_planar(const KernelSpec& spec, TimeGrid::Ptr grid,
                             std::size_t n, Seed seed);

/// Unbiased cross-path sample covariance and its asymptotic standard error
/// sqrt((R_ii R_jj + R_ij^2)/N).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> empirical_cov(const PathEnsemble& ens);

} // namespace vgp
