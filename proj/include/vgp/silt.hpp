#pragma once

#include <cstddef>
#include <vector>

#include "vgp/grid.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"
#include "vgp/simulate.hpp"

namespace vgp {

/// How the ordered-time simplex 0 <= t_1 <= ... <= t_k <= 1 is discretized.
struct SimplexConfig {
    int k = 2;
    enum class Mode { GridNested, MonteCarlo } mode = Mode::GridNested;
    std::size_t samples = 10000; // MonteCarlo only
    Seed mc_seed{};
    double diagonal_cutoff = 0.0; // minimum gap between consecutive times
};

/// Ensemble statistics of a self-intersection functional.
struct SiltEstimate {
    std::vector<double> per_path;
    double mean = 0.0;
    double variance = 0.0;
    double std_err = 0.0;
    double epsilon = 0.0;
    int k = 2;
    bool renormalized = false;
};

/// Plain mollified self-intersection time: simplex quadrature of
/// prod f_eps(Y(t_{i+1}) - Y(t_i)) with the planar Gaussian mollifier.
/// Stationary kernels only.
SiltEstimate silt_plain(const PlanarEnsemble& ens, double eps, const SimplexConfig& cfg);

/// Same quadrature with each factor centered by its analytic expectation
/// 1 / (2 pi (v(s,t) + eps)); per-path values may be negative.
SiltEstimate silt_rosen(const PlanarEnsemble& ens, double eps, const SimplexConfig& cfg);

/// Continuum expectation of the k=2 plain functional:
/// int_{s<t} (2 pi (v(s,t) + eps))^{-1} ds dt by adaptive quadrature.
double expected_silt2(const KernelSpec& spec, double eps);

/// Expectation of the k=2 plain functional under the lattice quadrature used
/// by silt_plain on this grid (for measuring discretization bias).
double expected_silt2_grid(const KernelSpec& spec, TimeGrid::Ptr grid, double eps);

/// Monte Carlo evaluation of the regularized transform integral over the
/// simplex: orthogonalized slice increments feed
///   prod (exp(-(<h1,e_i>^2 + <h2,e_i>^2) / (2 ||e_i||^2)) - 1) / ||e_i||^2,
/// with consecutive gaps below the cutoff contributing zero. Reported at the
/// configured cutoff and at half that cutoff, sharing samples.
struct FwIntegralResult {
    double estimate = 0.0;
    double std_err = 0.0;
    double estimate_half_cutoff = 0.0;
    double cutoff_sensitivity = 0.0;
};

FwIntegralResult regularized_fw_integral(const KernelSpec& spec, TimeGrid::Ptr grid,
                                         const GridFunction& h1, const GridFunction& h2,
                                         const SimplexConfig& cfg);

/// Exponential-weight transform of the mollified increment product at fixed
/// times: estimate = mean over paths of alpha * E(h1,h2) where E is the
/// normalized exponential of the discrete noise integrals, against the
/// closed-form Gaussian value from the increment Gram matrix.
struct FwTransformResult {
    double estimate = 0.0;
    double std_err = 0.0;
    double analytic = 0.0;
    double weight_mean = 0.0; // mean of E alone; 1 in expectation
    double weight_std_err = 0.0;
};

FwTransformResult fw_transform_mc(const PlanarEnsemble& ens, const std::vector<double>& times,
                                  double eps, const GridFunction& h1, const GridFunction& h2);

} // namespace vgp
