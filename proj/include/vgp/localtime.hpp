#pragma once

#include <span>
#include <string>
#include <vector>

#include "vgp/grid.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"
#include "vgp/simulate.hpp"

namespace vgp {

/// Running occupation estimate l_eps(t_i, y) along one path: trapezoidal time
/// quadrature of the Gaussian mollifier of bandwidth sqrt(eps) centered at y.
struct LocalTimeCurve {
    TimeGrid::Ptr grid;
    std::vector<double> values; // nondecreasing, values[0] = 0
    double epsilon = 0.0;
    double level = 0.0; // y
};

LocalTimeCurve mollified_local_time(std::span<const double> path, TimeGrid::Ptr grid,
                                    double eps, double y);

/// int l_eps(t_{t_index}, y) dy over the level grid covering the path range
/// +- 8 sqrt(eps) with spacing sqrt(eps)/8. Equals t up to mollifier tails.
double occupation_mass(std::span<const double> path, TimeGrid::Ptr grid,
                       double eps, std::size_t t_index);

/// Analytic Gaussian expectation of l_eps(t, y):
/// int_0^t (2 pi (sigma^2(s)+eps))^{-1/2} exp(-y^2 / (2 (sigma^2(s)+eps))) ds.
/// eps = 0 is allowed when sigma^2 > 0 on (0,t].
double expected_local_time(const KernelSpec& spec, double t, double y, double eps);

/// Cross-path mean and standard error of l_eps(., y) at every grid node.
struct LocalTimeCurveStats {
    TimeGrid::Ptr grid;
    std::vector<double> mean;
    std::vector<double> std_err;
    double epsilon = 0.0;
    double level = 0.0;
};

LocalTimeCurveStats local_time_curve_stats(const PathEnsemble& ens, double eps, double y);

/// Estimate plus a bound for the mass excluded by the diagonal band.
struct BandedValue {
    double estimate = 0.0;
    double band_bound = 0.0;
};

/// Closed-form second moment of the occupation density:
/// E int l(1,y)^2 dy = (1/pi) int_{s<t} incVar(s,t)^{-1/2} ds dt,
/// with a one-cell diagonal band excluded and bounded via incVar >= c (t-s).
BandedValue l2_moment_formula(const KernelSpec& spec, TimeGrid::Ptr grid);

struct ContinuityRow {
    double amplitude = 0.0;
    double sup_diff = 0.0;    // max over the grid of |K_a - K|
    double max_var_gap = 0.0; // max_t E (X_a(t) - X(t))^2 under shared noise
    double l2_gap = 0.0;      // E int (l_a - l)^2 dy, three-term expansion
};

struct ContinuityResult {
    std::vector<ContinuityRow> rows;
    std::vector<std::string> warnings;
};

/// Sensitivity of the occupation density to kernel perturbations. The table is
/// computed in closed form from shared-noise joint covariances; the sampled
/// ensemble (n paths) only cross-checks the variance-gap column and emits a
/// warning on disagreement.
ContinuityResult kernel_continuity_experiment(const KernelSpec& base,
                                              const std::vector<double>& amplitudes,
                                              TimeGrid::Ptr grid, std::size_t n, Seed seed,
                                              int bump_shape = 0);

} // namespace vgp
