#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vgp/grid.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"

namespace vgp {

/// R(t_i, t_j) = int_0^{min} K(t_i,r) K(t_j,r) dr on a grid, with a lazily
/// computed pivot-clamped Cholesky factor. PSD repair uses additive diagonal
/// jitter, escalated up to 1e-10 * max diagonal and recorded, never silent.
class CovarianceMatrix {
public:
    CovarianceMatrix(TimeGrid::Ptr grid, Eigen::MatrixXd values);

    const TimeGrid& grid() const { return *grid_; }
    TimeGrid::Ptr grid_ptr() const { return grid_; }
    const Eigen::MatrixXd& matrix() const { return values_; }
    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    std::size_t size() const { return grid_->size(); }

    /// Lower-triangular factor L with L L^T ~= R (+ jitter I). Throws
    /// vgp::NumericError if the factorization fails within the jitter budget.
    const Eigen::MatrixXd& cholesky() const;
    /// Diagonal jitter that was added before factorization succeeded.
    double jitter() const;

    /// Row-major CSV with a header of grid times.
    void write_csv(const std::string& path) const;

private:
    TimeGrid::Ptr grid_;
    Eigen::MatrixXd values_;
    mutable std::once_flag factor_once_;
    mutable Eigen::MatrixXd factor_;
    mutable double jitter_ = 0.0;
};

/// Exact-in-r product integral int_{r0}^{r1} K(ta,r) K(tb,r) dr with
/// singular-endpoint substitutions for the fractional family.
double kernel_product_integral(const KernelSpec& spec, double ta, double tb,
                               double r0, double r1,
                               std::size_t initial_segments = 32);

/// Var X(t) = int_0^t K(t,r)^2 dr.
double process_variance(const KernelSpec& spec, double t);

CovarianceMatrix cov_matrix(const KernelSpec& spec, TimeGrid::Ptr grid);

struct PairStats {
    double var_s = 0.0;
    double var_t = 0.0;
    double cov = 0.0;
    double inc_var = 0.0; // E (X(t)-X(s))^2
    double det2 = 0.0;    // var_s var_t - cov^2
};

PairStats pair_stats(const KernelSpec& spec, double s, double t);

/// Finiteness functional for the two-point determinant:
/// quadrature of det2^{-1/2} over the unit square minus one-cell bands around
/// the diagonal and the axes, plus an analytic bound for the excluded band
/// from the minorant det2 >= c s(t-s).
struct RudenkoResult {
    double estimate = 0.0;
    double band_bound = 0.0;
    double minorant_c = 0.0;
};

RudenkoResult rudenko_integral(const KernelSpec& spec, TimeGrid::Ptr grid);

/// Local-nondeterminism diagnostics over the dyadic window sequence 2^-j.
struct LndReport {
    std::vector<double> windows;        // 2^-j, j = 2..J
    std::vector<double> berman_ratio;   // inf over pairs with gap <= window; +inf sentinel
    std::vector<double> zeta_liminf;    // inf_s (t-s)^{-zeta} int_s^t K^2(t,.) at t = window
    std::vector<double> strong_lnd_k3;  // Gram determinant / product of squared norms
    std::vector<double> strong_lnd_k4;
    std::vector<std::string> warnings;
};

LndReport lnd_diagnostics(const KernelSpec& spec, TimeGrid::Ptr grid, double zeta);

/// Gram-determinant factorization ratio for k equally spaced increments of
/// width window_cells starting near `anchor`. Equals 1 for orthogonal
/// increments; Hadamard's inequality keeps it <= 1.
double strong_lnd_ratio(const KernelSpec& spec, TimeGrid::Ptr grid, int k,
                        std::size_t window_cells, double anchor = 0.25);

/// Best observed constant for the weighted-increment second-moment bound:
/// max over random partitions and coefficients of
///   E(sum a_k dX_k)^2 / (sum a_k^2 dt_k),
/// computed exactly from the covariance matrix. Deterministic given seed.
double integrator_constant(const KernelSpec& spec, TimeGrid::Ptr grid,
                           std::size_t trials, Seed seed);
double integrator_constant(const CovarianceMatrix& cov, std::size_t trials, Seed seed);

} // namespace vgp
