#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vgp/grid.hpp"

namespace vgp {

/// Gram matrix of a function system together with its determinant, computed
/// by a symmetric factorization with pivots clamped at zero.
struct GramResult {
    Eigen::MatrixXd matrix;
    double determinant = 0.0;
    /// Set when a pivot fell below 1e-14 * trace and was clamped.
    bool numerically_singular = false;
};

/// Weighted inner product sum_j w_j f(t_j) g(t_j); throws on grid mismatch.
double inner_product(const GridFunction& f, const GridFunction& g);

GramResult gram(const std::vector<GridFunction>& fs);

/// Unnormalized orthogonal system via modified Gram-Schmidt with one
/// re-orthogonalization pass. Throws std::invalid_argument naming the first
/// index whose residual norm^2 falls below 1e-12 * trace of the Gram matrix.
std::vector<GridFunction> gram_schmidt(const std::vector<GridFunction>& fs);

/// Orthogonal projection of h onto span(fs): returns (P h, ||P h||^2).
std::pair<GridFunction, double> project(const GridFunction& h,
                                        const std::vector<GridFunction>& fs);

/// Two-sided operator bound for the integral operator with nonnegative kernel
/// values on grid x grid, tested against positive functions p and q:
///   alpha = max_i (sum_j w_j k(i,j) q_j) / p_i,
///   beta  = max_j (sum_i w_i k(i,j) p_i) / q_j,
/// together with the directly computed squared operator norm (power iteration
/// on the symmetrized discrete operator, relative tolerance 1e-8).
struct SchurBound {
    double alpha = 0.0;
    double beta = 0.0;
    double norm_bound_sq = 0.0;
    double direct_norm_sq = 0.0;
};

SchurBound schur_operator_bound(const Eigen::MatrixXd& kernel_values,
                                const GridFunction& p, const GridFunction& q);

/// Solves A x = b for a symmetric positive definite matrix via the same
/// pivot-clamped factorization used for Gram determinants; throws
/// vgp::NumericError when a pivot collapses (linearly dependent system).
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Pivot-clamped lower Cholesky factor of a PSD matrix. Pivots below
/// clamp_tol * trace are set to zero together with their column.
/// Returns the factor and the product of pivots (the determinant); when
/// min_pivot is given it receives the smallest pre-clamp pivot seen.
std::pair<Eigen::MatrixXd, double> cholesky_clamped(const Eigen::MatrixXd& a,
                                                    double clamp_tol = 1e-14,
                                                    double* min_pivot = nullptr);

} // namespace vgp
