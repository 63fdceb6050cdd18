#pragma once

#include <cstddef>
#include <functional>

namespace vgp {

/// Adaptive Simpson quadrature of f over [a,b].
/// Recursion stops when the local Richardson error estimate is below
/// max(abs_tol * local_share, rel_tol * |integral|); depth is capped.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, double rel_tol = 1e-10,
                        int max_depth = 48);

/// Adaptive Simpson seeded with an initial partition of n equal segments
/// (each segment then refines independently).
double adaptive_simpson_seeded(const std::function<double(double)>& f, double a, double b,
                               std::size_t initial_segments,
                               double abs_tol = 1e-12, double rel_tol = 1e-10,
                               int max_depth = 40);

/// Composite Simpson with n subintervals (n rounded up to even).
double composite_simpson(const std::function<double(double)>& f, double a, double b,
                         std::size_t n);

/// Integrates f over [a,b] with an integrable power singularity at the left
/// endpoint, via the substitution x = a + (b-a) u^power; f is evaluated only
/// for x > a.
double integrate_left_singular(const std::function<double(double)>& f, double a, double b,
                               double power, double abs_tol = 1e-12, double rel_tol = 1e-10);

/// Same for a right-endpoint singularity (x = b - (b-a) u^power, x < b).
double integrate_right_singular(const std::function<double(double)>& f, double a, double b,
                                double power, double abs_tol = 1e-12, double rel_tol = 1e-10);

} // namespace vgp
