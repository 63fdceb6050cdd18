#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "vgp/grid.hpp"

namespace vgp {

enum class DerivativeMode { Analytic, FiniteDifference };

/// Parameterized Volterra kernel K(t,s) on [0,1]^2 with K(t,s) = 0 for s > t.
///
/// Builtin families: the driving-noise identity kernel (Wiener), the bridge
/// kernel (1-t)/(1-s), the exponential kernel e^{-rate (t-s)}, the fractional
/// kernel with Hurst index H and scale constant, tabulated values on a grid,
/// and additive perturbations of a base kernel.
class KernelSpec {
public:
    struct Wiener {};
    struct BrownianBridge {};
    struct OrnsteinUhlenbeck { double rate; };
    struct FractionalBM { double hurst; double scale; };
    struct Tabulated {
        TimeGrid::Ptr grid;
        std::shared_ptr<const Eigen::MatrixXd> values; // (M+1)x(M+1), lower triangle
        bool stationary;
    };
    struct Perturbed {
        std::shared_ptr<const KernelSpec> base;
        double amplitude;
        int bump_shape; // 0: sine sheet, 1: localized gaussian bump, 2: step in t
    };

    static KernelSpec wiener();
    static KernelSpec brownian_bridge();
    static KernelSpec ornstein_uhlenbeck(double rate);
    /// Fractional kernel with an explicit scale constant.
    static KernelSpec fractional_bm(double hurst, double scale);
    /// Fractional kernel with the scale calibrated so that Var X(1) = 1.
    static KernelSpec fractional_bm_calibrated(double hurst);
    static KernelSpec tabulated(TimeGrid::Ptr grid, Eigen::MatrixXd values,
                                bool stationary = false);
    static KernelSpec perturbed(KernelSpec base, double amplitude, int bump_shape);

    double eval(double t, double s) const;
    /// dK/dt; analytic for builtins, central difference (step 1e-5) otherwise
    /// or when the mode is FiniteDifference.
    double deriv_t(double t, double s) const;

    bool stationary() const { return stationary_; }
    DerivativeMode derivative_mode() const { return deriv_mode_; }
    void set_derivative_mode(DerivativeMode m) { deriv_mode_ = m; }
    double fd_step() const { return fd_step_; }

    std::string name() const;
    const std::variant<Wiener, BrownianBridge, OrnsteinUhlenbeck, FractionalBM,
                       Tabulated, Perturbed>& family() const { return family_; }

    bool is_fractional() const;
    /// Hint for quadrature: exponent p such that the substitution r -> r0 + c u^p
    /// regularizes the kernel near the flagged endpoint; 0 when regular.
    double left_endpoint_power() const;   // singularity of K(t, .) at s = 0
    double diagonal_power() const;        // singularity of K(t, .) at s = t

private:
    explicit KernelSpec(std::variant<Wiener, BrownianBridge, OrnsteinUhlenbeck,
                                     FractionalBM, Tabulated, Perturbed> fam,
                        bool stationary);

    std::variant<Wiener, BrownianBridge, OrnsteinUhlenbeck, FractionalBM, Tabulated,
                 Perturbed> family_;
    bool stationary_ = false;
    DerivativeMode deriv_mode_ = DerivativeMode::Analytic;
    double fd_step_ = 1e-5;
};

struct ValidationReport {
    bool volterra_ok = false;
    double sup_l2 = 0.0;          // max over grid t of ||K(t,.)||^2
    double kernel_at_origin = 0.0;
    double lipschitz_l = 0.0;     // grid estimate of the time-Lipschitz constant
    std::vector<std::string> warnings;
};

/// K(t, .) 1_{[0,t]} sampled at the grid nodes.
GridFunction kernel_slice(const KernelSpec& spec, double t, TimeGrid::Ptr grid);

ValidationReport validate_kernel(const KernelSpec& spec, TimeGrid::Ptr grid);

/// Scale constant making Var X(1) = 1 for the fractional kernel family.
double calibrate_fractional_scale(double hurst);

/// Var X(1) for the fractional kernel with the given parameters (quadrature
/// with singular-endpoint substitutions).
double fractional_variance_at_one(double hurst, double scale);

/// Closed-form fractional covariance (scale-1 normalization):
/// 0.5 (t^{2H} + s^{2H} - |t-s|^{2H}).
double fractional_covariance_reference(double hurst, double t, double s);

} // namespace vgp
