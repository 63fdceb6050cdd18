#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vgp/grid.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"

namespace vgp {

/// Small-time envelope sqrt(2 Var X(t) loglog(1/t)); defined on (0, e^{-1}).
double lil_envelope(const KernelSpec& spec, double t);

struct LilConfig {
    double q = 0.5;
    int n_min = 3;
    int n_max = 30;
    std::size_t n_paths = 2000;
    Seed seed{};
    std::vector<double> epsilons{0.5}; // exceedance thresholds (1+eps) h
};

struct LilResult {
    std::vector<int> ns;
    std::vector<double> times;    // q^n, increasing in n
    std::vector<double> envelope; // h(q^n)
    std::vector<double> per_path_max_ratio;
    Eigen::MatrixXd exceed_freq;  // epsilons x ns
    std::vector<std::string> warnings;
};

/// Samples the process exactly on the geometric grid {q^n} and reports the
/// per-path maximum of X(q^n)/h(q^n) plus per-scale exceedance frequencies.
LilResult lil_ratios(const KernelSpec& spec, const LilConfig& cfg);

struct TailDecayRow {
    double lambda = 0.0;
    double empirical = 0.0;
    std::size_t exceed_count = 0;
    bool in_fit = true;
};

struct TailDecayResult {
    std::vector<TailDecayRow> rows;
    double fitted_slope = 0.0;  // of log P vs lambda^2
    double slope_bound = 0.0;   // -(1-delta)/(2 max Var), delta = 0.2
    double sigma_sq_max = 0.0;
    bool slope_ok = false;
    std::vector<std::string> warnings;
};

/// Empirical P(max over the grid of X > lambda) against the exponential decay
/// rate of the Gaussian-extrema tail bound. Rows with fewer than 10
/// exceedances are dropped from the fit and reported.
TailDecayResult tail_decay_check(const KernelSpec& spec, TimeGrid::Ptr grid,
                                 const std::vector<double>& lambdas, std::size_t n,
                                 Seed seed);

} // namespace vgp
