#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vgp/localtime.hpp"

using namespace vgp;

TEST_CASE("local time of the zero path is linear with the mollifier peak") {
    auto g = TimeGrid::uniform(100);
    std::vector<double> path(g->size(), 0.0);
    const double eps = 0.04;
    const LocalTimeCurve c = mollified_local_time(path, g, eps, 0.0);
    const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
    for (std::size_t i = 0; i < g->size(); ++i)
        CHECK(c.values[i] == doctest::Approx(g->node(i) * peak).epsilon(1e-12));
    CHECK_THROWS_AS(mollified_local_time(path, g, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("curves are nondecreasing, start at zero and respect the peak bound") {
    auto g = TimeGrid::uniform(128);
    const auto ens = sample_volterra(KernelSpec::ornstein_uhlenbeck(1.0), g, 50, Seed{3, 0});
    const double eps = 0.01;
    const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * eps);
    for (std::size_t p = 0; p < 50; ++p) {
        std::vector<double> path(g->size());
        for (std::size_t i = 0; i < path.size(); ++i) path[i] = ens.paths(p, i);
        const LocalTimeCurve c = mollified_local_time(path, g, eps, 0.1);
        CHECK(c.values[0] == 0.0);
        for (std::size_t i = 1; i < c.values.size(); ++i)
            CHECK(c.values[i] >= c.values[i - 1]);
        CHECK(c.values.back() <= peak + 1e-12);
    }
}

TEST_CASE("occupation identity holds on every sampled path") {
    auto g = TimeGrid::uniform(128);
    const auto ens = sample_volterra(KernelSpec::wiener(), g, 200, Seed{5, 0});
    for (double eps : {0.04, 0.01}) {
        for (std::size_t p = 0; p < ens.n_paths(); ++p) {
            std::vector<double> path(g->size());
            for (std::size_t i = 0; i < path.size(); ++i) path[i] = ens.paths(p, i);
            CHECK(std::abs(occupation_mass(path, g, eps, g->size() - 1) - 1.0) < 1e-8);
            // intermediate horizons integrate to t
            const std::size_t half = g->size() / 2;
            CHECK(std::abs(occupation_mass(path, g, eps, half) - g->node(half)) < 1e-8);
        }
    }
}

TEST_CASE("analytic local-time expectation: closed forms and limits") {
    const auto w = KernelSpec::wiener();
    CHECK(expected_local_time(w, 1.0, 0.0, 0.0) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-8));
    const double e04 = std::sqrt(2.0 / std::numbers::pi) * (std::sqrt(1.04) - std::sqrt(0.04));
    CHECK(expected_local_time(w, 1.0, 0.0, 0.04) == doctest::Approx(e04).epsilon(1e-8));

    // monotone vanishing in |y|
    double prev = expected_local_time(w, 1.0, 0.0, 0.01);
    for (double y : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double v = expected_local_time(w, 1.0, y, 0.01);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev < 1e-6);

    CHECK_THROWS_AS(expected_local_time(w, 0.0, 0.0, 0.01), std::invalid_argument);
}

TEST_CASE("ensemble local times match the Gaussian oracle for all builtins") {
    auto g = TimeGrid::uniform(128);
    const std::size_t n = 10000;
    std::uint64_t master = 100;
    const std::vector<KernelSpec> specs = {KernelSpec::wiener(),
                                           KernelSpec::ornstein_uhlenbeck(1.0),
                                           KernelSpec::brownian_bridge()};
    for (const auto& spec : specs) {
        const auto ens = sample_volterra(spec, g, n, Seed{master++, 0});
        for (double eps : {0.04, 0.01}) {
            const LocalTimeCurveStats st = local_time_curve_stats(ens, eps, 0.0);
            const double oracle = expected_local_time(spec, 1.0, 0.0, eps);
            CHECK(std::abs(st.mean.back() - oracle) <= 3.0 * st.std_err.back());
        }
    }
}

TEST_CASE("mollifier-width consistency trend at the origin") {
    auto g = TimeGrid::uniform(256);
    const std::size_t n = 4000;
    const auto ens = sample_volterra(KernelSpec::wiener(), g, n, Seed{777, 0});
    std::vector<double> second_moment;
    for (double eps : {0.16, 0.04, 0.01}) {
        double acc = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            std::vector<double> path(g->size());
            for (std::size_t i = 0; i < path.size(); ++i) path[i] = ens.paths(p, i);
            const auto a = mollified_local_time(path, g, eps, 0.0);
            const auto b = mollified_local_time(path, g, eps / 4.0, 0.0);
            const double d = a.values.back() - b.values.back();
            acc += d * d;
        }
        second_moment.push_back(acc / double(n));
    }
    CHECK(second_moment[1] < second_moment[0]);
    CHECK(second_moment[2] < second_moment[1]);
}

TEST_CASE("occupation-density second moment: closed form and banding") {
    auto g = TimeGrid::uniform(256);
    const BandedValue w = l2_moment_formula(KernelSpec::wiener(), g);
    const double target = 4.0 / (3.0 * std::numbers::pi);
    CHECK(w.estimate < target);
    CHECK(w.estimate + w.band_bound >= 0.98 * target);
    CHECK(std::abs(w.estimate + w.band_bound - target) <= 0.02 * target);

    // finer grid keeps the value inside the coarser band
    const BandedValue ou128 = l2_moment_formula(KernelSpec::ornstein_uhlenbeck(1.0),
                                                TimeGrid::uniform(128));
    const BandedValue ou256 = l2_moment_formula(KernelSpec::ornstein_uhlenbeck(1.0),
                                                TimeGrid::uniform(256));
    CHECK(std::isfinite(ou128.estimate));
    CHECK(ou256.estimate > ou128.estimate);
    CHECK(ou256.estimate - ou128.estimate <= ou128.band_bound);
}

TEST_CASE("occupation-density second moment is homogeneous under kernel scaling") {
    auto g = TimeGrid::uniform(64);
    Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(g->size(), g->size());
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) ones(i, j) = 1.0;
    const auto k1 = KernelSpec::tabulated(g, ones, false);
    const auto k2 = KernelSpec::tabulated(g, 2.0 * ones, false);
    const BandedValue a = l2_moment_formula(k1, g);
    const BandedValue b = l2_moment_formula(k2, g);
    CHECK(b.estimate == doctest::Approx(0.5 * a.estimate).epsilon(1e-10));
    CHECK(b.band_bound == doctest::Approx(0.5 * a.band_bound).epsilon(1e-10));
}

TEST_CASE("kernel perturbation experiment: zero row, variance bound, decay") {
    auto g = TimeGrid::uniform(128);
    const auto base = KernelSpec::wiener();

    const ContinuityResult zero =
        kernel_continuity_experiment(base, {0.0}, g, 0, Seed{1, 0});
    CHECK(zero.rows[0].sup_diff <= 1e-10);
    CHECK(zero.rows[0].max_var_gap <= 1e-10);
    CHECK(std::abs(zero.rows[0].l2_gap) <= 1e-10);

    const ContinuityResult one =
        kernel_continuity_experiment(base, {0.1}, g, 2000, Seed{2, 0});
    CHECK(one.rows[0].max_var_gap <= 0.01 + 1e-9); // a^2 max_t int bump^2 <= a^2
    CHECK(one.warnings.empty());

    const ContinuityResult sweep =
        kernel_continuity_experiment(base, {0.2, 0.1, 0.05, 0.025}, g, 2000, Seed{3, 0});
    REQUIRE(sweep.rows.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(sweep.rows[i].l2_gap > 0.0);
        CHECK(sweep.rows[i].l2_gap < sweep.rows[i - 1].l2_gap);
        CHECK(sweep.rows[i].sup_diff < sweep.rows[i - 1].sup_diff);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : sweep.rows) {
        const double x = std::log(row.amplitude);
        const double y = std::log(row.l2_gap);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
    CHECK(slope >= 0.9);

    CHECK_THROWS_AS(kernel_continuity_experiment(base, {0.1, 0.2}, g, 0, Seed{4, 0}),
                    std::invalid_argument);
}
