#include <doctest.h>

#include <cmath>

#include "vgp/covariance.hpp"
#include "vgp/parallel.hpp"
#include "vgp/rng.hpp"
#include "vgp/simulate.hpp"

using namespace vgp;

TEST_CASE("philox known-answer vectors") {
    auto out = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                     {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                     {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("random streams are pure functions of (seed, draw)") {
    RandomStream a(Seed{42, 7});
    RandomStream b(Seed{42, 7});
    for (std::uint64_t d = 0; d < 100; ++d) {
        CHECK(a.normal(d) == b.normal(d));
        CHECK(a.uniform(d) == b.uniform(d));
        CHECK(a.uniform(d) > 0.0);
        CHECK(a.uniform(d) < 1.0);
    }
    RandomStream c(Seed{42, 8});
    bool any_diff = false;
    for (std::uint64_t d = 0; d < 16; ++d) any_diff = any_diff || (a.bits(d) != c.bits(d));
    CHECK(any_diff);

    // draws are sane standard normals
    double mean = 0.0, var = 0.0;
    const std::size_t n = 200000;
    for (std::uint64_t d = 0; d < n; ++d) mean += a.normal(d);
    mean /= n;
    for (std::uint64_t d = 0; d < n; ++d) var += (a.normal(d) - mean) * (a.normal(d) - mean);
    var /= n - 1;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / double(n)));
}

TEST_CASE("volterra sampler: coupling identity and determinism") {
    auto g = TimeGrid::uniform(64);
    const auto ens = sample_volterra(KernelSpec::wiener(), g, 500, Seed{1, 0});
    REQUIRE(ens.has_noise);

    // for the driving-noise identity kernel the path is the running sum of
    // its own noise row, exactly
    for (std::size_t p = 0; p < 500; ++p) {
        CHECK(ens.paths(p, 0) == 0.0);
        double acc = 0.0;
        for (std::size_t j = 0; j < g->cells(); ++j) {
            acc += ens.noise(p, j);
            CHECK(ens.paths(p, j + 1) == doctest::Approx(acc).epsilon(1e-14));
        }
    }

    const auto ens2 = sample_volterra(KernelSpec::wiener(), g, 500, Seed{1, 0});
    CHECK(ens.paths == ens2.paths);
    CHECK(ens.noise == ens2.noise);

    // worker count must not change a single bit
    const std::size_t saved = worker_count();
    set_worker_count(1);
    const auto ens_w1 = sample_volterra(KernelSpec::ornstein_uhlenbeck(1.0), g, 300, Seed{3, 9});
    set_worker_count(8);
    const auto ens_w8 = sample_volterra(KernelSpec::ornstein_uhlenbeck(1.0), g, 300, Seed{3, 9});
    set_worker_count(saved);
    CHECK(ens_w1.paths == ens_w8.paths);
    CHECK(ens_w1.noise == ens_w8.noise);
}

TEST_CASE("noise columns have the right variance") {
    auto g = TimeGrid::uniform(32);
    const std::size_t n = 20000;
    const auto ens = sample_volterra(KernelSpec::wiener(), g, n, Seed{17, 0});
    const double dt = g->spacing();
    for (std::size_t j = 0; j < g->cells(); ++j) {
        const double mu = ens.noise.col(j).mean();
        const double var = (ens.noise.col(j).array() - mu).square().sum() / double(n - 1);
        CHECK(std::abs(var - dt) <= 6.0 * dt / std::sqrt(double(n)));
    }
}

TEST_CASE("exact sampler matches closed-form variances") {
    auto g = TimeGrid::uniform(64);
    const std::size_t n = 20000;

    const auto wiener_cov = cov_matrix(KernelSpec::wiener(), g);
    const auto ens = sample_exact(wiener_cov, n, Seed{23, 0});
    CHECK(!ens.has_noise);
    for (std::size_t p = 0; p < n; ++p) CHECK(ens.paths(p, 0) == 0.0);
    const double se = std::sqrt(2.0 / double(n));
    {
        const double mu = ens.paths.col(64).mean();
        const double var = (ens.paths.col(64).array() - mu).square().sum() / double(n - 1);
        CHECK(std::abs(var - 1.0) <= 4.0 * se);
    }

    const auto ou_cov_m = cov_matrix(KernelSpec::ornstein_uhlenbeck(1.0), g);
    const auto ou_ens = sample_exact(ou_cov_m, n, Seed{29, 0});
    const double target = (1.0 - std::exp(-2.0)) / 2.0;
    const double mu = ou_ens.paths.col(64).mean();
    const double var = (ou_ens.paths.col(64).array() - mu).square().sum() / double(n - 1);
    CHECK(std::abs(var - target) <= 4.0 * se * target);

    // per-node ensemble means vanish at the Monte Carlo scale
    for (std::size_t i = 1; i <= 64; ++i) {
        const double sd = std::sqrt(ou_cov_m(i, i) / double(n));
        CHECK(std::abs(ou_ens.paths.col(i).mean()) <= 4.0 * sd + 1e-12);
    }
}

TEST_CASE("degenerate covariance produces identically zero paths") {
    auto g = TimeGrid::uniform(16);
    const auto zero = KernelSpec::tabulated(g, Eigen::MatrixXd::Zero(17, 17), false);
    const auto cov = cov_matrix(zero, g);
    const auto ens = sample_exact(cov, 50, Seed{31, 0});
    CHECK(ens.paths.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("volterra sampler reproduces the quadrature covariance") {
    auto g = TimeGrid::uniform(64);
    const std::size_t n = 20000;
    const auto ens = sample_volterra(KernelSpec::wiener(), g, n, Seed{37, 0});
    auto [emp, se] = empirical_cov(ens);
    const auto& t = g->nodes();
    double worst = 0.0;
    for (std::size_t i = 1; i < g->size(); ++i)
        for (std::size_t j = 1; j < g->size(); ++j)
            worst = std::max(worst,
                             std::abs(emp(i, j) - std::min(t[i], t[j])) / se(i, j));
    CHECK(worst <= 5.0); // multiple-comparison slack at this seed
}

TEST_CASE("discretization bias measured with common refined noise") {
    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0);
    auto gc = TimeGrid::uniform(128);
    auto gf = TimeGrid::uniform(512);
    const std::size_t n = 5000;
    const Seed seed{41, 0};

    const auto fine = sample_volterra(ou, gf, n, seed);
    const CovarianceMatrix ref = cov_matrix(ou, gc);

    // coarse increments are sums of 4 fine increments of the same noise
    Eigen::MatrixXd coarse_noise(n, 128);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t j = 0; j < 128; ++j)
            coarse_noise(p, j) = fine.noise(p, 4 * j) + fine.noise(p, 4 * j + 1) +
                                 fine.noise(p, 4 * j + 2) + fine.noise(p, 4 * j + 3);
    Eigen::MatrixXd K(129, 128);
    K.setZero();
    for (std::size_t i = 0; i < 129; ++i)
        for (std::size_t j = 0; j < i; ++j)
            K(i, j) = ou.eval(gc->node(i), 0.5 * (gc->node(j) + gc->node(j + 1)));
    PathEnsemble coarse;
    coarse.grid = gc;
    coarse.paths = coarse_noise * K.transpose();

    auto [emp_c, se_c] = empirical_cov(coarse);
    PathEnsemble fine_shared;
    fine_shared.grid = gc;
    fine_shared.paths.resize(n, 129);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < 129; ++i)
            fine_shared.paths(p, i) = fine.paths(p, 4 * i);
    auto [emp_f, se_f] = empirical_cov(fine_shared);

    // the coupled difference isolates the time-stepping bias from MC noise
    double worst = 0.0;
    for (std::size_t i = 0; i < 129; ++i)
        for (std::size_t j = 0; j < 129; ++j) {
            const double bias = std::abs(emp_c(i, j) - emp_f(i, j));
            const double excess =
                std::abs(emp_c(i, j) - ref(i, j)) - 4.0 * se_c(i, j) - 2.0 * bias;
            worst = std::max(worst, excess);
        }
    CHECK(worst <= 1e-4);
}

TEST_CASE("planar ensembles have independent components") {
    auto g = TimeGrid::uniform(64);
    const std::size_t n = 20000;
    const auto pe = sample_planar(KernelSpec::wiener(), g, n, Seed{43, 0});

    // component variances match the scalar case
    for (const auto* comp : {&pe.component1, &pe.component2}) {
        const double mu = comp->paths.col(64).mean();
        const double var = (comp->paths.col(64).array() - mu).square().sum() / double(n - 1);
        CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / double(n)));
    }

    // E ||Y(1)||^2 = 2
    const double nsq = (pe.component1.paths.col(64).array().square() +
                        pe.component2.paths.col(64).array().square())
                           .mean();
    CHECK(std::abs(nsq - 2.0) <= 4.0 * 2.0 * std::sqrt(2.0 / double(n)));

    // cross-covariance at equal times vanishes
    for (std::size_t i : {16u, 32u, 64u}) {
        const double cross = (pe.component1.paths.col(i).array() *
                              pe.component2.paths.col(i).array())
                                 .mean();
        CHECK(std::abs(cross) <= 4.0 * g->node(i) / std::sqrt(double(n)));
    }

    // pooled noise cross-correlation at the finer scale
    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t j = 0; j < g->cells(); ++j)
            acc += pe.component1.noise(p, j) * pe.component2.noise(p, j);
    const double pooled = acc / (double(n) * double(g->cells()) * g->spacing());
    CHECK(std::abs(pooled) <= 6.0 / std::sqrt(double(n) * double(g->cells())));
}

TEST_CASE("empirical covariance guards and split consistency") {
    auto g = TimeGrid::uniform(8);
    PathEnsemble zeros;
    zeros.grid = g;
    zeros.paths = Eigen::MatrixXd::Zero(10, 9);
    auto [emp, se] = empirical_cov(zeros);
    CHECK(emp.cwiseAbs().maxCoeff() == 0.0);
    CHECK(se.cwiseAbs().maxCoeff() == 0.0);

    PathEnsemble one;
    one.grid = g;
    one.paths = Eigen::MatrixXd::Zero(1, 9);
    CHECK_THROWS_AS(empirical_cov(one), std::invalid_argument);

    // disjoint seed halves agree within combined error
    const std::size_t n = 10000;
    const auto a = sample_volterra(KernelSpec::ornstein_uhlenbeck(1.0), g, n, Seed{47, 0});
    const auto b = sample_volterra(KernelSpec::ornstein_uhlenbeck(1.0), g, n, Seed{47, n});
    auto [ea, sa] = empirical_cov(a);
    auto [eb, sb] = empirical_cov(b);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) {
            const double comb = std::sqrt(sa(i, j) * sa(i, j) + sb(i, j) * sb(i, j));
            CHECK(std::abs(ea(i, j) - eb(i, j)) <= 6.0 * comb + 1e-12);
        }
}
