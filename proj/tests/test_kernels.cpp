#include <doctest.h>

#include <cmath>

#include "vgp/covariance.hpp"
#include "vgp/kernels.hpp"
#include "vgp/rng.hpp"

using namespace vgp;

namespace {

// test-side oracle: midpoint Riemann sum of K(t,.)K(s,.) on [0, s]
double riemann_cov(const KernelSpec& k, double t, double s, std::size_t n = 20000) {
    double acc = 0.0;
    const double dr = s / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (static_cast<double>(i) + 0.5) * dr;
        acc += k.eval(t, r) * k.eval(s, r) * dr;
    }
    return acc;
}

} // namespace

TEST_CASE("builtin kernel point values") {
    const auto w = KernelSpec::wiener();
    CHECK(w.eval(0.7, 0.3) == 1.0);
    CHECK(w.eval(0.3, 0.7) == 0.0);
    CHECK(w.eval(0.5, 0.5) == 1.0);
    CHECK(w.stationary());

    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0);
    CHECK(ou.eval(0.7, 0.3) == doctest::Approx(std::exp(-0.4)).epsilon(1e-12));
    CHECK(ou.eval(0.3, 0.7) == 0.0);
    CHECK(ou.stationary());

    const auto br = KernelSpec::brownian_bridge();
    CHECK(br.eval(0.7, 0.3) == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(br.eval(1.0, 0.5) == 0.0);
    CHECK(!br.stationary());

    CHECK_THROWS_AS(KernelSpec::ornstein_uhlenbeck(0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::fractional_bm(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::fractional_bm(-0.1, 1.0), std::invalid_argument);
}

TEST_CASE("volterra property: vanishing above the diagonal") {
    const std::vector<KernelSpec> specs = {
        KernelSpec::wiener(), KernelSpec::brownian_bridge(),
        KernelSpec::ornstein_uhlenbeck(2.0), KernelSpec::fractional_bm(0.7, 1.0),
        KernelSpec::fractional_bm(0.3, 1.0),
        KernelSpec::perturbed(KernelSpec::wiener(), 0.2, 0)};
    RandomStream rs(Seed{99, 0});
    std::uint64_t d = 0;
    for (const auto& spec : specs) {
        for (int i = 0; i < 1000; ++i) {
            double a = rs.uniform(d++), b = rs.uniform(d++);
            const double t = std::min(a, b), s = std::max(a, b);
            if (t == s) continue;
            CHECK(spec.eval(t, s) == 0.0);
        }
    }
}

TEST_CASE("stationary kernels are shift invariant") {
    const std::vector<KernelSpec> specs = {KernelSpec::wiener(),
                                           KernelSpec::ornstein_uhlenbeck(1.5)};
    RandomStream rs(Seed{100, 0});
    std::uint64_t d = 0;
    for (const auto& spec : specs) {
        REQUIRE(spec.stationary());
        for (int i = 0; i < 100; ++i) {
            double s = 0.8 * rs.uniform(d++);
            double t = s + (0.99 - s) * rs.uniform(d++);
            double shift = (1.0 - t) * rs.uniform(d++);
            CHECK(std::abs(spec.eval(t, s) - spec.eval(t + shift, s + shift)) <= 1e-10);
        }
    }
    CHECK(!KernelSpec::brownian_bridge().stationary());
    CHECK(!KernelSpec::fractional_bm(0.7, 1.0).stationary());
}

TEST_CASE("bridge kernel reproduces the bridge covariance") {
    const auto br = KernelSpec::brownian_bridge();
    for (const auto& [s, t] : std::vector<std::pair<double, double>>{
             {0.3, 0.7}, {0.1, 0.9}, {0.5, 0.6}, {0.25, 0.25}}) {
        const double expect = s * (1.0 - t);
        CHECK(riemann_cov(br, t, s) == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("kernel slices") {
    auto g = TimeGrid::uniform(512);
    const auto w = KernelSpec::wiener();
    const GridFunction full = kernel_slice(w, 1.0, g);
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(full[i] == 1.0);
    CHECK(full.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));

    const GridFunction half = kernel_slice(w, 0.5, g);
    CHECK(std::abs(half.norm_sq() - 0.5) < 2.0 / 512.0);

    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0);
    const GridFunction ouf = kernel_slice(ou, 1.0, g);
    CHECK(ouf.norm_sq() ==
          doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-6));

    CHECK_THROWS_AS(kernel_slice(w, 1.5, g), std::invalid_argument);
}

TEST_CASE("validation report fields and warnings") {
    auto g = TimeGrid::uniform(256);

    const ValidationReport w = validate_kernel(KernelSpec::wiener(), g);
    CHECK(w.volterra_ok);
    CHECK(w.sup_l2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.kernel_at_origin == 1.0);
    CHECK(w.lipschitz_l == 0.0);
    CHECK(w.warnings.empty());

    const ValidationReport ou = validate_kernel(KernelSpec::ornstein_uhlenbeck(1.0), g);
    CHECK(ou.volterra_ok);
    CHECK(ou.sup_l2 == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-4));
    CHECK(ou.kernel_at_origin == 1.0);
    CHECK(ou.lipschitz_l <= 1.0 + 1e-9); // analytic bound |dK/dt| <= rate
    CHECK(ou.lipschitz_l > 0.9);

    const ValidationReport fb = validate_kernel(KernelSpec::fractional_bm(0.3, 1.0), g);
    CHECK(fb.volterra_ok);
    bool warned = false;
    for (const auto& s : fb.warnings) warned = warned || s.find("experimental") != std::string::npos;
    CHECK(warned);

    const ValidationReport br = validate_kernel(KernelSpec::brownian_bridge(), g);
    bool minzero = false;
    for (const auto& s : br.warnings) minzero = minzero || s.find("attains zero") != std::string::npos;
    CHECK(minzero);
}

TEST_CASE("perturbed kernels stay within the amplitude") {
    auto g = TimeGrid::uniform(128);
    const auto base = KernelSpec::wiener();
    for (int shape : {0, 1}) {
        for (double a : {0.3, 0.05}) {
            const auto pert = KernelSpec::perturbed(base, a, shape);
            double sup = 0.0;
            for (std::size_t i = 0; i < g->size(); ++i)
                for (std::size_t j = 0; j <= i; ++j)
                    sup = std::max(sup, std::abs(pert.eval(g->node(i), g->node(j)) -
                                                 base.eval(g->node(i), g->node(j))));
            CHECK(sup <= a + 1e-12);
            CHECK(sup > 0.5 * a); // the bump actually moves the kernel
        }
    }
    const auto zero = KernelSpec::perturbed(base, 0.0, 0);
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            CHECK(zero.eval(g->node(i), g->node(j)) == base.eval(g->node(i), g->node(j)));
}

TEST_CASE("fractional kernel calibration and covariance cross-check") {
    const double hurst = 0.7;
    const double scale = calibrate_fractional_scale(hurst);

    // closed-form scale sqrt(H(2H-1)/B(2-2H, H-1/2)) as an independent oracle
    const double beta = std::tgamma(2.0 - 2.0 * hurst) * std::tgamma(hurst - 0.5) /
                        std::tgamma(1.5 - hurst);
    const double scale_ref = std::sqrt(hurst * (2.0 * hurst - 1.0) / beta);
    CHECK(scale == doctest::Approx(scale_ref).epsilon(1e-4));

    CHECK(fractional_variance_at_one(hurst, scale) == doctest::Approx(1.0).epsilon(1e-3));

    const auto fbm = KernelSpec::fractional_bm(hurst, scale);
    for (const auto& [s, t] : std::vector<std::pair<double, double>>{
             {0.3, 0.7}, {0.2, 0.9}, {0.5, 0.8}}) {
        const double expect = fractional_covariance_reference(hurst, t, s);
        CHECK(riemann_cov(fbm, t, s, 40000) == doctest::Approx(expect).epsilon(5e-3));
    }
}

TEST_CASE("fractional H<1/2 variance calibration (experimental path)") {
    const double hurst = 0.3;
    const double scale = calibrate_fractional_scale(hurst);
    CHECK(fractional_variance_at_one(hurst, scale) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("derivative modes agree for smooth kernels") {
    auto ou = KernelSpec::ornstein_uhlenbeck(1.3);
    const double analytic = ou.deriv_t(0.6, 0.2);
    ou.set_derivative_mode(DerivativeMode::FiniteDifference);
    const double fd = ou.deriv_t(0.6, 0.2);
    CHECK(analytic == doctest::Approx(-1.3 * std::exp(-1.3 * 0.4)).epsilon(1e-12));
    CHECK(fd == doctest::Approx(analytic).epsilon(1e-8));
}

TEST_CASE("tabulated kernel interpolates its table") {
    auto g = TimeGrid::uniform(64);
    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0);
    Eigen::MatrixXd vals(g->size(), g->size());
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t j = 0; j < g->size(); ++j)
            vals(i, j) = ou.eval(g->node(i), g->node(j));
    const auto tab = KernelSpec::tabulated(g, vals, true);
    CHECK(tab.eval(0.5, 0.25) == doctest::Approx(ou.eval(0.5, 0.25)).epsilon(1e-12));
    CHECK(tab.eval(0.51, 0.26) == doctest::Approx(ou.eval(0.51, 0.26)).epsilon(1e-3));
    CHECK(tab.eval(0.25, 0.5) == 0.0);
}
