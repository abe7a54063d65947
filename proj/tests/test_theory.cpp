#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pspin/theory.hpp"

using namespace pspin;

namespace {
constexpr double kPi = 3.14159265358979323846;
// frozen from a 40-digit bisection/evaluation of the same closed forms
constexpr double kE0_p3 = 1.6569983635274733;
constexpr double kCp_p3 = 0.62502082210699892;
constexpr double kC0_p3 = 0.51598877071023716;
constexpr double kK0_p3 = -0.75402719645902174;
constexpr double kLogOmega500 = -841.64815223008072535;
}  // namespace

TEST_CASE("semicircle density: peak, edge, unit mass") {
    CHECK(semicircle_density(0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(semicircle_density(2.0) == 0.0);
    CHECK(semicircle_density(-2.5) == 0.0);
    double mass = oracles::quad([](double x) { return semicircle_density(x); }, {-2.0, 0.0, 2.0});
    CHECK(std::fabs(mass - 1.0) < 1e-10);
}

TEST_CASE("omega_fn: values, branch continuity, quadrature oracle") {
    CHECK(omega_fn(0.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(omega_fn(2.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::fabs(omega_fn(2.0 + 1e-9) - omega_fn(2.0 - 1e-9)) < 1e-8);
    CHECK(std::fabs(omega_fn(-2.0 + 1e-9) - omega_fn(-2.0 - 1e-9)) < 1e-8);

    // log-potential against direct quadrature, outside and inside the support
    for (double x : {50.0, 3.2, -7.0}) {
        double direct = oracles::quad(
            [x](double l) { return std::log(std::fabs(l - x)) * semicircle_density(l); },
            {-2.0, 0.0, 2.0});
        CHECK(std::fabs(omega_fn(x) - direct) < 1e-8);
    }
    for (double x : {1.3, -0.4}) {
        // integrable log singularity: cut an eps-hole and add its mass analytically
        double eps = 1e-8;
        double direct = oracles::quad(
                            [x](double l) { return std::log(std::fabs(l - x)) * semicircle_density(l); },
                            {-2.0, x - eps}, 1e-13) +
                        oracles::quad(
                            [x](double l) { return std::log(std::fabs(l - x)) * semicircle_density(l); },
                            {x + eps, 2.0}, 1e-13) +
                        2.0 * semicircle_density(x) * eps * (std::log(eps) - 1.0);
        CHECK(std::fabs(omega_fn(x) - direct) < 1e-6);
    }
}

TEST_CASE("omega_prime: odd, Stieltjes value, finite differences") {
    CHECK(omega_prime(0.0) == 0.0);
    CHECK(omega_prime(2.5) == doctest::Approx(0.5).epsilon(1e-14));
    double quad_st = oracles::quad(
        [](double l) { return semicircle_density(l) / (2.5 - l); }, {-2.0, 0.0, 2.0});
    CHECK(std::fabs(omega_prime(2.5) - quad_st) < 1e-10);

    for (double x : {1.3, -1.3, 3.7, -3.7}) {
        double fd = oracles::central_diff([](double t) { return omega_fn(t); }, x, 1e-6);
        CHECK(std::fabs(omega_prime(x) - fd) < 1e-7);
    }
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 20; ++k) {
        double x = u(gen);
        if (std::fabs(std::fabs(x) - 2.0) < 1e-3) continue;  // FD straddles the branch point
        double fd = oracles::central_diff([](double t) { return omega_fn(t); }, x, 1e-6);
        CHECK(std::fabs(omega_prime(x) - fd) < 1e-7);
    }
}

TEST_CASE("theta_p: branch values and continuity at zero") {
    CHECK(theta_p(0.0, 3) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
    double e_inf = 2.0 * std::sqrt(2.0 / 3.0);
    CHECK(theta_p(-e_inf, 3) ==
          doctest::Approx(0.5 * std::log(2.0) - 1.0 / 3.0).epsilon(1e-12));
    CHECK(std::fabs(theta_p(-1e-6, 3) - theta_p(0.0, 3)) < 1e-9);
    CHECK(theta_p(1.0, 5) == doctest::Approx(0.5 * std::log(4.0)));
}

TEST_CASE("theta_p is continuous at 0 and strictly decreasing left of -E_inf") {
    for (int p : {3, 4, 7}) {
        double e_inf = 2.0 * std::sqrt((p - 1.0) / p);
        double prev = theta_p(-e_inf, p);
        for (int k = 1; k <= 200; ++k) {
            double u = -e_inf - 0.02 * k;
            double cur = theta_p(u, p);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("theta_p_prime: closed values, finite differences, domain guard") {
    double e_inf = 2.0 * std::sqrt(2.0 / 3.0);
    CHECK(theta_p_prime(-e_inf, 3) ==
          doctest::Approx(2.0 * std::sqrt(2.0 / 3.0) - std::sqrt(1.5)).epsilon(1e-12));

    TheoryConstants c3 = solve_constants(3, 10);
    CHECK(std::fabs(theta_p_prime(-c3.E_0, 3) - kCp_p3) < 1e-9);
    CHECK(theta_p_prime(-c3.E_0, 3) > 0.0);

    for (double u : {-1.8, -2.5}) {
        double fd = oracles::central_diff([](double t) { return theta_p(t, 3); }, u, 1e-6);
        CHECK(std::fabs(theta_p_prime(u, 3) - fd) < 1e-7);
    }
    CHECK_THROWS_AS(theta_p_prime(0.0, 3), std::domain_error);
    CHECK_THROWS_AS(theta_p_prime(1.0, 4), std::domain_error);
}

TEST_CASE("h_tilde: values, symmetry, poles") {
    CHECK(h_tilde(0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(h_tilde(-3.0) ==
          doctest::Approx(std::pow(2.0, 0.25) + std::pow(2.0, -0.25)).epsilon(1e-15));
    for (double x : {0.3, 2.7, -5.1}) CHECK(h_tilde(x) == doctest::Approx(h_tilde(-x)));
    CHECK_THROWS_AS(h_tilde(1.0), std::domain_error);
    CHECK_THROWS_AS(h_tilde(-1.0), std::domain_error);
}

TEST_CASE("log_omega_surface: circle, 2-sphere, high dimension") {
    CHECK(log_omega_surface(2) == doctest::Approx(std::log(2.0 * kPi)).epsilon(1e-14));
    CHECK(log_omega_surface(3) == doctest::Approx(std::log(4.0 * kPi)).epsilon(1e-14));
    // N=500: log Gamma(250) = log(249!) summed exactly
    double lg = 0.0;
    for (int k = 2; k <= 249; ++k) lg += std::log(static_cast<double>(k));
    double ref = std::log(2.0) + 250.0 * std::log(kPi) - lg;
    CHECK(std::fabs(log_omega_surface(500) - ref) < 1e-10 * std::fabs(ref));
    CHECK(std::fabs(log_omega_surface(500) - kLogOmega500) < 1e-10 * std::fabs(kLogOmega500));
}

TEST_CASE("gumbel_min_cdf: limits, median, value at zero, monotone CDF") {
    TheoryConstants c = solve_constants(3, 10);
    double cp = c.c_p;
    CHECK(gumbel_min_cdf(-1e6, cp) == 0.0);
    CHECK(gumbel_min_cdf(1e4, cp) == 1.0);
    CHECK(gumbel_min_cdf(0.0, cp) == doctest::Approx(1.0 - std::exp(-1.0 / cp)).epsilon(1e-14));
    double med = gumbel_min_median(cp);
    CHECK(gumbel_min_cdf(med, cp) == doctest::Approx(0.5).epsilon(1e-12));

    double prev = -1.0;
    for (int k = 0; k < 10000; ++k) {
        double x = -20.0 + 40.0 * k / 9999.0;
        double v = gumbel_min_cdf(x, cp);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
    CHECK_THROWS_AS(gumbel_min_cdf(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("solve_constants: root quality and frozen p=3 values") {
    TheoryConstants c = solve_constants(3, 160);
    CHECK(c.E_0 > c.E_inf);
    CHECK(c.E_0 < 2.0);
    CHECK(std::fabs(theta_p(-c.E_0, 3)) < 1e-10);
    CHECK(std::fabs(c.E_0 - kE0_p3) < 1e-10);
    CHECK(std::fabs(c.c_p - kCp_p3) < 1e-10);
    CHECK(std::fabs(c.C_0 - kC0_p3) < 1e-10);
    CHECK(std::fabs(c.K_0 - kK0_p3) < 1e-9);
    CHECK(c.m_N == doctest::Approx(-c.E_0 * 160 + std::log(160.0) / (2 * c.c_p) - c.K_0));
}

TEST_CASE("solve_constants: even-p parity factor in K_0") {
    TheoryConstants c4 = solve_constants(4, 24);
    CHECK(c4.iota_p == 1.0);
    double expected =
        -0.5 * c4.E_0 +
        std::log(h_tilde(-0.5 * c4.gamma_p * c4.E_0) / (2.0 * 2.0 * std::sqrt(kPi))) / c4.c_p;
    CHECK(c4.K_0 == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("constants across p: root residual and three-way C_0 agreement") {
    for (int p = 3; p <= 12; ++p) {
        TheoryConstants c = solve_constants(p, 50);
        CHECK(std::fabs(theta_p(-c.E_0, p)) < 1e-10);
        CHECK(c.c_p > 0.0);
        CHECK(c.E_0 > c.E_inf);

        // closed-form Stieltjes vs quadrature vs the E_0/c_p identity
        double z = c.gamma_p * c.E_0;
        double quad_c0 = 0.5 * c.gamma_p *
                         oracles::quad([z](double l) { return semicircle_density(l) / (z - l); },
                                       {-2.0, 0.0, 2.0});
        CHECK(std::fabs(c.C_0 - quad_c0) < 1e-8);
        CHECK(std::fabs(c.C_0 - (0.5 * c.E_0 - 0.5 * c.c_p)) < 1e-8);
        CHECK(std::fabs(c.C_0 - 0.5 * c.gamma_p * semicircle_stieltjes(z)) < 1e-14);
    }
}

TEST_CASE("model params validation") {
    CHECK_THROWS_AS(solve_constants(2, 10), std::invalid_argument);
    CHECK_THROWS_AS(solve_constants(3, 1), std::invalid_argument);
}
