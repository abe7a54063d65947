#include "pspin/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pspin {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double semicircle_density(double x) {
    if (std::fabs(x) > 2.0) return 0.0;
    return std::sqrt(4.0 - x * x) / (2.0 * kPi);
}

double semicircle_stieltjes(double z) {
    return 0.5 * (z - std::sqrt(z * z - 4.0));
}

double omega_fn(double x) {
    double ax = std::fabs(x);
    double base = 0.25 * x * x - 0.5;
    if (ax <= 2.0) return base;
    double root = std::sqrt(x * x - 4.0);
    return base - (0.25 * ax * root - std::log(std::sqrt(0.25 * x * x - 1.0) + 0.5 * ax));
}

double omega_prime(double x) {
    double ax = std::fabs(x);
    if (ax <= 2.0) return 0.5 * x;
    double root = std::sqrt(x * x - 4.0);
    return 0.5 * x - (x > 0 ? 0.5 : -0.5) * root;
}

double theta_p(double u, int p) {
    if (p < 3) throw std::invalid_argument("theta_p: p must be >= 3");
    double half_log = 0.5 * std::log(static_cast<double>(p - 1));
    if (u >= 0.0) return half_log;
    double g = std::sqrt(static_cast<double>(p) / (p - 1));
    return 0.5 + half_log - 0.5 * u * u + omega_fn(g * u);
}

double theta_p_prime(double u, int p) {
    if (p < 3) throw std::invalid_argument("theta_p_prime: p must be >= 3");
    if (u >= 0.0) throw std::domain_error("theta_p_prime: only defined for u < 0");
    double g = std::sqrt(static_cast<double>(p) / (p - 1));
    return -u + g * omega_prime(g * u);
}

double h_tilde(double x) {
    if (x == 1.0 || x == -1.0) throw std::domain_error("h_tilde: pole at x = +-1");
    double r = std::fabs((x - 1.0) / (x + 1.0));
    return std::pow(r, 0.25) + std::pow(r, -0.25);
}

double log_omega_surface(int N) {
    if (N < 1) throw std::invalid_argument("log_omega_surface: N must be >= 1");
    return std::log(2.0) + 0.5 * N * std::log(kPi) - std::lgamma(0.5 * N);
}

double gumbel_min_cdf(double x, double c_p) {
    if (!(c_p > 0.0)) throw std::invalid_argument("gumbel_min_cdf: c_p must be positive");
    return 1.0 - std::exp(-std::exp(c_p * x) / c_p);
}

double gumbel_min_median(double c_p) {
    return std::log(c_p * std::log(2.0)) / c_p;
}

TheoryConstants solve_constants(int p, int N) {
    ModelParams params{p, N};
    params.validate();

    TheoryConstants c;
    c.p = p;
    c.N = N;
    c.gamma_p = std::sqrt(static_cast<double>(p) / (p - 1));
    c.iota_p = (p % 2 == 0) ? 1.0 : 0.0;
    c.E_inf = 2.0 * std::sqrt(static_cast<double>(p - 1) / p);

    // E_0 by bisection of E -> theta_p(-E) on (E_inf, 10). theta_p(-E_inf) > 0 and
    // theta_p(-E) -> -inf, so a sign change is guaranteed; assert it anyway.
    double lo = c.E_inf + 1e-9;
    double hi = 10.0;
    double flo = theta_p(-lo, p);
    double fhi = theta_p(-hi, p);
    if (!(flo > 0.0) || !(fhi < 0.0)) {
        throw numerical_error("solve_constants: no sign change on the E_0 bracket for p=" +
                              std::to_string(p));
    }
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (theta_p(-mid, p) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    c.E_0 = 0.5 * (lo + hi);
    c.c_p = theta_p_prime(-c.E_0, p);
    c.C_0 = 0.5 * c.gamma_p * semicircle_stieltjes(c.gamma_p * c.E_0);

    // The constant that centers nu_N(x) at e^{c_p x}. The asymptotic density of the
    // critical-value process is rho_N(u) ~ (1/(2 sqrt(pi))) h(x_u) exp{(N-1) theta_p - log(N)/2},
    // which fixes K_0 below; checked against the exact finite-N density in the tests.
    double ht = h_tilde(-0.5 * c.gamma_p * c.E_0);
    c.K_0 = -0.5 * c.E_0 + std::log(ht / ((1.0 + c.iota_p) * 2.0 * std::sqrt(kPi))) / c.c_p;
    c.m_N = -c.E_0 * N + std::log(static_cast<double>(N)) / (2.0 * c.c_p) - c.K_0;
    return c;
}

}  // namespace pspin
