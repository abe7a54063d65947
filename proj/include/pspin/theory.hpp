#pragma once

#include "pspin/params.hpp"

namespace pspin {

// Scalar constants attached to a (p, N) pair. E_0 is the root of theta_p(-E) = 0 above
// E_inf; c_p its slope there; C_0 the Stieltjes-transform constant; K_0 and m_N the
// centering of the extremal process.
struct TheoryConstants {
    int p = 0;
    int N = 0;
    double gamma_p = 0.0;  // sqrt(p/(p-1))
    double iota_p = 0.0;   // 1 for even p, 0 for odd
    double E_inf = 0.0;    // 2 sqrt((p-1)/p)
    double E_0 = 0.0;
    double c_p = 0.0;
    double C_0 = 0.0;
    double K_0 = 0.0;
    double m_N = 0.0;      // -E_0 N + log(N)/(2 c_p) - K_0
};

// density of the semicircle law on [-2,2]
double semicircle_density(double x);

// Stieltjes transform of the semicircle law, int dmu*(l)/(z-l), for z > 2
double semicircle_stieltjes(double z);

// log-potential of the semicircle law, int log|l-x| dmu*(l), closed form
double omega_fn(double x);

// derivative of omega_fn; equals the Stieltjes transform for x > 2
double omega_prime(double x);

// exponential growth rate of the expected number of critical points below Nu
double theta_p(double u, int p);

// derivative of theta_p on the negative axis; throws std::domain_error for u >= 0
double theta_p_prime(double u, int p);

// |(x-1)/(x+1)|^{1/4} + |(x+1)/(x-1)|^{1/4}; poles at x = +-1
double h_tilde(double x);

// log of the surface area of the unit sphere in R^N
double log_omega_surface(int N);

// limiting law of the centered minimum: P{min - m_N < x}
double gumbel_min_cdf(double x, double c_p);

// median of the limiting law of the centered minimum
double gumbel_min_median(double c_p);

TheoryConstants solve_constants(int p, int N);

}  // namespace pspin
