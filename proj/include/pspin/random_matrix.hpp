#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "pspin/numeric.hpp"
#include "pspin/rng.hpp"

namespace pspin {

// GOE with the paper's normalization: off-diagonal variance 1/n, diagonal variance 2/n.
struct GOEMatrix {
    int dim = 0;
    Eigen::MatrixXd entries;
};

struct SpectralSample {
    int dim = 0;
    Eigen::VectorXd eigenvalues;  // nondecreasing
};

GOEMatrix sample_goe(int n, Rng& rng);

// Full spectrum, ascending. Throws numerical_error if the solver fails to converge.
SpectralSample eigenvalues(const GOEMatrix& m);

// Spectrum drawn from the tridiagonal beta=1 ensemble with the same eigenvalue law as
// sample_goe + eigenvalues; O(n^2) instead of O(n^3). Spectral statistics only.
SpectralSample sample_goe_spectrum_tridiag(int n, Rng& rng);

// Orthonormal Hermite polynomial w.r.t. weight e^{-x^2}, in sign/log-magnitude form.
SignLog hermite_orthonormal(int n, double x);

// E{det(M - vI)} for an n-dimensional GOE via the Hermite identity
//   n^{n/2} E{det(M - vI)} = (-1)^n pi^{1/4} sqrt(n!) p_n(sqrt(n/2) v)
SignLog expected_det_hermite(int n, double v);

struct McEstimate {
    double log_mean = kNegInf;
    double rel_se = 0.0;
    long samples = 0;

    double mean() const { return std::exp(log_mean); }
    double se() const { return rel_se * mean(); }
};

// Monte Carlo mean of |det(M - vI)| with jackknife standard error, log-domain
// accumulation. Dense sampling for small n, tridiagonal spectra above that.
McEstimate expected_abs_det_mc(int n, double v, long samples, std::uint64_t seed);

// Monte Carlo mean of the signed det(M - vI) over dense GOE samples (small n only).
struct SignedDetEstimate {
    double mean = 0.0;
    double se = 0.0;
    long samples = 0;
};
SignedDetEstimate expected_det_mc(int n, double v, long samples, std::uint64_t seed);

// Cached eigenvalue draws shared across shifts v, so that quadrature over u sees a
// smooth integrand (common random numbers). Dense sampling.
class GoeSpectrumCache {
  public:
    static std::shared_ptr<const GoeSpectrumCache> draw(int n, long samples, std::uint64_t seed);

    int dim() const { return n_; }
    long samples() const { return samples_; }
    // log|det(M_s - vI)| for sample s
    double log_abs_det(long s, double v) const;
    // mean/SE of |det(M - vI)| over the cache
    McEstimate abs_det(double v) const;

  private:
    int n_ = 0;
    long samples_ = 0;
    std::vector<double> eigs_;  // samples_ x n_, row-major
};

struct PlancherelRotachRow {
    int n;
    double sign_poly;        // sign of p_n(sqrt(2n) x)
    double sign_asymptotic;  // (-1)^n
    double log_abs_poly;
    double log_abs_asymptotic;
    double rel_error;        // |poly/asymptotic| - 1
    double n_times_rel_error;
};

// Compares p_n(sqrt(2n) x) against the outer asymptotic
//   (-1)^n (4 pi sqrt(2n))^{-1/2} exp{n (Omega(2x) + 1/2)} h_tilde(x),  x < -(1+delta)
std::vector<PlancherelRotachRow> plancherel_rotach_check(const std::vector<int>& n_list, double x,
                                                         double delta = 0.05);

// (1/n) sum 1/(lambda_i + shift)
double stieltjes_linear_statistic(const SpectralSample& s, double shift);

}  // namespace pspin
