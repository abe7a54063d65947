#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pspin/params.hpp"
#include "pspin/rng.hpp"

namespace pspin {

// Point on the sphere of radius sqrt(N). Construction renormalizes, since Newton
// iterates drift off the sphere.
struct SpherePoint {
    Eigen::VectorXd coords;

    int dim() const { return static_cast<int>(coords.size()); }
    static SpherePoint project(Eigen::VectorXd v);
    static SpherePoint uniform(int N, Rng& rng);
    static SpherePoint north_pole(int N);
};

// ordered (non-symmetrized) i.i.d. N(0,1) coefficient array of length N^p
struct DisorderTensor {
    ModelParams params;
    std::uint64_t seed = 0;
    std::vector<double> coefficients;
};

inline constexpr std::uint64_t kDefaultEntryBudget = std::uint64_t(1) << 31;

DisorderTensor sample_disorder(const ModelParams& params, std::uint64_t seed,
                               std::uint64_t entry_budget = kDefaultEntryBudget);

double overlap(const SpherePoint& a, const SpherePoint& b);

// H_N(sigma) = N^{-(p-1)/2} sum_{i_1..i_p} J_{i_1..i_p} sigma_{i_1} ... sigma_{i_p}
double evaluate(const DisorderTensor& J, const SpherePoint& sigma);

// Exact polynomial derivatives via cached partial contractions. Holds scratch buffers;
// create one per thread.
class FieldEvaluator {
  public:
    explicit FieldEvaluator(const DisorderTensor& J);

    double value(const Eigen::VectorXd& sigma) const;
    double value_grad(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad) const;
    double value_grad_hess(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad,
                           Eigen::MatrixXd& hess) const;

    int N() const { return N_; }
    int p() const { return p_; }

  private:
    void build_suffix_stack(const double* sigma) const;

    const DisorderTensor* J_;
    int N_, p_;
    double scale_;
    mutable std::vector<double> suffix_;            // concatenated suffix-contraction stages
    mutable std::vector<std::size_t> suffix_off_;   // offset of the rank-k stage, k >= 1
    mutable std::vector<double> work_a_, work_b_;
    mutable std::vector<double> chain_[2];
};

// H_N + H'_N / sqrt(N); same evaluation surface as FieldEvaluator
class PerturbedEvaluator {
  public:
    PerturbedEvaluator(const DisorderTensor& base, const DisorderTensor& perturb);

    double value(const Eigen::VectorXd& sigma) const;
    double value_grad(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad) const;
    double value_grad_hess(const Eigen::VectorXd& sigma, Eigen::VectorXd& grad,
                           Eigen::MatrixXd& hess) const;

    int N() const { return base_.N(); }
    int p() const { return base_.p(); }

  private:
    FieldEvaluator base_, perturb_;
    double weight_;
};

void euclidean_grad_hess(const DisorderTensor& J, const SpherePoint& sigma,
                         Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

// Orthonormal tangent frame at a base point. Only gauge-invariant outputs (values,
// gradient norms, spectra) are exposed downstream; raw components depend on the frame.
struct LocalFrame {
    SpherePoint basepoint;
    Eigen::MatrixXd tangent_basis;  // N x (N-1)

    // Householder reflection taking the north pole to basepoint/sqrt(N)
    static LocalFrame householder(const SpherePoint& base);
    // random orthonormal frame, for gauge-invariance tests
    static LocalFrame randomized(const SpherePoint& base, Rng& rng);
};

// gradient in the frame and frame Hessian minus (p H / N) I
void riemannian_grad_hess(const DisorderTensor& J, const SpherePoint& sigma,
                          const LocalFrame& frame, Eigen::VectorXd& grad,
                          Eigen::MatrixXd& hess);

// covariance kernel W(x,y) of the chart field at the north pole
double w_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct CovarianceCheckRow {
    std::string name;
    double target = 0.0;
    double estimate = 0.0;
    double se = 0.0;      // 0 for deterministic finite-difference rows
    double z = 0.0;
};

struct CovarianceReport {
    ModelParams params;
    int trials = 0;
    std::vector<CovarianceCheckRow> monte_carlo;   // disorder-average estimates
    std::vector<CovarianceCheckRow> finite_diff;   // mixed FD of W(x,y)^p at 0
};

CovarianceReport verify_covariance_structure(const ModelParams& params, int trials,
                                             std::uint64_t seed);

// Disorder file: magic "PSPN", u16 version=1, u16 p, u32 N, u64 seed, N^p LE doubles.
void write_disorder_file(const std::string& path, const DisorderTensor& J);
DisorderTensor read_disorder_file(const std::string& path);

}  // namespace pspin
