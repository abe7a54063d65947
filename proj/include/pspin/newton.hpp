#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>

#include "pspin/hamiltonian.hpp"

namespace pspin {

struct NewtonOptions {
    int max_iter = 200;
    double tol_factor = 1e-12;        // converged when |P grad| <= tol_factor * sqrt(N)
    double trust_radius_unit = 0.5;   // max step, in units of sqrt(N)
    double armijo = 1e-4;
    int max_backtrack = 45;
    double eig_floor = 1e-10;         // clamp for near-singular Hessian modes
};

struct NewtonResult {
    bool converged = false;
    SpherePoint point;
    int iterations = 0;
    double grad_residual = 0.0;
};

namespace detail {

inline Eigen::VectorXd tangent_project(const Eigen::VectorXd& sigma, const Eigen::VectorXd& v,
                                       int N) {
    return v - (sigma.dot(v) / N) * sigma;
}

}  // namespace detail

// Damped Riemannian Newton for the stationarity system P grad H = 0. The linear solve
// goes through an eigendecomposition of the frame Hessian with |lambda| clamped from
// below, which handles indefinite and near-singular Hessians alike; steps are capped at
// the trust radius and globalized by backtracking on the gradient norm.
template <typename Evaluator>
NewtonResult newton_critical_point(const Evaluator& field, SpherePoint start,
                                   const NewtonOptions& opt = {}) {
    const int N = field.N();
    const int p = field.p();
    const double sqN = std::sqrt(static_cast<double>(N));
    const double tol = opt.tol_factor * sqN;
    const double radius = opt.trust_radius_unit * sqN;

    Eigen::VectorXd sigma = start.coords;
    Eigen::VectorXd grad(N);
    Eigen::MatrixXd hess(N, N);
    NewtonResult res;

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        double h = field.value_grad_hess(sigma, grad, hess);
        Eigen::VectorXd gt = detail::tangent_project(sigma, grad, N);
        double gnorm = gt.norm();
        if (gnorm <= tol) {
            res.converged = true;
            res.point = SpherePoint::project(sigma);
            res.iterations = iter;
            res.grad_residual = gnorm;
            return res;
        }

        LocalFrame frame = LocalFrame::householder(SpherePoint{sigma});
        const Eigen::MatrixXd& B = frame.tangent_basis;
        Eigen::VectorXd gr = B.transpose() * grad;
        Eigen::MatrixXd Hr = B.transpose() * hess * B;
        Hr -= (p * h / N) * Eigen::MatrixXd::Identity(N - 1, N - 1);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hr);
        if (es.info() != Eigen::Success) break;
        Eigen::VectorXd coeff = es.eigenvectors().transpose() * gr;
        for (int i = 0; i < N - 1; ++i) {
            double lam = es.eigenvalues()[i];
            double mag = std::max(std::fabs(lam), opt.eig_floor);
            coeff[i] /= (lam < 0 ? -mag : mag);
        }
        Eigen::VectorXd step = -(B * (es.eigenvectors() * coeff));
        double snorm = step.norm();
        if (snorm > radius) step *= radius / snorm;

        double t = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtrack; ++bt) {
            Eigen::VectorXd cand = sigma + t * step;
            cand *= sqN / cand.norm();
            Eigen::VectorXd gc;
            field.value_grad(cand, gc);
            double gn = detail::tangent_project(cand, gc, N).norm();
            if (gn <= (1.0 - opt.armijo * t) * gnorm) {
                sigma = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    return res;
}

// Trust-region Newton minimization of H on the sphere (convexified solve), then a
// critical-point polish. Converges to local minima from generic starts.
template <typename Evaluator>
NewtonResult newton_minimize(const Evaluator& field, SpherePoint start,
                             const NewtonOptions& opt = {}) {
    const int N = field.N();
    const int p = field.p();
    const double sqN = std::sqrt(static_cast<double>(N));
    const double radius = opt.trust_radius_unit * sqN;

    Eigen::VectorXd sigma = start.coords;
    Eigen::VectorXd grad(N);
    Eigen::MatrixXd hess(N, N);

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        double h = field.value_grad_hess(sigma, grad, hess);
        Eigen::VectorXd gt = detail::tangent_project(sigma, grad, N);
        if (gt.norm() <= 1e-8 * sqN) break;

        LocalFrame frame = LocalFrame::householder(SpherePoint{sigma});
        const Eigen::MatrixXd& B = frame.tangent_basis;
        Eigen::VectorXd gr = B.transpose() * grad;
        Eigen::MatrixXd Hr = B.transpose() * hess * B;
        Hr -= (p * h / N) * Eigen::MatrixXd::Identity(N - 1, N - 1);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hr);
        if (es.info() != Eigen::Success) break;
        double lam_min = es.eigenvalues().minCoeff();
        double tau = lam_min < 1e-6 ? -lam_min + 1e-3 : 0.0;
        Eigen::VectorXd coeff = es.eigenvectors().transpose() * gr;
        for (int i = 0; i < N - 1; ++i) coeff[i] /= (es.eigenvalues()[i] + tau);
        Eigen::VectorXd step = -(B * (es.eigenvectors() * coeff));
        double snorm = step.norm();
        if (snorm > radius) step *= radius / snorm;

        double t = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtrack; ++bt) {
            Eigen::VectorXd cand = sigma + t * step;
            cand *= sqN / cand.norm();
            double hc = field.value(cand);
            if (hc <= h - opt.armijo * t * gt.norm() * std::min(snorm, radius) / 2.0) {
                sigma = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
    }
    return newton_critical_point(field, SpherePoint::project(sigma), opt);
}

}  // namespace pspin
