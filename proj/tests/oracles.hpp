#pragma once

// Test-only oracles: finite differences, quadrature wrappers, Gauss-Hermite nodes.
// Kept independent of the implementation paths they check.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <vector>

#include "pspin/numeric.hpp"

namespace oracles {

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// adaptive quadrature with interior split points (for integrable singularities)
inline double quad(const std::function<double(double)>& f, std::vector<double> pts,
                   double abs_tol = 1e-12) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        acc += pspin::adaptive_simpson(f, pts[i], pts[i + 1], abs_tol);
    }
    return acc;
}

// Gauss-Hermite nodes/weights for weight e^{-x^2} via the Jacobi matrix
struct GaussHermite {
    std::vector<double> nodes, weights;
};

inline GaussHermite gauss_hermite(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = std::sqrt(k / 2.0);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    const double mu0 = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        gh.nodes[i] = es.eigenvalues()[i];
        double v = es.eigenvectors()(0, i);
        gh.weights[i] = mu0 * v * v;
    }
    return gh;
}

// mean of |X - v| for X ~ N(0, sigma^2)
inline double folded_normal_mean(double v, double sigma) {
    double a = std::fabs(v);
    return sigma * std::sqrt(2.0 / M_PI) * std::exp(-a * a / (2.0 * sigma * sigma)) +
           a * (1.0 - 2.0 * pspin::standard_normal_cdf(-a / sigma));
}

}  // namespace oracles
