#include "pspin/random_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "pspin/params.hpp"
#include "pspin/theory.hpp"

namespace pspin {

namespace {
constexpr double kPi = 3.14159265358979323846;
// dense sampling below this size; tridiagonal spectra above
constexpr int kDenseLimit = 16;
}  // namespace

GOEMatrix sample_goe(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_goe: n must be >= 1");
    GOEMatrix m;
    m.dim = n;
    m.entries.resize(n, n);
    double off_sd = 1.0 / std::sqrt(static_cast<double>(n));
    double diag_sd = std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
        m.entries(i, i) = diag_sd * rng.normal();
        for (int j = i + 1; j < n; ++j) {
            double x = off_sd * rng.normal();
            m.entries(i, j) = x;
            m.entries(j, i) = x;
        }
    }
    return m;
}

SpectralSample eigenvalues(const GOEMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.entries, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("eigenvalues: eigensolver failed to converge");
    }
    return SpectralSample{m.dim, solver.eigenvalues()};
}

SpectralSample sample_goe_spectrum_tridiag(int n, Rng& rng) {
    // Dumitriu-Edelman beta=1: diag N(0,2), off-diagonals chi_{n-1},...,chi_1, scaled by 1/sqrt(n)
    Eigen::VectorXd diag(n), sub(std::max(0, n - 1));
    double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) diag[i] = s * std::sqrt(2.0) * rng.normal();
    for (int k = 1; k < n; ++k) sub[k - 1] = s * rng.chi(n - k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("sample_goe_spectrum_tridiag: eigensolver failed");
    }
    return SpectralSample{n, solver.eigenvalues()};
}

SignLog hermite_orthonormal(int n, double x) {
    if (n < 0) throw std::invalid_argument("hermite_orthonormal: n must be >= 0");
    double prev = 0.0;
    double cur = std::pow(kPi, -0.25);
    double log_scale = 0.0;
    for (int k = 0; k < n; ++k) {
        double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
        double m = std::max(std::fabs(cur), std::fabs(prev));
        if (m > 1e150) {
            cur /= m;
            prev /= m;
            log_scale += std::log(m);
        }
    }
    if (cur == 0.0) return {0.0, kNegInf};
    return {cur > 0 ? 1.0 : -1.0, std::log(std::fabs(cur)) + log_scale};
}

SignLog expected_det_hermite(int n, double v) {
    if (n < 1) throw std::invalid_argument("expected_det_hermite: n must be >= 1");
    SignLog pn = hermite_orthonormal(n, std::sqrt(0.5 * n) * v);
    double parity = (n % 2 == 0) ? 1.0 : -1.0;
    SignLog out;
    out.sign = parity * pn.sign;
    out.log_abs = 0.25 * std::log(kPi) + 0.5 * std::lgamma(n + 1.0) + pn.log_abs -
                  0.5 * n * std::log(static_cast<double>(n));
    return out;
}

namespace {

// log|det(T - vI)| of the scaled tridiagonal model, O(n) continuant with rescaling
double tridiag_log_abs_det(int n, double v, Rng& rng, double* sign_out) {
    double s = 1.0 / std::sqrt(static_cast<double>(n));
    double d_prev = 1.0;
    double d_cur = s * std::sqrt(2.0) * rng.normal() - v;
    double log_scale = 0.0;
    for (int k = 1; k < n; ++k) {
        double a = s * std::sqrt(2.0) * rng.normal() - v;
        double b = s * rng.chi(n - k);
        double d_next = a * d_cur - b * b * d_prev;
        d_prev = d_cur;
        d_cur = d_next;
        double m = std::max(std::fabs(d_cur), std::fabs(d_prev));
        if (m > 1e150) {
            d_cur /= m;
            d_prev /= m;
            log_scale += std::log(m);
        }
    }
    if (sign_out) *sign_out = d_cur >= 0 ? 1.0 : -1.0;
    if (d_cur == 0.0) return kNegInf;
    return std::log(std::fabs(d_cur)) + log_scale;
}

}  // namespace

McEstimate expected_abs_det_mc(int n, double v, long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("expected_abs_det_mc: samples must be >= 1");
    std::vector<double> logs(samples);
    if (n <= kDenseLimit) {
        for (long s = 0; s < samples; ++s) {
            Rng rng(seed, StreamKind::det_mc, static_cast<std::uint64_t>(s));
            SpectralSample sp = eigenvalues(sample_goe(n, rng));
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += std::log(std::fabs(sp.eigenvalues[i] - v));
            logs[s] = acc;
        }
    } else {
        for (long s = 0; s < samples; ++s) {
            Rng rng(seed, StreamKind::det_mc, static_cast<std::uint64_t>(s));
            logs[s] = tridiag_log_abs_det(n, v, rng, nullptr);
        }
    }
    LogMeanResult r = log_domain_mean(logs);
    return {r.log_mean, r.rel_se, samples};
}

SignedDetEstimate expected_det_mc(int n, double v, long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("expected_det_mc: samples must be >= 1");
    RunningStats stats;
    for (long s = 0; s < samples; ++s) {
        Rng rng(seed, StreamKind::det_mc, static_cast<std::uint64_t>(s));
        GOEMatrix m = sample_goe(n, rng);
        Eigen::MatrixXd shifted = m.entries - v * Eigen::MatrixXd::Identity(n, n);
        stats.add(shifted.determinant());
    }
    return {stats.mean(), stats.se(), samples};
}

std::shared_ptr<const GoeSpectrumCache> GoeSpectrumCache::draw(int n, long samples,
                                                               std::uint64_t seed) {
    auto cache = std::make_shared<GoeSpectrumCache>();
    cache->n_ = n;
    cache->samples_ = samples;
    cache->eigs_.resize(static_cast<std::size_t>(samples) * n);
    for (long s = 0; s < samples; ++s) {
        Rng rng(seed, StreamKind::det_mc, static_cast<std::uint64_t>(s));
        SpectralSample sp = (n <= kDenseLimit) ? eigenvalues(sample_goe(n, rng))
                                               : sample_goe_spectrum_tridiag(n, rng);
        for (int i = 0; i < n; ++i) cache->eigs_[static_cast<std::size_t>(s) * n + i] = sp.eigenvalues[i];
    }
    return cache;
}

double GoeSpectrumCache::log_abs_det(long s, double v) const {
    // antithetic pair (lambda, -lambda): keeps the estimator exactly even in v and
    // roughly halves the variance; scaled products instead of per-factor logs
    const double* row = &eigs_[static_cast<std::size_t>(s) * n_];
    double pa = 1.0, pb = 1.0;
    long ea = 0, eb = 0;
    for (int i = 0; i < n_; ++i) {
        pa *= row[i] - v;
        pb *= row[i] + v;
        if ((i & 15) == 15) {
            int k;
            pa = std::frexp(pa, &k);
            ea += k;
            pb = std::frexp(pb, &k);
            eb += k;
        }
    }
    constexpr double ln2 = 0.6931471805599453;
    double la = (pa == 0.0) ? kNegInf : std::log(std::fabs(pa)) + ea * ln2;
    double lb = (pb == 0.0) ? kNegInf : std::log(std::fabs(pb)) + eb * ln2;
    return log_add(la, lb) - ln2;
}

McEstimate GoeSpectrumCache::abs_det(double v) const {
    std::vector<double> logs(samples_);
    for (long s = 0; s < samples_; ++s) logs[s] = log_abs_det(s, v);
    LogMeanResult r = log_domain_mean(logs);
    return {r.log_mean, r.rel_se, samples_};
}

std::vector<PlancherelRotachRow> plancherel_rotach_check(const std::vector<int>& n_list, double x,
                                                         double delta) {
    if (!(x <= -(1.0 + delta))) {
        throw std::invalid_argument("plancherel_rotach_check: need x <= -(1+delta)");
    }
    std::vector<PlancherelRotachRow> rows;
    rows.reserve(n_list.size());
    for (int n : n_list) {
        SignLog pn = hermite_orthonormal(n, std::sqrt(2.0 * n) * x);
        PlancherelRotachRow row;
        row.n = n;
        row.sign_poly = pn.sign;
        row.sign_asymptotic = (n % 2 == 0) ? 1.0 : -1.0;
        row.log_abs_poly = pn.log_abs;
        row.log_abs_asymptotic = -0.5 * std::log(4.0 * kPi * std::sqrt(2.0 * n)) +
                                 n * (omega_fn(2.0 * x) + 0.5) + std::log(h_tilde(x));
        row.rel_error = std::exp(row.log_abs_poly - row.log_abs_asymptotic) - 1.0;
        row.n_times_rel_error = n * row.rel_error;
        rows.push_back(row);
    }
    return rows;
}

double stieltjes_linear_statistic(const SpectralSample& s, double shift) {
    double acc = 0.0;
    for (int i = 0; i < s.dim; ++i) acc += 1.0 / (s.eigenvalues[i] + shift);
    return acc / s.dim;
}

}  // namespace pspin
