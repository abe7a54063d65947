#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace pspin {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Sign and log-magnitude pair; the working representation for determinants and
// Hermite values that leave double range.
struct SignLog {
    double sign = 0.0;  // -1, 0, +1
    double log_abs = kNegInf;

    double value() const { return sign == 0.0 ? 0.0 : sign * std::exp(log_abs); }
};

inline SignLog make_signlog(double x) {
    if (x == 0.0) return {0.0, kNegInf};
    return {x > 0 ? 1.0 : -1.0, std::log(std::fabs(x))};
}

// Welford running mean/variance
class RunningStats {
  public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    double se() const { return n_ > 1 ? sd() / std::sqrt(static_cast<double>(n_)) : 0.0; }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Mean and jackknife standard error of exp(a_i) given the log-values a_i, computed in a
// common scaled domain so that the raw values may exceed double range.
struct LogMeanResult {
    double log_mean = kNegInf;  // log of the sample mean of exp(a_i)
    double rel_se = 0.0;        // SE / mean
    std::size_t n = 0;

    double mean() const { return std::exp(log_mean); }
    double se() const { return rel_se * mean(); }
};

inline LogMeanResult log_domain_mean(const std::vector<double>& log_vals) {
    std::size_t n = log_vals.size();
    double peak = kNegInf;
    for (double a : log_vals) peak = std::max(peak, a);
    if (n == 0 || peak == kNegInf) return {kNegInf, 0.0, n};
    double sum = 0.0, sumsq = 0.0;
    for (double a : log_vals) {
        double w = std::exp(a - peak);
        sum += w;
        sumsq += w * w;
    }
    double mean_w = sum / static_cast<double>(n);
    // for a plain sample mean the jackknife SE reduces to sd/sqrt(n)
    double var_w = n > 1 ? (sumsq - static_cast<double>(n) * mean_w * mean_w) / static_cast<double>(n - 1) : 0.0;
    double se_w = std::sqrt(std::max(0.0, var_w) / static_cast<double>(n));
    return {peak + std::log(mean_w), mean_w > 0 ? se_w / mean_w : 0.0, n};
}

namespace detail {

inline double simpson_rule(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline double simpson_rec(const std::function<double(double)>& f, double a, double m, double b,
                          double fa, double fm, double fb, double whole, double tol, int depth,
                          std::size_t* evals) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    if (evals) *evals += 2;
    double left = simpson_rule(fa, flm, fm, m - a);
    double right = simpson_rule(fm, frm, fb, b - m);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals);
}

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double abs_tol, int max_depth = 40, std::size_t* evals = nullptr) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    if (evals) *evals += 3;
    double whole = detail::simpson_rule(fa, fm, fb, b - a);
    return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, abs_tol, max_depth, evals);
}

// Two-sided KS distance between a sorted sample and a reference CDF.
inline double ks_distance_sorted(const std::vector<double>& sorted,
                                 const std::function<double(double)>& cdf) {
    std::size_t n = sorted.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double c = cdf(sorted[i]);
        d = std::max(d, std::max(std::fabs(c - static_cast<double>(i) / n),
                                 std::fabs(static_cast<double>(i + 1) / n - c)));
    }
    return d;
}

inline double ks_asymptotic_pvalue(double dist, std::size_t n) {
    double rn = std::sqrt(static_cast<double>(n));
    double x = (rn + 0.12 + 0.11 / rn) * dist;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * x * x);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace pspin
