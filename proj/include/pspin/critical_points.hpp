#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "pspin/hamiltonian.hpp"
#include "pspin/newton.hpp"
#include "pspin/theory.hpp"

namespace pspin {

struct CriticalPoint {
    SpherePoint location;
    double value = 0.0;
    double grad_residual = 0.0;
    Eigen::VectorXd hessian_spectrum;  // frame Hessian eigenvalues, ascending
    int morse_index = 0;               // eigenvalues < -1e-8
    bool degenerate = false;           // any |eigenvalue| <= 1e-8
};

struct CriticalSet {
    std::vector<CriticalPoint> points;
    ModelParams params;
    std::uint64_t disorder_seed = 0;
    long restarts_used = 0;
    std::optional<std::pair<double, double>> window;  // [m_N - L, m_N + L] if selected
};

// classify a converged location: value, residual, spectrum, Morse index
CriticalPoint classify_point(const DisorderTensor& J, const SpherePoint& sigma);

// Multistart Newton over uniform starts, deduplicated at |overlap| > 1 - 1e-8, with
// antipodal closure. Deterministic for fixed (J, restarts, seed) at any thread count.
CriticalSet find_all(const DisorderTensor& J, long restarts, std::uint64_t seed,
                     const NewtonOptions& opt = {}, unsigned threads = 1);

struct WindowSearchOptions {
    long min_starts = 64;        // descent starts feeding the minima pool
    int kick_rounds = 3;         // basin-hopping waves around window points
    int kicks_per_point = 6;
    double kick_norm_unit = 0.1;  // tangent kick norm, units of sqrt(N)
    double value_slack = 2.0;     // extended window kept during the search
    NewtonOptions newton;
};

// Enumerates critical points with values near [m_N - L, m_N + L]: descent to minima,
// then tangent-kick Newton waves to pick up nearby saddles. Heuristic by design; the
// completeness standard is restart saturation plus Kac-Rice agreement.
CriticalSet find_window(const DisorderTensor& J, const TheoryConstants& constants, double L,
                        const WindowSearchOptions& opt, std::uint64_t seed,
                        unsigned threads = 1);

CriticalSet window_select(const CriticalSet& cs, double L, const TheoryConstants& constants);

// Ordered pairs of distinct critical points with both values in N*B and overlap in the
// open interval (r_lo, r_hi). B is in u/N units.
long pair_counts(const CriticalSet& cs, double b_lo, double b_hi, double r_lo, double r_hi);

// count of points with value in N*B
long count_in_band(const CriticalSet& cs, double b_lo, double b_hi);

// max |overlap| over pairs sigma_1 != +-sigma_2; absent if no such pair
std::optional<double> separation_stats(const CriticalSet& cs);

struct CompletenessReport {
    ModelParams params;
    int instances = 0;
    long restarts = 0;
    double enum_mean_total = 0.0;
    double enum_se_total = 0.0;
    double enum_mean_window = 0.0;
    double enum_se_window = 0.0;
    double kr_total = 0.0;
    double kr_total_se = 0.0;
    double kr_window = 0.0;
    double kr_window_se = 0.0;
    double z_total = 0.0;
    double z_window = 0.0;
    bool all_counts_even = false;
    bool eq59_exact_all = false;   // pair identity on every instance, B subset of (-inf, 0)
};

// Enumeration vs Kac-Rice first moment, full-sphere counts. Guarded to N <= 8 where the
// saturation protocol is affordable.
CompletenessReport completeness_check(const ModelParams& params, double L, int instances,
                                      long restarts, std::uint64_t seed, long mc_samples,
                                      unsigned threads = 1);

}  // namespace pspin
