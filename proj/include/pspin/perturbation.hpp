#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pspin/critical_points.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/theory.hpp"

namespace pspin {

// H_N plus an independent copy scaled by 1/sqrt(N)
struct PerturbationPair {
    DisorderTensor base;
    DisorderTensor perturb;
    double s_N = 0.0;  // sqrt((N+1)/N)

    static PerturbationPair make(const ModelParams& params, std::uint64_t base_seed,
                                 std::uint64_t perturb_seed);
};

struct MatchedPair {
    CriticalPoint original;          // critical point of H
    CriticalPoint matched;           // critical point of H+ reached from it
    double overlap_val = 0.0;
    double predicted_shift = 0.0;    // H'(sigma)/sqrt(N) - C_0
    double actual_shift = 0.0;       // H+(sigma') - H(sigma)
    double residual = 0.0;
    // model diagnostics: quadratic/linear-approximation shift and the trace statistic
    // whose disorder average is C_0, plus the Hessian spectral-window event
    double delta_model = 0.0;
    double trace_proxy = 0.0;
    bool hessian_in_window = false;
};

struct MatchReport {
    std::vector<MatchedPair> matches;
    int attempted = 0;
    int unmatched = 0;
};

// one realization of the extremal process: centered critical values in [-L, L]
struct PointProcessSample {
    std::vector<double> centered_values;  // sorted
    double window_L = 0.0;
    double parity_weight = 1.0;  // (1 + iota_p)^{-1}, applied structurally
    ModelParams params;
};

// Window-complete set -> centered atoms. For even p one atom per antipodal pair
// (representative with positive last coordinate); for odd p one atom per point.
PointProcessSample build_xi(const CriticalSet& cs, double L, const TheoryConstants& constants);

struct ScalingCheckRow {
    std::string name;
    double overlap = 0.0;
    double target = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
};

// Empirical covariance of H+ across disorder draws at fixed probes versus (N+1) R^p.
std::vector<ScalingCheckRow> scaling_law_check(const ModelParams& params, int probes,
                                               int draws, std::uint64_t seed);

// Newton on H+ started at each window critical point of H; acceptance requires
// overlap >= 1 - N^{-2 alpha}.
MatchReport match_critical_points(const PerturbationPair& pair, const CriticalSet& cs_window,
                                  double alpha, const TheoryConstants& constants,
                                  const NewtonOptions& opt = {});

struct ShiftReport {
    long n_matches = 0;
    double mean_shift = 0.0;
    double se_mean = 0.0;
    double z_mean = 0.0;        // vs -C_0
    double var_shift = 0.0;
    double se_var = 0.0;
    double z_var = 0.0;         // vs 1
    double ks_distance = 0.0;   // vs Normal(-C_0, 1)
    double ks_pvalue = 0.0;
    double slope = 0.0;         // actual on predicted
    double se_slope = 0.0;
    double cross_corr = 0.0;    // within-instance pair correlation
    double se_cross_corr = 0.0;
    double median_abs_residual = 0.0;
    double mean_trace_proxy = 0.0;     // -> C_0
    double se_trace_proxy = 0.0;
    double frac_hessian_in_window = 0.0;
};

ShiftReport shift_distribution_test(const std::vector<std::vector<MatchedPair>>& per_instance,
                                    const TheoryConstants& constants);

struct PoissonBinRow {
    double lo = 0.0, hi = 0.0;
    double limit_mean = 0.0;   // integral of e^{c_p x} over the bin
    double mean = 0.0;
    double se = 0.0;
    double dispersion = 0.0;   // var / mean
    double dispersion_se = 0.0;
};

struct PoissonReport {
    std::vector<PoissonBinRow> bins;
    double second_moment_ratio = 0.0;     // E[n(n-1)] / (E n)^2 over the whole window
    double second_moment_ratio_se = 0.0;
    double max_abs_bin_corr = 0.0;
    double max_abs_bin_corr_se = 0.0;
    long samples = 0;
};

PoissonReport poisson_tests(const std::vector<PointProcessSample>& samples,
                            const TheoryConstants& constants);

struct GumbelReport {
    long used = 0;
    long excluded = 0;
    double ks_distance = 0.0;
    double ks_pvalue = 0.0;
    double median = 0.0;
    double median_target = 0.0;
    double median_se = 0.0;
    std::vector<double> qq_sample;       // sorted minima
    std::vector<double> qq_theoretical;  // matching limit-law quantiles
};

// Centered minima against the limiting law. Samples whose leftmost atom sits within
// `margin` of the lower window edge are excluded (the global minimum may be clipped).
GumbelReport gumbel_test(const std::vector<PointProcessSample>& samples,
                         const TheoryConstants& constants, double margin = 0.25);

// experiment drivers (instance-level parallelism, deterministic merge by index)

struct ExtremalConfig {
    ModelParams params;
    int samples = 100;
    double L = 3.0;
    WindowSearchOptions search;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double gumbel_margin = 0.25;
};

struct ExtremalRun {
    TheoryConstants constants;
    std::vector<PointProcessSample> xis;
};

ExtremalRun run_extremal(const ExtremalConfig& config);

struct PerturbConfig {
    ModelParams params;
    int instances = 100;
    double L = 3.0;
    double alpha = 0.45;
    WindowSearchOptions search;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct PerturbRun {
    TheoryConstants constants;
    std::vector<std::vector<MatchedPair>> per_instance;
    long attempted = 0;
    long unmatched = 0;
};

PerturbRun run_perturb(const PerturbConfig& config);

}  // namespace pspin
