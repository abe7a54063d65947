#include "pspin/kac_rice.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pspin/numeric.hpp"

namespace pspin {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTailDrop = 45.0;  // ~1e-18 relative truncation of the integrand
}  // namespace

KacRiceDensity::KacRiceDensity(ModelParams params, TheoryConstants constants,
                               KacRiceMethod method, long mc_samples, std::uint64_t seed,
                               double bulk_margin, int hermite_min_dim)
    : params_(params),
      constants_(constants),
      method_(method),
      mc_samples_(mc_samples),
      seed_(seed),
      bulk_margin_(bulk_margin),
      hermite_min_dim_(hermite_min_dim) {
    params_.validate();
    if (mc_samples_ < 8) throw std::invalid_argument("KacRiceDensity: mc_samples too small");
}

double KacRiceDensity::shift_of(double u) const {
    double N = params_.N;
    return constants_.gamma_p * u / std::sqrt(N * (N - 1.0));
}

bool KacRiceDensity::hermite_licensed(double u) const {
    return params_.N - 1 >= hermite_min_dim_ && std::fabs(shift_of(u)) >= 2.0 + bulk_margin_;
}

const GoeSpectrumCache& KacRiceDensity::cache() const {
    if (!cache_) cache_ = GoeSpectrumCache::draw(params_.N - 1, mc_samples_, seed_);
    return *cache_;
}

double KacRiceDensity::log_prefactor(double u) const {
    double N = params_.N;
    double n = N - 1.0;
    return log_omega_surface(params_.N) + 0.5 * n * std::log((params_.p - 1.0) * n / (2.0 * kPi)) -
           0.5 * std::log(2.0 * kPi * N) - u * u / (2.0 * N);
}

RhoValue rho_n(double u, const KacRiceDensity& density) {
    double v = density.shift_of(u);
    double pref = density.log_prefactor(u);
    if (density.method() == KacRiceMethod::hermite_exact && density.hermite_licensed(u)) {
        SignLog ed = expected_det_hermite(density.params().N - 1, v);
        return {pref + ed.log_abs, 0.0};
    }
    McEstimate est = density.cache().abs_det(v);
    return {pref + est.log_mean, est.rel_se};
}

namespace {

// composite Simpson nodes/weights on [lo, hi] with n panels (n even)
void simpson_grid(double lo, double hi, int panels, std::vector<double>& nodes,
                  std::vector<double>& weights) {
    int m = panels + 1;
    double h = (hi - lo) / panels;
    nodes.resize(m);
    weights.resize(m);
    for (int i = 0; i < m; ++i) {
        nodes[i] = lo + i * h;
        double w = (i == 0 || i == m - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        weights[i] = w * h / 3.0;
    }
}

// Monte Carlo quadrature of rho over [lo, hi]: common eigenvalue draws across nodes,
// refined until the mean integral stabilizes, then per-sample totals for the SE.
MeanCrt integrate_rho_mc(const KacRiceDensity& d, double lo, double hi) {
    const GoeSpectrumCache& cache = d.cache();
    const long S = cache.samples();

    std::vector<double> nodes, weights;
    double prev = 0.0;
    int panels = 256;
    double mean_val = 0.0;
    for (int round = 0;; ++round) {
        simpson_grid(lo, hi, panels, nodes, weights);
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            double lp = d.log_prefactor(nodes[j]);
            acc += weights[j] * std::exp(lp + cache.abs_det(d.shift_of(nodes[j])).log_mean);
        }
        mean_val = acc;
        if (round > 0 && std::fabs(mean_val - prev) <= 1e-7 * std::max(1e-300, std::fabs(mean_val))) break;
        if (panels >= 4096) break;
        prev = mean_val;
        panels *= 2;
    }

    std::vector<double> per_sample(S, 0.0);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        double lp = d.log_prefactor(nodes[j]);
        double v = d.shift_of(nodes[j]);
        for (long s = 0; s < S; ++s) {
            per_sample[s] += weights[j] * std::exp(lp + cache.log_abs_det(s, v));
        }
    }
    RunningStats stats;
    for (long s = 0; s < S; ++s) stats.add(per_sample[s]);
    return {stats.mean(), stats.se()};
}

MeanCrt integrate_rho_hermite(const KacRiceDensity& d, double lo, double hi) {
    auto log_rho = [&](double u) {
        SignLog ed = expected_det_hermite(d.params().N - 1, d.shift_of(u));
        return d.log_prefactor(u) + ed.log_abs;
    };
    // peak from a coarse scan, then adaptive Simpson on the scaled integrand
    double peak = kNegInf;
    const int scan = 129;
    for (int i = 0; i < scan; ++i) {
        double u = lo + (hi - lo) * i / (scan - 1);
        peak = std::max(peak, log_rho(u));
    }
    double val = adaptive_simpson([&](double u) { return std::exp(log_rho(u) - peak); }, lo, hi,
                                  1e-12 * (hi - lo));
    return {std::exp(peak) * val, 0.0};
}

}  // namespace

MeanCrt mean_crt(double lo, double hi, const KacRiceDensity& density) {
    if (!(hi > lo)) throw std::invalid_argument("mean_crt: empty interval");
    bool hermite_ok = density.method() == KacRiceMethod::hermite_exact &&
                      density.hermite_licensed(lo) && density.hermite_licensed(hi) &&
                      !(lo < 0.0 && hi > 0.0);
    if (hermite_ok) return integrate_rho_hermite(density, lo, hi);
    return integrate_rho_mc(density, lo, hi);
}

MeanCrt mean_crt_all(const KacRiceDensity& density) {
    const GoeSpectrumCache& cache = density.cache();
    double N = density.params().N;

    // locate the peak and the 1e-18 truncation points on a coarse grid
    const int scan = 1201;
    double wide = 6.0 * N;
    double peak = kNegInf;
    std::vector<double> logs(scan);
    for (int i = 0; i < scan; ++i) {
        double u = -wide + 2.0 * wide * i / (scan - 1);
        logs[i] = density.log_prefactor(u) + cache.abs_det(density.shift_of(u)).log_mean;
        peak = std::max(peak, logs[i]);
    }
    int ilo = 0, ihi = scan - 1;
    while (ilo < scan - 1 && logs[ilo] < peak - kTailDrop) ++ilo;
    while (ihi > 0 && logs[ihi] < peak - kTailDrop) --ihi;
    if (ilo > 0) --ilo;
    if (ihi < scan - 1) ++ihi;
    double lo = -wide + 2.0 * wide * ilo / (scan - 1);
    double hi = -wide + 2.0 * wide * ihi / (scan - 1);
    return integrate_rho_mc(density, lo, hi);
}

IntensityValue intensity_nu(double x, const KacRiceDensity& density) {
    const TheoryConstants& c = density.constants();
    if (std::fabs(x) > std::sqrt(static_cast<double>(density.params().N))) {
        throw std::invalid_argument("intensity_nu: |x| must stay within sqrt(N)");
    }
    RhoValue r = rho_n(x + c.m_N, density);
    IntensityValue out;
    out.value = std::exp(r.log_value) / (1.0 + c.iota_p);
    out.rel_se = r.rel_se;
    out.ratio_to_limit = out.value / std::exp(c.c_p * x);
    return out;
}

double intensity_nu_asymptotic(double x, const TheoryConstants& c) {
    double u = x + c.m_N;
    double N = c.N;
    double log_rho = -std::log(2.0 * std::sqrt(kPi)) + std::log(h_tilde(-0.5 * c.gamma_p * c.E_0)) +
                     c.c_p * ((u + c.E_0 * N) - 0.5 * c.E_0) - 0.5 * std::log(N);
    return std::exp(log_rho) / (1.0 + c.iota_p);
}

}  // namespace pspin
