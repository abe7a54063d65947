#include "pspin/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/numeric.hpp"
#include "pspin/parallel.hpp"

namespace pspin {

PerturbationPair PerturbationPair::make(const ModelParams& params, std::uint64_t base_seed,
                                        std::uint64_t perturb_seed) {
    if (base_seed == perturb_seed) {
        throw std::invalid_argument("PerturbationPair: base and perturb seeds must differ");
    }
    PerturbationPair pair;
    pair.base = sample_disorder(params, base_seed);
    pair.perturb = sample_disorder(params, perturb_seed);
    pair.s_N = std::sqrt((params.N + 1.0) / params.N);
    return pair;
}

PointProcessSample build_xi(const CriticalSet& cs, double L, const TheoryConstants& constants) {
    PointProcessSample xi;
    xi.params = cs.params;
    xi.window_L = L;
    xi.parity_weight = 1.0 / (1.0 + constants.iota_p);
    const bool even_p = cs.params.p % 2 == 0;
    const double lo = constants.m_N - L, hi = constants.m_N + L;
    for (const CriticalPoint& cp : cs.points) {
        if (cp.value < lo || cp.value > hi) continue;
        if (even_p && cp.location.coords[cs.params.N - 1] <= 0.0) continue;
        xi.centered_values.push_back(cp.value - constants.m_N);
    }
    std::sort(xi.centered_values.begin(), xi.centered_values.end());
    return xi;
}

std::vector<ScalingCheckRow> scaling_law_check(const ModelParams& params, int probes, int draws,
                                               std::uint64_t seed) {
    params.validate();
    if (probes < 2 || draws < 100) {
        throw std::invalid_argument("scaling_law_check: need probes >= 2, draws >= 100");
    }
    const int N = params.N;

    // probe set: uniform points, plus an exactly orthogonal pair built from the first two
    Rng prng(seed, StreamKind::probe, 0);
    std::vector<SpherePoint> pts;
    for (int k = 0; k < probes; ++k) pts.push_back(SpherePoint::uniform(N, prng));
    Eigen::VectorXd v = pts[1].coords - (pts[0].coords.dot(pts[1].coords) / N) * pts[0].coords;
    pts[1] = SpherePoint::project(std::move(v));

    std::vector<std::vector<double>> vals(pts.size(), std::vector<double>(draws));
    for (int d = 0; d < draws; ++d) {
        std::uint64_t bs = mix_stream_id(seed, StreamKind::instance, 2 * d);
        std::uint64_t ps = mix_stream_id(seed, StreamKind::instance, 2 * d + 1);
        PerturbationPair pair = PerturbationPair::make(params, bs, ps);
        PerturbedEvaluator field(pair.base, pair.perturb);
        for (std::size_t k = 0; k < pts.size(); ++k) vals[k][d] = field.value(pts[k].coords);
    }

    auto cov_row = [&](const std::string& name, std::size_t a, std::size_t b) {
        double R = overlap(pts[a], pts[b]);
        double target = (N + 1.0) * std::pow(R, params.p);
        double ma = 0.0, mb = 0.0;
        for (int d = 0; d < draws; ++d) {
            ma += vals[a][d];
            mb += vals[b][d];
        }
        ma /= draws;
        mb /= draws;
        RunningStats prod;
        for (int d = 0; d < draws; ++d) prod.add((vals[a][d] - ma) * (vals[b][d] - mb));
        double est = prod.mean() * draws / (draws - 1.0);
        double se = prod.se();
        return ScalingCheckRow{name, R, target, est, se, se > 0 ? (est - target) / se : 0.0};
    };

    std::vector<ScalingCheckRow> rows;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        rows.push_back(cov_row("var(H+) probe " + std::to_string(k), k, k));
    }
    rows.push_back(cov_row("cov(H+) orthogonal pair", 0, 1));
    for (std::size_t k = 2; k < pts.size(); ++k) {
        rows.push_back(cov_row("cov(H+) pair (0," + std::to_string(k) + ")", 0, k));
    }
    return rows;
}

namespace {

CriticalPoint classify_point_plus(const PerturbationPair& pair, const SpherePoint& sigma) {
    PerturbedEvaluator field(pair.base, pair.perturb);
    const int N = field.N();
    CriticalPoint cp;
    cp.location = sigma;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    double val = field.value_grad_hess(sigma.coords, g, h);
    cp.value = val;
    LocalFrame frame = LocalFrame::householder(sigma);
    const Eigen::MatrixXd& B = frame.tangent_basis;
    Eigen::VectorXd gr = B.transpose() * g;
    Eigen::MatrixXd hr = B.transpose() * h * B;
    hr -= (field.p() * val / N) * Eigen::MatrixXd::Identity(N - 1, N - 1);
    cp.grad_residual = gr.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr, Eigen::EigenvaluesOnly);
    cp.hessian_spectrum = es.eigenvalues();
    cp.morse_index = 0;
    for (int i = 0; i < N - 1; ++i) {
        if (cp.hessian_spectrum[i] < -1e-8) ++cp.morse_index;
        if (std::fabs(cp.hessian_spectrum[i]) <= 1e-8) cp.degenerate = true;
    }
    return cp;
}

}  // namespace

MatchReport match_critical_points(const PerturbationPair& pair, const CriticalSet& cs_window,
                                  double alpha, const TheoryConstants& constants,
                                  const NewtonOptions& opt) {
    if (!(alpha > 1.0 / 3.0 && alpha < 0.5)) {
        throw std::invalid_argument("match_critical_points: alpha must lie in (1/3, 1/2)");
    }
    const ModelParams& params = cs_window.params;
    const int N = params.N;
    const bool even_p = params.p % 2 == 0;
    const double accept = 1.0 - std::pow(static_cast<double>(N), -2.0 * alpha);
    const double g1_delta = 0.5 * params.p * (constants.E_0 - constants.E_inf);
    const double g1_lo = params.p * constants.E_0 -
                         (2.0 * std::sqrt(params.p * (params.p - 1.0)) + g1_delta);
    const double g1_hi = params.p * constants.E_0 +
                         2.0 * std::sqrt(params.p * (params.p - 1.0)) + g1_delta;

    PerturbedEvaluator plus(pair.base, pair.perturb);
    FieldEvaluator prime(pair.perturb);

    MatchReport report;
    for (const CriticalPoint& cp : cs_window.points) {
        if (even_p && cp.location.coords[N - 1] <= 0.0) continue;
        ++report.attempted;

        NewtonResult res = newton_critical_point(plus, cp.location, opt);
        if (!res.converged) {
            ++report.unmatched;
            continue;
        }
        double ov = overlap(cp.location, res.point);
        if (ov < accept) {
            ++report.unmatched;
            continue;
        }

        MatchedPair m;
        m.original = cp;
        m.matched = classify_point_plus(pair, res.point);
        m.overlap_val = ov;
        double h_prime = prime.value(cp.location.coords);
        m.predicted_shift = h_prime / std::sqrt(static_cast<double>(N)) - constants.C_0;
        m.actual_shift = m.matched.value - cp.value;
        m.residual = m.actual_shift - m.predicted_shift;

        // quadratic/linear model diagnostics at the base critical point
        LocalFrame frame = LocalFrame::householder(cp.location);
        Eigen::VectorXd gr;
        Eigen::MatrixXd hr;
        riemannian_grad_hess(pair.base, cp.location, frame, gr, hr);
        Eigen::VectorXd gp;
        prime.value_grad(cp.location.coords, gp);
        Eigen::VectorXd vp = frame.tangent_basis.transpose() * gp;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
        if (es.info() == Eigen::Success) {
            Eigen::VectorXd c = es.eigenvectors().transpose() * vp;
            double quad = 0.0, trace = 0.0;
            bool in_window = true;
            for (int i = 0; i < N - 1; ++i) {
                double lam = es.eigenvalues()[i];
                quad += c[i] * c[i] / lam;
                trace += 1.0 / lam;
                if (lam < g1_lo || lam > g1_hi) in_window = false;
            }
            m.delta_model = -quad / (2.0 * N);
            m.trace_proxy = params.p * trace / (2.0 * N);
            m.hessian_in_window = in_window;
        }
        report.matches.push_back(std::move(m));
    }
    return report;
}

ShiftReport shift_distribution_test(const std::vector<std::vector<MatchedPair>>& per_instance,
                                    const TheoryConstants& constants) {
    ShiftReport rep;
    std::vector<double> shifts, preds, abs_residuals;
    RunningStats trace_stats;
    long in_window = 0, with_diag = 0;
    for (const auto& inst : per_instance) {
        for (const MatchedPair& m : inst) {
            shifts.push_back(m.actual_shift);
            preds.push_back(m.predicted_shift);
            abs_residuals.push_back(std::fabs(m.residual));
            trace_stats.add(m.trace_proxy);
            ++with_diag;
            if (m.hessian_in_window) ++in_window;
        }
    }
    long n = static_cast<long>(shifts.size());
    rep.n_matches = n;
    if (n < 3) return rep;

    RunningStats s;
    for (double x : shifts) s.add(x);
    rep.mean_shift = s.mean();
    rep.se_mean = s.se();
    rep.z_mean = (rep.mean_shift + constants.C_0) / rep.se_mean;
    rep.var_shift = s.variance();
    rep.se_var = rep.var_shift * std::sqrt(2.0 / (n - 1.0));
    rep.z_var = (rep.var_shift - 1.0) / rep.se_var;

    std::vector<double> sorted = shifts;
    std::sort(sorted.begin(), sorted.end());
    auto cdf = [&](double x) { return standard_normal_cdf(x + constants.C_0); };
    rep.ks_distance = ks_distance_sorted(sorted, cdf);
    rep.ks_pvalue = ks_asymptotic_pvalue(rep.ks_distance, sorted.size());

    double mp = 0.0, ma = 0.0;
    for (long i = 0; i < n; ++i) {
        mp += preds[i];
        ma += shifts[i];
    }
    mp /= n;
    ma /= n;
    double sxx = 0.0, sxy = 0.0;
    for (long i = 0; i < n; ++i) {
        sxx += (preds[i] - mp) * (preds[i] - mp);
        sxy += (preds[i] - mp) * (shifts[i] - ma);
    }
    rep.slope = sxy / sxx;
    double sse = 0.0;
    for (long i = 0; i < n; ++i) {
        double fit = ma + rep.slope * (preds[i] - mp);
        sse += (shifts[i] - fit) * (shifts[i] - fit);
    }
    rep.se_slope = std::sqrt(sse / (n - 2.0) / sxx);

    // within-instance pair products, clustered by instance
    double mu = rep.mean_shift, var = rep.var_shift;
    RunningStats cluster;
    for (const auto& inst : per_instance) {
        if (inst.size() < 2) continue;
        double acc = 0.0;
        long cnt = 0;
        for (std::size_t i = 0; i < inst.size(); ++i) {
            for (std::size_t j = i + 1; j < inst.size(); ++j) {
                acc += (inst[i].actual_shift - mu) * (inst[j].actual_shift - mu);
                ++cnt;
            }
        }
        cluster.add(acc / cnt / var);
    }
    rep.cross_corr = cluster.count() > 0 ? cluster.mean() : 0.0;
    rep.se_cross_corr = cluster.count() > 1 ? cluster.se() : 0.0;

    std::sort(abs_residuals.begin(), abs_residuals.end());
    rep.median_abs_residual = abs_residuals[abs_residuals.size() / 2];
    rep.mean_trace_proxy = trace_stats.mean();
    rep.se_trace_proxy = trace_stats.se();
    rep.frac_hessian_in_window = with_diag > 0 ? static_cast<double>(in_window) / with_diag : 0.0;
    return rep;
}

PoissonReport poisson_tests(const std::vector<PointProcessSample>& samples,
                            const TheoryConstants& constants) {
    if (samples.empty()) throw std::invalid_argument("poisson_tests: no samples");
    const double L = samples.front().window_L;
    const int nbins = std::max(1, static_cast<int>(std::lround(2.0 * L)));
    const double width = 2.0 * L / nbins;
    const long S = static_cast<long>(samples.size());

    std::vector<std::vector<double>> counts(nbins, std::vector<double>(S, 0.0));
    std::vector<double> window_counts(S, 0.0);
    for (long s = 0; s < S; ++s) {
        for (double x : samples[s].centered_values) {
            int b = std::min(nbins - 1, static_cast<int>((x + L) / width));
            counts[b][s] += 1.0;
            window_counts[s] += 1.0;
        }
    }

    PoissonReport rep;
    rep.samples = S;
    for (int b = 0; b < nbins; ++b) {
        PoissonBinRow row;
        row.lo = -L + b * width;
        row.hi = row.lo + width;
        row.limit_mean = (std::exp(constants.c_p * row.hi) - std::exp(constants.c_p * row.lo)) /
                         constants.c_p;
        RunningStats s;
        for (long i = 0; i < S; ++i) s.add(counts[b][i]);
        row.mean = s.mean();
        row.se = s.se();
        if (row.mean > 0) {
            row.dispersion = s.variance() / row.mean;
            // jackknife over samples
            RunningStats jk;
            double sum = row.mean * S, sumsq = 0.0;
            for (long i = 0; i < S; ++i) sumsq += counts[b][i] * counts[b][i];
            for (long i = 0; i < S; ++i) {
                double m_i = (sum - counts[b][i]) / (S - 1.0);
                double v_i = (sumsq - counts[b][i] * counts[b][i] - (S - 1.0) * m_i * m_i) / (S - 2.0);
                jk.add(m_i > 0 ? v_i / m_i : 0.0);
            }
            row.dispersion_se = std::sqrt(std::max(0.0, jk.variance() * (S - 1.0) * (S - 1.0) / S));
        }
        rep.bins.push_back(row);
    }

    // second-moment ratio over the whole window, jackknife SE
    double sum_n = 0.0, sum_pair = 0.0;
    std::vector<double> pair_vals(S);
    for (long i = 0; i < S; ++i) {
        double nn = window_counts[i];
        pair_vals[i] = nn * (nn - 1.0);
        sum_n += nn;
        sum_pair += pair_vals[i];
    }
    double mean_n = sum_n / S, mean_pair = sum_pair / S;
    rep.second_moment_ratio = mean_pair / (mean_n * mean_n);
    RunningStats jk_ratio;
    for (long i = 0; i < S; ++i) {
        double m_i = (sum_n - window_counts[i]) / (S - 1.0);
        double p_i = (sum_pair - pair_vals[i]) / (S - 1.0);
        jk_ratio.add(p_i / (m_i * m_i));
    }
    rep.second_moment_ratio_se =
        std::sqrt(std::max(0.0, jk_ratio.variance() * (S - 1.0) * (S - 1.0) / S));

    // inter-bin correlations
    double max_corr = 0.0;
    for (int a = 0; a < nbins; ++a) {
        for (int b = a + 1; b < nbins; ++b) {
            RunningStats sa, sb;
            for (long i = 0; i < S; ++i) {
                sa.add(counts[a][i]);
                sb.add(counts[b][i]);
            }
            if (sa.variance() <= 0 || sb.variance() <= 0) continue;
            double cov = 0.0;
            for (long i = 0; i < S; ++i) cov += (counts[a][i] - sa.mean()) * (counts[b][i] - sb.mean());
            cov /= (S - 1.0);
            double corr = cov / std::sqrt(sa.variance() * sb.variance());
            max_corr = std::max(max_corr, std::fabs(corr));
        }
    }
    rep.max_abs_bin_corr = max_corr;
    rep.max_abs_bin_corr_se = 1.0 / std::sqrt(static_cast<double>(S));
    return rep;
}

GumbelReport gumbel_test(const std::vector<PointProcessSample>& samples,
                         const TheoryConstants& constants, double margin) {
    GumbelReport rep;
    std::vector<double> minima;
    for (const PointProcessSample& s : samples) {
        if (s.centered_values.empty()) {
            ++rep.excluded;
            continue;
        }
        double m = s.centered_values.front();
        if (m < -s.window_L + margin) {
            ++rep.excluded;
            continue;
        }
        minima.push_back(m);
    }
    rep.used = static_cast<long>(minima.size());
    if (minima.empty()) return rep;
    std::sort(minima.begin(), minima.end());

    double c = constants.c_p;
    auto cdf = [c](double x) { return gumbel_min_cdf(x, c); };
    rep.ks_distance = ks_distance_sorted(minima, cdf);
    rep.ks_pvalue = ks_asymptotic_pvalue(rep.ks_distance, minima.size());
    rep.median = minima[minima.size() / 2];
    rep.median_target = gumbel_min_median(c);
    // SE of the sample median via the density of the limit law at its median
    double f_med = std::exp(c * rep.median_target) * std::exp(-std::exp(c * rep.median_target) / c);
    rep.median_se = 1.0 / (2.0 * f_med * std::sqrt(static_cast<double>(minima.size())));

    rep.qq_sample = minima;
    rep.qq_theoretical.resize(minima.size());
    for (std::size_t i = 0; i < minima.size(); ++i) {
        double q = (i + 0.5) / minima.size();
        rep.qq_theoretical[i] = std::log(-c * std::log(1.0 - q)) / c;
    }
    return rep;
}

ExtremalRun run_extremal(const ExtremalConfig& config) {
    config.params.validate();
    ExtremalRun run;
    run.constants = solve_constants(config.params.p, config.params.N);
    run.xis.resize(config.samples);
    parallel_for(static_cast<std::size_t>(config.samples), config.threads, [&](std::size_t i) {
        std::uint64_t dseed = mix_stream_id(config.seed, StreamKind::instance, i);
        DisorderTensor J = sample_disorder(config.params, dseed);
        CriticalSet cs = find_window(J, run.constants, config.L, config.search,
                                     mix_stream_id(config.seed, StreamKind::newton_start, i), 1);
        run.xis[i] = build_xi(cs, config.L, run.constants);
    });
    return run;
}

PerturbRun run_perturb(const PerturbConfig& config) {
    config.params.validate();
    PerturbRun run;
    run.constants = solve_constants(config.params.p, config.params.N);
    run.per_instance.resize(config.instances);
    std::vector<long> attempted(config.instances, 0), unmatched(config.instances, 0);
    parallel_for(static_cast<std::size_t>(config.instances), config.threads, [&](std::size_t i) {
        std::uint64_t bseed = mix_stream_id(config.seed, StreamKind::instance, 2 * i);
        std::uint64_t pseed = mix_stream_id(config.seed, StreamKind::instance, 2 * i + 1);
        PerturbationPair pair = PerturbationPair::make(config.params, bseed, pseed);
        CriticalSet cs = find_window(pair.base, run.constants, config.L, config.search,
                                     mix_stream_id(config.seed, StreamKind::newton_start, i), 1);
        CriticalSet window = window_select(cs, config.L, run.constants);
        MatchReport rep = match_critical_points(pair, window, config.alpha, run.constants,
                                                config.search.newton);
        run.per_instance[i] = std::move(rep.matches);
        attempted[i] = rep.attempted;
        unmatched[i] = rep.unmatched;
    });
    for (int i = 0; i < config.instances; ++i) {
        run.attempted += attempted[i];
        run.unmatched += unmatched[i];
    }
    return run;
}

}  // namespace pspin
