#include "pspin/critical_points.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/kac_rice.hpp"
#include "pspin/parallel.hpp"

namespace pspin {

namespace {
constexpr double kDedupOverlap = 1.0 - 1e-8;
constexpr double kDegenerateEig = 1e-8;
}  // namespace

CriticalPoint classify_point(const DisorderTensor& J, const SpherePoint& sigma) {
    CriticalPoint cp;
    cp.location = sigma;
    LocalFrame frame = LocalFrame::householder(sigma);
    Eigen::VectorXd gr;
    Eigen::MatrixXd hr;
    riemannian_grad_hess(J, sigma, frame, gr, hr);
    cp.value = evaluate(J, sigma);
    cp.grad_residual = gr.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr, Eigen::EigenvaluesOnly);
    cp.hessian_spectrum = es.eigenvalues();
    cp.morse_index = 0;
    cp.degenerate = false;
    for (int i = 0; i < cp.hessian_spectrum.size(); ++i) {
        double lam = cp.hessian_spectrum[i];
        if (lam < -kDegenerateEig) ++cp.morse_index;
        if (std::fabs(lam) <= kDegenerateEig) cp.degenerate = true;
    }
    return cp;
}

namespace {

// true if sigma duplicates (or is the antipode of) an existing entry
bool is_known(const std::vector<CriticalPoint>& pts, const SpherePoint& sigma) {
    for (const CriticalPoint& q : pts) {
        if (std::fabs(overlap(q.location, sigma)) > kDedupOverlap) return true;
    }
    return false;
}

void add_with_antipode(std::vector<CriticalPoint>& pts, const DisorderTensor& J,
                       const SpherePoint& sigma) {
    pts.push_back(classify_point(J, sigma));
    pts.push_back(classify_point(J, SpherePoint{-sigma.coords}));
}

void sort_by_value(std::vector<CriticalPoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return a.value < b.value;
    });
}

}  // namespace

CriticalSet find_all(const DisorderTensor& J, long restarts, std::uint64_t seed,
                     const NewtonOptions& opt, unsigned threads) {
    if (restarts < 1) throw std::invalid_argument("find_all: restarts must be >= 1");
    const int N = J.params.N;

    std::vector<std::optional<SpherePoint>> slots(restarts);
    parallel_for(static_cast<std::size_t>(restarts), threads, [&](std::size_t r) {
        FieldEvaluator field(J);
        Rng rng(seed, StreamKind::newton_start, r);
        SpherePoint start = SpherePoint::uniform(N, rng);
        NewtonResult res = newton_critical_point(field, start, opt);
        if (res.converged) slots[r] = res.point;
    });

    CriticalSet cs;
    cs.params = J.params;
    cs.disorder_seed = J.seed;
    cs.restarts_used = restarts;
    long converged = 0;
    for (long r = 0; r < restarts; ++r) {
        if (!slots[r]) continue;
        ++converged;
        if (!is_known(cs.points, *slots[r])) add_with_antipode(cs.points, J, *slots[r]);
    }
    if (converged == 0) {
        throw numerical_error("find_all: no Newton run converged; check (p, N) or restarts");
    }
    sort_by_value(cs.points);
    return cs;
}

CriticalSet find_window(const DisorderTensor& J, const TheoryConstants& constants, double L,
                        const WindowSearchOptions& opt, std::uint64_t seed, unsigned threads) {
    const int N = J.params.N;
    const double sqN = std::sqrt(static_cast<double>(N));
    const double lo = constants.m_N - L - opt.value_slack;
    const double hi = constants.m_N + L + opt.value_slack;

    // phase A: descent to minima from uniform starts
    std::vector<std::optional<SpherePoint>> slots(opt.min_starts);
    parallel_for(static_cast<std::size_t>(opt.min_starts), threads, [&](std::size_t r) {
        FieldEvaluator field(J);
        Rng rng(seed, StreamKind::newton_start, r);
        SpherePoint start = SpherePoint::uniform(N, rng);
        NewtonResult res = newton_minimize(field, start, opt.newton);
        if (res.converged) slots[r] = res.point;
    });

    CriticalSet cs;
    cs.params = J.params;
    cs.disorder_seed = J.seed;
    cs.restarts_used = opt.min_starts;
    for (long r = 0; r < opt.min_starts; ++r) {
        if (!slots[r]) continue;
        if (!is_known(cs.points, *slots[r])) add_with_antipode(cs.points, J, *slots[r]);
    }

    // phase B: tangent-kick waves around everything currently near the window
    std::uint64_t kick_counter = 0;
    for (int round = 0; round < opt.kick_rounds; ++round) {
        std::vector<SpherePoint> seeds;
        for (const CriticalPoint& cp : cs.points) {
            if (cp.value >= lo && cp.value <= hi) seeds.push_back(cp.location);
        }
        if (seeds.empty()) break;
        std::vector<std::pair<std::uint64_t, SpherePoint>> tasks;
        for (const SpherePoint& s : seeds) {
            for (int k = 0; k < opt.kicks_per_point; ++k) tasks.emplace_back(kick_counter++, s);
        }
        std::vector<std::optional<SpherePoint>> found(tasks.size());
        parallel_for(tasks.size(), threads, [&](std::size_t t) {
            FieldEvaluator field(J);
            Rng rng(seed, StreamKind::kick, tasks[t].first);
            const SpherePoint& base = tasks[t].second;
            Eigen::VectorXd kick(N);
            for (int i = 0; i < N; ++i) kick[i] = rng.normal();
            kick -= (base.coords.dot(kick) / N) * base.coords;
            kick *= opt.kick_norm_unit * sqN / kick.norm();
            SpherePoint start = SpherePoint::project(base.coords + kick);
            NewtonResult res = newton_critical_point(field, start, opt.newton);
            if (res.converged) found[t] = res.point;
        });
        bool grew = false;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (!found[t]) continue;
            if (!is_known(cs.points, *found[t])) {
                add_with_antipode(cs.points, J, *found[t]);
                grew = true;
            }
        }
        cs.restarts_used += static_cast<long>(tasks.size());
        if (!grew) break;
    }
    sort_by_value(cs.points);
    return cs;
}

CriticalSet window_select(const CriticalSet& cs, double L, const TheoryConstants& constants) {
    CriticalSet out;
    out.params = cs.params;
    out.disorder_seed = cs.disorder_seed;
    out.restarts_used = cs.restarts_used;
    out.window = std::make_pair(constants.m_N - L, constants.m_N + L);
    for (const CriticalPoint& cp : cs.points) {
        if (cp.value >= out.window->first && cp.value <= out.window->second) {
            out.points.push_back(cp);
        }
    }
    return out;
}

long pair_counts(const CriticalSet& cs, double b_lo, double b_hi, double r_lo, double r_hi) {
    const double N = cs.params.N;
    std::vector<const CriticalPoint*> in_band;
    for (const CriticalPoint& cp : cs.points) {
        double y = cp.value / N;
        if (y > b_lo && y < b_hi) in_band.push_back(&cp);
    }
    long count = 0;
    for (std::size_t i = 0; i < in_band.size(); ++i) {
        for (std::size_t j = 0; j < in_band.size(); ++j) {
            if (i == j) continue;
            double r = overlap(in_band[i]->location, in_band[j]->location);
            if (r > r_lo && r < r_hi) ++count;
        }
    }
    return count;
}

long count_in_band(const CriticalSet& cs, double b_lo, double b_hi) {
    const double N = cs.params.N;
    long count = 0;
    for (const CriticalPoint& cp : cs.points) {
        double y = cp.value / N;
        if (y > b_lo && y < b_hi) ++count;
    }
    return count;
}

std::optional<double> separation_stats(const CriticalSet& cs) {
    std::optional<double> best;
    for (std::size_t i = 0; i < cs.points.size(); ++i) {
        for (std::size_t j = i + 1; j < cs.points.size(); ++j) {
            double r = overlap(cs.points[i].location, cs.points[j].location);
            if (std::fabs(r) > kDedupOverlap) continue;  // same point or antipode
            double a = std::fabs(r);
            if (!best || a > *best) best = a;
        }
    }
    return best;
}

CompletenessReport completeness_check(const ModelParams& params, double L, int instances,
                                      long restarts, std::uint64_t seed, long mc_samples,
                                      unsigned threads) {
    params.validate();
    if (params.N > 8) {
        throw std::invalid_argument(
            "completeness_check: full-sphere counts are guarded to N <= 8");
    }
    TheoryConstants constants = solve_constants(params.p, params.N);

    CompletenessReport rep;
    rep.params = params;
    rep.instances = instances;
    rep.restarts = restarts;
    rep.all_counts_even = true;
    rep.eq59_exact_all = true;

    RunningStats total, window;
    for (int inst = 0; inst < instances; ++inst) {
        std::uint64_t dseed = mix_stream_id(seed, StreamKind::instance, inst);
        DisorderTensor J = sample_disorder(params, dseed);
        CriticalSet cs = find_all(J, restarts, dseed ^ 0x9e3779b97f4a7c15ull, {}, threads);
        long n_total = static_cast<long>(cs.points.size());
        if (n_total % 2 != 0) rep.all_counts_even = false;

        // Eq. 59 with B = (-inf, 0): pair count over distinct points, R in (-1, 1)
        long crt_b = count_in_band(cs, -1e300, 0.0);
        long pairs = pair_counts(cs, -1e300, 0.0, -1.0, 1.0);
        long iota = params.p % 2 == 0 ? 1 : 0;
        if (pairs != crt_b * crt_b - (1 + iota) * crt_b) rep.eq59_exact_all = false;

        total.add(static_cast<double>(n_total));
        window.add(static_cast<double>(
            window_select(cs, L, constants).points.size()));
    }
    rep.enum_mean_total = total.mean();
    rep.enum_se_total = total.se();
    rep.enum_mean_window = window.mean();
    rep.enum_se_window = window.se();

    KacRiceDensity density{params, constants, KacRiceMethod::goe_monte_carlo, mc_samples,
                           mix_stream_id(seed, StreamKind::det_mc, 0)};
    MeanCrt all = mean_crt_all(density);
    rep.kr_total = all.value;
    rep.kr_total_se = all.se;
    MeanCrt win = mean_crt(constants.m_N - L, constants.m_N + L, density);
    rep.kr_window = win.value;
    rep.kr_window_se = win.se;

    rep.z_total = (rep.enum_mean_total - rep.kr_total) /
                  std::sqrt(rep.enum_se_total * rep.enum_se_total + rep.kr_total_se * rep.kr_total_se);
    rep.z_window = (rep.enum_mean_window - rep.kr_window) /
                   std::sqrt(rep.enum_se_window * rep.enum_se_window +
                             rep.kr_window_se * rep.kr_window_se);
    return rep;
}

}  // namespace pspin
