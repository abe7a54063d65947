// Command-line driver: closed-form constants, Kac-Rice densities, GOE determinant
// tables, critical-point enumeration, and the extremal/perturbation experiments.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pspin/critical_points.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/kac_rice.hpp"
#include "pspin/parallel.hpp"
#include "pspin/perturbation.hpp"
#include "pspin/random_matrix.hpp"
#include "pspin/report.hpp"
#include "pspin/theory.hpp"

namespace {

using pspin::ordered_json;

constexpr const char* kVersion = "1.0.0";

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

ordered_json make_meta(const std::string& command, const ordered_json& config,
                       std::uint64_t seed, double wall_ms) {
    ordered_json meta;
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["config"] = config;
    meta["seed"] = seed;
    meta["wall_ms"] = wall_ms;
    return meta;
}

ordered_json constants_json(const pspin::TheoryConstants& c) {
    ordered_json j;
    j["p"] = c.p;
    j["N"] = c.N;
    j["gamma_p"] = c.gamma_p;
    j["iota_p"] = c.iota_p;
    j["E_inf"] = c.E_inf;
    j["E_0"] = c.E_0;
    j["c_p"] = c.c_p;
    j["C_0"] = c.C_0;
    j["K_0"] = c.K_0;
    j["m_N"] = c.m_N;
    return j;
}

ordered_json rmt_table(const std::vector<int>& dims, const std::vector<double>& shifts,
                       long samples, std::uint64_t seed) {
    ordered_json rows = ordered_json::array();
    std::uint64_t stream = 0;
    for (int n : dims) {
        for (double v : shifts) {
            pspin::SignLog herm = pspin::expected_det_hermite(n, v);
            pspin::McEstimate mc = pspin::expected_abs_det_mc(
                n, v, samples, pspin::mix_stream_id(seed, pspin::StreamKind::det_mc, stream++));
            ordered_json row;
            row["n"] = n;
            row["v"] = v;
            row["e_det_hermite"] = herm.value();
            row["log_abs_e_det_hermite"] = herm.log_abs;
            row["e_absdet_mc"] = mc.mean();
            row["mc_se"] = mc.se();
            row["ratio"] = mc.mean() / std::fabs(herm.value());
            rows.push_back(row);
        }
    }
    return rows;
}

ordered_json kacrice_grid(const pspin::ModelParams& params, const pspin::TheoryConstants& c,
                          double lo, double hi, int grid, long samples, std::uint64_t seed,
                          const std::string& method) {
    ordered_json rows = ordered_json::array();
    std::vector<std::pair<std::string, pspin::KacRiceMethod>> methods;
    if (method == "hermite" || method == "both") {
        methods.emplace_back("hermite", pspin::KacRiceMethod::hermite_exact);
    }
    if (method == "mc" || method == "both") {
        methods.emplace_back("mc", pspin::KacRiceMethod::goe_monte_carlo);
    }
    std::uint64_t stream = 1;
    for (const auto& [name, m] : methods) {
        pspin::KacRiceDensity density(params, c, m, samples,
                                      pspin::mix_stream_id(seed, pspin::StreamKind::det_mc,
                                                           stream++));
        for (int k = 0; k < grid; ++k) {
            double x = grid == 1 ? lo : lo + (hi - lo) * k / (grid - 1);
            pspin::RhoValue r = pspin::rho_n(x + c.m_N, density);
            double nu = std::exp(r.log_value) / (1.0 + c.iota_p);
            ordered_json row;
            row["method"] = name;
            row["x"] = x;
            row["u"] = x + c.m_N;
            row["log_rho"] = r.log_value;
            row["nu"] = nu;
            row["nu_over_limit"] = nu / std::exp(c.c_p * x);
            row["se"] = r.rel_se * nu;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string csv_escape_free(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int run_app(int argc, char** argv) {
    CLI::App app{"spherical pure p-spin landscape laboratory"};
    app.require_subcommand(1);

    int p = 3, N = 20, grid = 9, threads = 1, samples = 200, kick_rounds = 3, kicks_per_point = 6;
    long mc_samples = 20000, restarts = 2000, rmt_samples = 100000;
    std::uint64_t seed = 0, disorder_seed = 0;
    double L = 3.0, alpha = 0.45;
    std::vector<double> window{-3.0, 3.0};
    std::vector<int> dims{8};
    std::vector<double> shifts{2.5};
    std::string out_path, format = "json", method = "both", disorder_file;
    bool emit_locations = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "output file (default: stdout)");
        cmd->add_option("--format", format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* c_const = app.add_subcommand("constants", "closed-form constants for (p, N)");
    c_const->add_option("--p", p, "interaction degree")->required();
    c_const->add_option("--N", N, "dimension")->required();
    add_common(c_const);

    CLI::App* c_kac = app.add_subcommand("kacrice", "finite-N critical-value density");
    c_kac->add_option("--p", p)->required();
    c_kac->add_option("--N", N)->required();
    c_kac->add_option("--window", window, "centered window lo,hi")->delimiter(',')->expected(2);
    c_kac->add_option("--grid", grid, "grid points");
    c_kac->add_option("--samples", mc_samples, "Monte Carlo spectra");
    c_kac->add_option("--seed", seed)->required();
    c_kac->add_option("--method", method)->check(CLI::IsMember({"hermite", "mc", "both"}));
    add_common(c_kac);

    CLI::App* c_rmt = app.add_subcommand("rmt", "GOE expected-determinant table");
    c_rmt->add_option("--dim", dims, "matrix dimensions")->delimiter(',');
    c_rmt->add_option("--shift", shifts, "shifts v")->delimiter(',');
    c_rmt->add_option("--samples", rmt_samples);
    c_rmt->add_option("--seed", seed)->required();
    add_common(c_rmt);

    CLI::App* c_enum = app.add_subcommand("enumerate", "multistart critical-point enumeration");
    c_enum->add_option("--p", p)->required();
    c_enum->add_option("--N", N)->required();
    c_enum->add_option("--restarts", restarts);
    c_enum->add_option("--disorder-seed", disorder_seed)->required();
    c_enum->add_option("--L", L, "window half-width for the summary");
    c_enum->add_option("--disorder-file", disorder_file,
                       "read the disorder tensor from this file if it exists, else write it");
    c_enum->add_flag("--emit-locations", emit_locations);
    c_enum->add_option("--threads", threads);
    add_common(c_enum);

    CLI::App* c_ext = app.add_subcommand("extremal", "extremal point process statistics");
    c_ext->add_option("--p", p)->required();
    c_ext->add_option("--N", N)->required();
    c_ext->add_option("--samples", samples, "disorder instances");
    c_ext->add_option("--L", L);
    c_ext->add_option("--restarts", restarts, "descent starts per instance");
    c_ext->add_option("--kick-rounds", kick_rounds);
    c_ext->add_option("--kicks-per-point", kicks_per_point);
    c_ext->add_option("--seed", seed)->required();
    c_ext->add_option("--threads", threads);
    add_common(c_ext);

    CLI::App* c_pert = app.add_subcommand("perturb", "independent-increment perturbation experiment");
    c_pert->add_option("--p", p)->required();
    c_pert->add_option("--N", N)->required();
    c_pert->add_option("--samples", samples, "disorder instances");
    c_pert->add_option("--L", L);
    c_pert->add_option("--alpha", alpha);
    c_pert->add_option("--restarts", restarts, "descent starts per instance");
    c_pert->add_option("--kick-rounds", kick_rounds);
    c_pert->add_option("--kicks-per-point", kicks_per_point);
    c_pert->add_option("--seed", seed)->required();
    c_pert->add_option("--threads", threads);
    add_common(c_pert);

    CLI::App* c_rep = app.add_subcommand("report", "combined summary report");
    c_rep->add_option("--p", p)->required();
    c_rep->add_option("--N", N)->required();
    c_rep->add_option("--seed", seed)->required();
    add_common(c_rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage text
        return 2;
    }

    Timer timer;
    unsigned eff_threads = pspin::effective_threads(threads);

    if (c_const->parsed()) {
        pspin::TheoryConstants c = pspin::solve_constants(p, N);
        ordered_json config{{"p", p}, {"N", N}, {"format", format}};
        if (format == "csv") {
            std::ostringstream csv;
            csv << "key,value\n";
            ordered_json cj = constants_json(c);
            for (auto it = cj.begin(); it != cj.end(); ++it) {
                csv << it.key() << ",";
                if (it.value().is_number_float()) {
                    csv << csv_escape_free(it.value().get<double>());
                } else {
                    csv << it.value().dump();
                }
                csv << "\n";
            }
            pspin::write_text(out_path, csv.str());
            return 0;
        }
        ordered_json report;
        report["meta"] = make_meta("constants", config, 0, timer.ms());
        report["constants"] = constants_json(c);
        pspin::write_text(out_path, pspin::dump_json17(report));
        return 0;
    }

    if (c_kac->parsed()) {
        pspin::TheoryConstants c = pspin::solve_constants(p, N);
        ordered_json rows =
            kacrice_grid({p, N}, c, window[0], window[1], grid, mc_samples, seed, method);
        if (format == "csv") {
            std::ostringstream csv;
            csv << "method,x,u,log_rho,nu,nu_over_limit,se\n";
            for (const auto& row : rows) {
                csv << row["method"].get<std::string>();
                for (const char* k : {"x", "u", "log_rho", "nu", "nu_over_limit", "se"}) {
                    csv << "," << csv_escape_free(row[k].get<double>());
                }
                csv << "\n";
            }
            pspin::write_text(out_path, csv.str());
            return 0;
        }
        ordered_json config{{"p", p},        {"N", N},           {"window", window},
                            {"grid", grid},  {"samples", mc_samples}, {"method", method},
                            {"format", format}};
        ordered_json report;
        report["meta"] = make_meta("kacrice", config, seed, timer.ms());
        report["constants"] = constants_json(c);
        report["kacrice"] = rows;
        pspin::write_text(out_path, pspin::dump_json17(report));
        return 0;
    }

    if (c_rmt->parsed()) {
        ordered_json rows = rmt_table(dims, shifts, rmt_samples, seed);
        if (format == "csv") {
            std::ostringstream csv;
            csv << "n,v,e_det_hermite,e_absdet_mc,mc_se,ratio\n";
            for (const auto& row : rows) {
                csv << row["n"].get<int>();
                for (const char* k : {"v", "e_det_hermite", "e_absdet_mc", "mc_se", "ratio"}) {
                    csv << "," << csv_escape_free(row[k].get<double>());
                }
                csv << "\n";
            }
            pspin::write_text(out_path, csv.str());
            return 0;
        }
        ordered_json config{{"dim", dims}, {"shift", shifts}, {"samples", rmt_samples},
                            {"format", format}};
        ordered_json report;
        report["meta"] = make_meta("rmt", config, seed, timer.ms());
        report["rmt"] = rows;
        pspin::write_text(out_path, pspin::dump_json17(report));
        return 0;
    }

    if (c_enum->parsed()) {
        pspin::DisorderTensor J;
        if (!disorder_file.empty() && std::filesystem::exists(disorder_file)) {
            J = pspin::read_disorder_file(disorder_file);
            if (J.params.p != p || J.params.N != N) {
                throw std::invalid_argument("disorder file (p, N) does not match the flags");
            }
        } else {
            J = pspin::sample_disorder({p, N}, disorder_seed);
            if (!disorder_file.empty()) pspin::write_disorder_file(disorder_file, J);
        }
        pspin::TheoryConstants c = pspin::solve_constants(p, N);
        pspin::CriticalSet cs = pspin::find_all(J, restarts, disorder_seed ^ 0x5bf03635ull, {},
                                                eff_threads);
        ordered_json pts = ordered_json::array();
        for (const pspin::CriticalPoint& cp : cs.points) {
            ordered_json row;
            row["value"] = cp.value;
            row["grad_residual"] = cp.grad_residual;
            row["morse_index"] = cp.morse_index;
            row["min_eig"] = cp.hessian_spectrum[0];
            row["degenerate"] = cp.degenerate;
            if (emit_locations) {
                ordered_json loc = ordered_json::array();
                for (int i = 0; i < cp.location.dim(); ++i) loc.push_back(cp.location.coords[i]);
                row["location"] = loc;
            }
            pts.push_back(row);
        }
        long in_window = static_cast<long>(pspin::window_select(cs, L, c).points.size());
        if (format == "csv") {
            std::ostringstream csv;
            csv << "value,grad_residual,morse_index,min_eig\n";
            for (const pspin::CriticalPoint& cp : cs.points) {
                csv << csv_escape_free(cp.value) << "," << csv_escape_free(cp.grad_residual)
                    << "," << cp.morse_index << "," << csv_escape_free(cp.hessian_spectrum[0])
                    << "\n";
            }
            pspin::write_text(out_path, csv.str());
            return 0;
        }
        ordered_json config{{"p", p},
                            {"N", N},
                            {"restarts", restarts},
                            {"disorder_seed", disorder_seed},
                            {"L", L},
                            {"disorder_file", disorder_file},
                            {"emit_locations", emit_locations},
                            {"threads", threads},
                            {"format", format}};
        ordered_json report;
        report["meta"] = make_meta("enumerate", config, disorder_seed, timer.ms());
        report["constants"] = constants_json(c);
        report["count"] = static_cast<long>(cs.points.size());
        report["count_in_window"] = in_window;
        report["grad_residual_threshold"] = 1e-10 * std::sqrt(static_cast<double>(N));
        report["critical_points"] = pts;
        pspin::write_text(out_path, pspin::dump_json17(report));
        return 0;
    }

    if (c_ext->parsed() || c_pert->parsed()) {
        pspin::WindowSearchOptions search;
        search.min_starts = restarts;
        search.kick_rounds = kick_rounds;
        search.kicks_per_point = kicks_per_point;

        if (c_ext->parsed()) {
            pspin::ExtremalConfig config{{p, N}, samples, L, search, seed, eff_threads};
            pspin::ExtremalRun run = pspin::run_extremal(config);
            pspin::PoissonReport poisson = pspin::poisson_tests(run.xis, run.constants);
            pspin::GumbelReport gumbel = pspin::gumbel_test(run.xis, run.constants);

            if (format == "csv") {
                std::ostringstream csv;
                csv << "instance,atom\n";
                for (std::size_t i = 0; i < run.xis.size(); ++i) {
                    for (double a : run.xis[i].centered_values) {
                        csv << i << "," << csv_escape_free(a) << "\n";
                    }
                }
                pspin::write_text(out_path, csv.str());
                return 0;
            }
            ordered_json bins = ordered_json::array();
            for (const pspin::PoissonBinRow& b : poisson.bins) {
                bins.push_back(ordered_json{{"lo", b.lo},
                                            {"hi", b.hi},
                                            {"limit_mean", b.limit_mean},
                                            {"mean", b.mean},
                                            {"se", b.se},
                                            {"dispersion", b.dispersion},
                                            {"dispersion_se", b.dispersion_se}});
            }
            ordered_json atoms = ordered_json::array();
            for (std::size_t i = 0; i < run.xis.size(); ++i) {
                ordered_json row;
                row["instance"] = i;
                ordered_json vals = ordered_json::array();
                for (double a : run.xis[i].centered_values) vals.push_back(a);
                row["atoms"] = vals;
                atoms.push_back(row);
            }
            ordered_json config_j{{"p", p},      {"N", N},
                                  {"samples", samples}, {"L", L},
                                  {"restarts", restarts}, {"kick_rounds", kick_rounds},
                                  {"kicks_per_point", kicks_per_point}, {"threads", threads},
                                  {"format", format}};
            ordered_json report;
            report["meta"] = make_meta("extremal", config_j, seed, timer.ms());
            report["constants"] = constants_json(run.constants);
            report["extremal"] =
                ordered_json{{"bins", bins},
                             {"second_moment_ratio", poisson.second_moment_ratio},
                             {"second_moment_ratio_se", poisson.second_moment_ratio_se},
                             {"max_abs_bin_corr", poisson.max_abs_bin_corr},
                             {"gumbel", ordered_json{{"used", gumbel.used},
                                                     {"excluded", gumbel.excluded},
                                                     {"ks", gumbel.ks_distance},
                                                     {"ks_pvalue", gumbel.ks_pvalue},
                                                     {"median", gumbel.median},
                                                     {"median_target", gumbel.median_target},
                                                     {"median_se", gumbel.median_se}}},
                             {"samples", atoms}};
            pspin::write_text(out_path, pspin::dump_json17(report));
            return 0;
        }

        pspin::PerturbConfig config{{p, N}, samples, L, alpha, search, seed, eff_threads};
        pspin::PerturbRun run = pspin::run_perturb(config);
        pspin::ShiftReport shift = pspin::shift_distribution_test(run.per_instance, run.constants);

        if (format == "csv") {
            std::ostringstream csv;
            csv << "instance,value,predicted_shift,actual_shift,residual,overlap\n";
            for (std::size_t i = 0; i < run.per_instance.size(); ++i) {
                for (const pspin::MatchedPair& m : run.per_instance[i]) {
                    csv << i << "," << csv_escape_free(m.original.value) << ","
                        << csv_escape_free(m.predicted_shift) << ","
                        << csv_escape_free(m.actual_shift) << "," << csv_escape_free(m.residual)
                        << "," << csv_escape_free(m.overlap_val) << "\n";
                }
            }
            pspin::write_text(out_path, csv.str());
            return 0;
        }
        ordered_json matches = ordered_json::array();
        for (std::size_t i = 0; i < run.per_instance.size(); ++i) {
            for (const pspin::MatchedPair& m : run.per_instance[i]) {
                matches.push_back(ordered_json{{"instance", i},
                                               {"value", m.original.value},
                                               {"predicted_shift", m.predicted_shift},
                                               {"actual_shift", m.actual_shift},
                                               {"residual", m.residual},
                                               {"overlap", m.overlap_val},
                                               {"morse_index", m.original.morse_index},
                                               {"trace_proxy", m.trace_proxy},
                                               {"hessian_in_window", m.hessian_in_window}});
            }
        }
        ordered_json config_j{{"p", p},       {"N", N},        {"samples", samples},
                              {"L", L},       {"alpha", alpha}, {"restarts", restarts},
                              {"kick_rounds", kick_rounds},     {"kicks_per_point", kicks_per_point},
                              {"threads", threads},             {"format", format}};
        ordered_json report;
        report["meta"] = make_meta("perturb", config_j, seed, timer.ms());
        report["constants"] = constants_json(run.constants);
        report["perturb"] = ordered_json{
            {"aggregate",
             ordered_json{{"n_matches", shift.n_matches},
                          {"attempted", run.attempted},
                          {"unmatched", run.unmatched},
                          {"match_rate",
                           run.attempted > 0
                               ? 1.0 - static_cast<double>(run.unmatched) / run.attempted
                               : 0.0},
                          {"mean_shift", shift.mean_shift},
                          {"se_mean", shift.se_mean},
                          {"z_mean_vs_minus_C0", shift.z_mean},
                          {"var_shift", shift.var_shift},
                          {"se_var", shift.se_var},
                          {"z_var_vs_1", shift.z_var},
                          {"ks", shift.ks_distance},
                          {"ks_pvalue", shift.ks_pvalue},
                          {"slope", shift.slope},
                          {"se_slope", shift.se_slope},
                          {"cross_corr", shift.cross_corr},
                          {"se_cross_corr", shift.se_cross_corr},
                          {"median_abs_residual", shift.median_abs_residual},
                          {"mean_trace_proxy", shift.mean_trace_proxy},
                          {"se_trace_proxy", shift.se_trace_proxy},
                          {"frac_hessian_in_window", shift.frac_hessian_in_window}}},
            {"matches", matches}};
        pspin::write_text(out_path, pspin::dump_json17(report));
        return 0;
    }

    if (c_rep->parsed()) {
        pspin::TheoryConstants c = pspin::solve_constants(p, N);
        ordered_json config{{"p", p}, {"N", N}, {"format", format}};
        ordered_json report;
        report["meta"] = make_meta("report", config, seed, timer.ms());
        report["constants"] = constants_json(c);
        report["rmt"] = rmt_table({2, 4, 8}, {2.5}, 20000, seed);
        report["kacrice"] = kacrice_grid({p, N}, c, -2.0, 2.0, 5, 4000, seed, "mc");
        pspin::write_text(out_path, pspin::dump_json17(report));
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const CLI::ParseError&) {
        return 2;
    } catch (const pspin::numerical_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
