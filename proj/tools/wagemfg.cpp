// wagemfg: stationary wage-dispersion equilibrium solver.
//
// exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 I/O failure

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wagemfg/benchmark.hpp"
#include "wagemfg/config.hpp"
#include "wagemfg/diagnostics.hpp"
#include "wagemfg/equilibrium.hpp"
#include "wagemfg/errors.hpp"
#include "wagemfg/experiments.hpp"
#include "wagemfg/io.hpp"
#include "wagemfg/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace wagemfg;

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<unsigned long long> seed;
    std::optional<int> threads;
    std::string mode;
    std::string lever = "firing_cost";
    std::string values;
    std::optional<double> d;
};

CounterfactualMode parse_mode(const std::string& s) {
    if (s == "sel") return CounterfactualMode::Sel;
    if (s == "sel_search") return CounterfactualMode::SelSearch;
    if (s == "full") return CounterfactualMode::Full;
    throw ConfigError("unknown mode '" + s + "' (sel, sel_search, full)");
}

RunConfig load(const Options& o) {
    RunConfig cfg = load_config(o.config);
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.threads) cfg.sim.threads = *o.threads;
    if (!o.mode.empty()) cfg.mode = parse_mode(o.mode);
    cfg.sim.validate();
    return cfg;
}

std::vector<std::pair<std::string, double>> equilibrium_scalars(const EquilibriumResult& eq) {
    return {{"z_star", eq.z_star},
            {"k_star", static_cast<double>(eq.k_star)},
            {"VU", eq.VU},
            {"var_logw", dispersion(eq.m_star, eq.wage)},
            {"mean_w", mean_wage(eq.m_star, eq.wage)},
            {"j2j", stationary_j2j_rate(eq)},
            {"mass", eq.m_star.mass()},
            {"entry_flow", eq.m_star.entry_flow},
            {"iterations", static_cast<double>(eq.iterations)},
            {"posthoc_dm", eq.posthoc_dm},
            {"posthoc_dw", eq.posthoc_dw},
            {"hjb_residual", eq.worker.residual}};
}

void finish(const fs::path& dir, const RunConfig& cfg, const std::string& command,
            nlohmann::ordered_json body) {
    nlohmann::ordered_json j;
    j["provenance"] = provenance(cfg, command);
    j["status"] = "ok";
    j["results"] = std::move(body);
    write_json(dir / "summary.json", j);
}

int cmd_solve(const Options& o) {
    const RunConfig cfg = load(o);
    const fs::path dir(o.out);
    prepare_output_dir(dir);
    const EquilibriumResult eq = solve_equilibrium(cfg.params, cfg.numerics, cfg.mode);
    write_text_file(dir / "density.csv", density_csv(eq.m_star).str());
    write_text_file(dir / "value.csv", value_csv(eq.env, eq.worker).str());
    write_text_file(dir / "trace.csv", trace_csv(eq.trace).str());
    const auto scalars = equilibrium_scalars(eq);
    write_text_file(dir / "scalars.csv", scalars_csv(scalars).str());
    nlohmann::ordered_json body;
    body["mode"] = mode_name(eq.mode);
    for (const auto& [k, v] : scalars) body[k] = v;
    finish(dir, cfg, "solve", body);
    std::printf("%s: z* = %.6f, Var(log w) = %.6f, %d iterations\n", mode_name(eq.mode), eq.z_star,
                dispersion(eq.m_star, eq.wage), eq.iterations);
    return 0;
}

int cmd_benchmark(const Options& o) {
    const RunConfig cfg = load(o);
    const fs::path dir(o.out);
    prepare_output_dir(dir);
    const SurplusCoeffs c = derive_surplus_coeffs(cfg.params);
    double d = 0.0;
    if (o.d) {
        d = *o.d;
    } else {
        const EquilibriumResult eq = solve_equilibrium(cfg.params, cfg.numerics, cfg.mode);
        d = cfg.params.z0 - eq.z_star;
    }
    const BenchmarkSpec spec{d, c.mu_Z, c.sigma_Z, cfg.experiments.retirement_years};
    spec.validate();
    write_text_file(dir / "benchmark.csv", benchmark_csv(benchmark_curve(spec, 40.0, 400)).str());
    const std::vector<std::pair<std::string, double>> scalars = {
        {"d", d},
        {"mu_Z", c.mu_Z},
        {"sigma_Z", c.sigma_Z},
        {"never_end", never_end_probability(spec)},
        {"never_end_truncated", never_end_probability_truncated(spec)},
        {"hazard_peak", hazard_peak(spec)}};
    write_text_file(dir / "scalars.csv", scalars_csv(scalars).str());
    nlohmann::ordered_json body;
    for (const auto& [k, v] : scalars) body[k] = v;
    finish(dir, cfg, "benchmark", body);
    std::printf("d = %.6f, survival to %.0f years = %.4f, hazard peak at %.3f years\n", d,
                spec.T_ret, never_end_probability_truncated(spec), hazard_peak(spec));
    return 0;
}

int cmd_simulate(const Options& o) {
    const RunConfig cfg = load(o);
    const fs::path dir(o.out);
    prepare_output_dir(dir);
    const EquilibriumResult eq = solve_equilibrium(cfg.params, cfg.numerics, cfg.mode);
    const Panel panel = simulate_panel(make_sim_policy(eq.env, eq.worker), cfg.sim);
    const auto& edges = cfg.experiments.tenure_edges;
    write_text_file(dir / "hazard.csv", hazard_csv(empirical_hazard(panel, default_hazard_edges())).str());
    write_text_file(dir / "var_by_tenure.csv",
                    var_by_tenure_csv(variance_by_tenure(panel, edges, cfg.params.sigma_u2)).str());
    write_text_file(dir / "wage_tenure.csv", wage_tenure_csv(panel).str());
    write_text_file(dir / "density_by_age.csv", density_by_age_csv(panel, edges).str());

    StationaryDensity mc = eq.m_star;
    mc.m = occupation_density(panel);
    write_text_file(dir / "mc_density.csv", density_csv(mc).str());

    const CalibrationMoments mom = calibration_moments(eq, panel, cfg.experiments.retirement_years);
    std::vector<std::pair<std::string, double>> scalars = {
        {"spells", static_cast<double>(cfg.sim.n_spells)},
        {"spell_years", panel.spell_years()},
        {"j2j", mom.j2j},
        {"never_end_analytic", mom.never_end},
        {"never_end_simulated", 1.0 - hitting_fraction(panel, cfg.experiments.retirement_years)},
        {"hazard_peak", mom.hazard_peak},
        {"wage_growth", mom.wage_growth},
        {"fp_mc_l1", (mc.m - eq.m_star.m).cwiseAbs().sum() * mc.grid.dz}};
    if (!cfg.experiments.targets.empty()) {
        const MomentTargets t = load_targets(cfg.experiments.targets);
        scalars.push_back({"moment_distance", moment_distance(mom.as_vector(), t.values, t.weights)});
    }
    write_text_file(dir / "scalars.csv", scalars_csv(scalars).str());
    nlohmann::ordered_json body;
    body["mode"] = mode_name(eq.mode);
    for (const auto& [k, v] : scalars) body[k] = v;
    finish(dir, cfg, "simulate", body);
    std::printf("%ld spells, %.0f spell-years, job-to-job rate %.5f\n", cfg.sim.n_spells,
                panel.spell_years(), mom.j2j);
    return 0;
}

int cmd_decompose(const Options& o) {
    const RunConfig cfg = load(o);
    const fs::path dir(o.out);
    prepare_output_dir(dir);
    const DecompositionTable t =
        run_decomposition(cfg.params, cfg.numerics, cfg.sim, cfg.experiments.tenure_edges);
    write_text_file(dir / "decomposition.csv", decomposition_csv(t).str());
    nlohmann::ordered_json body;
    body["check_seed"] = t.check_seed;
    body["signs_agree"] = t.all_signs_agree();
    const char* names[3] = {"sel", "sel_search", "full"};
    for (int i = 0; i < 3; ++i) {
        body[names[i]] = {{"z_star", t.z_star[i]},
                          {"stationary_var", t.stationary_var[i]},
                          {"iterations", t.iterations[i]}};
    }
    finish(dir, cfg, "decompose", body);
    std::printf("%-10s %14s %14s %14s\n", "bin", "sel", "sel_search", "full");
    for (const DecompositionRow& r : t.rows) {
        std::printf("%4g-%-5g %14.6g %14.6g %14.6g\n", r.lo, r.hi, r.var_sel, r.var_sel_search, r.var_full);
    }
    if (!t.all_signs_agree()) std::printf("warning: cross-check panel disagrees on some orderings\n");
    return 0;
}

int cmd_sweep(const Options& o) {
    const RunConfig cfg = load(o);
    const fs::path dir(o.out);
    prepare_output_dir(dir);
    const Lever lever = parse_lever(o.lever);
    std::vector<double> values;
    if (!o.values.empty()) values = parse_real_list(o.values);
    else if (lever == Lever::FiringCost) values = cfg.experiments.firing_cost;
    else if (lever == Lever::SearchSubsidy) values = cfg.experiments.search_subsidy;
    else values = cfg.experiments.vol_multiplier;
    const SweepResult s = run_policy_sweep(cfg.params, cfg.numerics, lever, values, cfg.mode);
    write_text_file(dir / (std::string("sweep_") + lever_name(lever) + ".csv"), sweep_csv(s).str());
    nlohmann::ordered_json body;
    body["lever"] = lever_name(lever);
    body["partial"] = s.partial();
    body["z_star_weakly_decreasing"] = s.z_star_monotone(-1);
    body["z_star_weakly_increasing"] = s.z_star_monotone(+1);
    body["j2j_weakly_decreasing"] = s.j2j_monotone(-1);
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    for (const SweepPoint& p : s.points) {
        if (!p.converged) failures.push_back({{"value", p.value}, {"error", p.error}});
    }
    body["failures"] = failures;
    finish(dir, cfg, "sweep", body);
    for (const SweepPoint& p : s.points) {
        if (p.converged) {
            std::printf("%s = %g: z* = %.6f, Var(log w) = %.6f, j2j = %.6f\n", lever_name(lever), p.value,
                        p.z_star, p.var_logw, p.j2j);
        } else {
            std::printf("%s = %g: not converged (%s)\n", lever_name(lever), p.value, p.error.c_str());
        }
    }
    return 0;
}

int cmd_diagnose(const Options& o) {
    const RunConfig cfg = load(o);
    const fs::path dir(o.out);
    prepare_output_dir(dir);
    const std::vector<Check> checks = run_diagnostics(cfg);
    CsvTable t({"check", "value", "threshold", "status"});
    bool ok = true;
    nlohmann::ordered_json body;
    for (const Check& c : checks) {
        t.add_row({c.name, fmt(c.value), fmt(c.threshold), c.pass ? "PASS" : "FAIL"});
        body[c.name] = {{"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
        std::printf("%-28s %-5s %.6g (threshold %.3g)\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.value, c.threshold);
        ok = ok && c.pass;
    }
    write_text_file(dir / "diagnostics.csv", t.str());
    finish(dir, cfg, "diagnose", body);
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stationary mean-field wage-dispersion solver"};
    app.set_version_flag("--version", std::string(WAGEMFG_VERSION));
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "run configuration (INI)")->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "override the simulation seed");
        sub->add_option("--threads", o.threads, "simulation threads (default: WAGEMFG_THREADS)");
    };
    CLI::App* solve = app.add_subcommand("solve", "stationary equilibrium");
    common(solve);
    solve->add_option("--mode", o.mode, "sel, sel_search or full");
    CLI::App* bench = app.add_subcommand("benchmark", "Brownian hitting-time benchmark");
    common(bench);
    bench->add_option("--d", o.d, "distance to the barrier (default: solve the equilibrium)");
    bench->add_option("--mode", o.mode, "mode used to locate the barrier");
    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo panel from the equilibrium policies");
    common(sim);
    sim->add_option("--mode", o.mode, "sel, sel_search or full");
    CLI::App* dec = app.add_subcommand("decompose", "variance decomposition by tenure");
    common(dec);
    CLI::App* sweep = app.add_subcommand("sweep", "policy lever sweep");
    common(sweep);
    sweep->add_option("--lever", o.lever, "firing_cost, search_subsidy or vol_multiplier");
    sweep->add_option("--values", o.values, "comma separated values (default: from the config)");
    sweep->add_option("--mode", o.mode, "sel, sel_search or full");
    CLI::App* diag = app.add_subcommand("diagnose", "numerical checks with PASS/FAIL per check");
    common(diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*bench) return cmd_benchmark(o);
        if (*sim) return cmd_simulate(o);
        if (*dec) return cmd_decompose(o);
        if (*sweep) return cmd_sweep(o);
        if (*diag) return cmd_diagnose(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
