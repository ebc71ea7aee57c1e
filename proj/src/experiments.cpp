#include "wagemfg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "wagemfg/benchmark.hpp"
#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

constexpr std::array<CounterfactualMode, 3> kModes = {
    CounterfactualMode::Sel, CounterfactualMode::SelSearch, CounterfactualMode::Full};

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

std::array<std::vector<TenureVariance>, 3> tenure_variances(
    const std::array<EquilibriumResult, 3>& eq, const SimConfig& sc,
    const std::vector<double>& edges, double sigma_u2) {
    std::array<std::vector<TenureVariance>, 3> out;
    for (int i = 0; i < 3; ++i) {
        const SimPolicy pol = make_sim_policy(eq[i].env, eq[i].worker);
        out[i] = variance_by_tenure(simulate_panel(pol, sc), edges, sigma_u2);
    }
    return out;
}

} // namespace

std::vector<double> default_tenure_edges() { return {0.0, 1.0, 3.0, 7.0, 15.0, 30.0}; }

std::vector<double> default_hazard_edges() {
    return {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0};
}

bool DecompositionTable::all_signs_agree() const {
    return std::all_of(rows.begin(), rows.end(), [](const DecompositionRow& r) { return r.signs_agree; });
}

DecompositionTable run_decomposition(const ModelParams& p, const Numerics& num,
                                     const SimConfig& sc, const std::vector<double>& edges) {
    p.validate();
    num.validate();
    sc.validate();
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
        throw ConfigError("decomposition needs ascending tenure edges");
    }
    if (sc.max_years < edges.back()) throw ConfigError("simulation horizon shorter than the last tenure bin");

    std::array<std::future<EquilibriumResult>, 3> jobs;
    for (int i = 0; i < 3; ++i) {
        jobs[i] = std::async(std::launch::async, [&, i] { return solve_equilibrium(p, num, kModes[i]); });
    }
    std::array<EquilibriumResult, 3> eq;
    for (int i = 0; i < 3; ++i) eq[i] = jobs[i].get();

    // nothing past the last edge is used
    SimConfig run = sc;
    run.max_years = edges.back();
    SimConfig check = run;
    check.seed = sc.seed + 1;
    const auto main = tenure_variances(eq, run, edges, p.sigma_u2);
    const auto alt = tenure_variances(eq, check, edges, p.sigma_u2);

    DecompositionTable t;
    t.check_seed = check.seed;
    for (int i = 0; i < 3; ++i) {
        t.z_star[i] = eq[i].z_star;
        t.stationary_var[i] = dispersion(eq[i].m_star, eq[i].wage);
        t.iterations[i] = eq[i].iterations;
    }
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        DecompositionRow row;
        row.lo = edges[b];
        row.hi = edges[b + 1];
        row.var_sel = main[0][b].var;
        row.var_sel_search = main[1][b].var;
        row.var_full = main[2][b].var;
        for (int i = 0; i < 3; ++i) row.count[i] = main[i][b].count;
        row.signs_agree =
            sign_of(main[2][b].var - main[0][b].var) == sign_of(alt[2][b].var - alt[0][b].var) &&
            sign_of(main[0][b].var - main[1][b].var) == sign_of(alt[0][b].var - alt[1][b].var);
        t.rows.push_back(row);
    }
    return t;
}

const char* lever_name(Lever lever) {
    switch (lever) {
    case Lever::FiringCost: return "firing_cost";
    case Lever::SearchSubsidy: return "search_subsidy";
    case Lever::VolMultiplier: return "vol_multiplier";
    }
    return "?";
}

Lever parse_lever(const std::string& name) {
    for (Lever l : {Lever::FiringCost, Lever::SearchSubsidy, Lever::VolMultiplier}) {
        if (name == lever_name(l)) return l;
    }
    throw ConfigError("unknown lever '" + name + "' (firing_cost, search_subsidy, vol_multiplier)");
}

ModelParams with_lever(ModelParams p, Lever lever, double value) {
    switch (lever) {
    case Lever::FiringCost: p.F = value; break;
    case Lever::SearchSubsidy: p.s = value; break;
    case Lever::VolMultiplier: p.chi = value; break;
    }
    return p;
}

double lever_value(const ModelParams& p, Lever lever) {
    switch (lever) {
    case Lever::FiringCost: return p.F;
    case Lever::SearchSubsidy: return p.s;
    case Lever::VolMultiplier: return p.chi;
    }
    return 0.0;
}

bool SweepResult::partial() const {
    return std::any_of(points.begin(), points.end(), [](const SweepPoint& s) { return !s.converged; });
}

bool SweepResult::z_star_monotone(int sign) const {
    const SweepPoint* prev = nullptr;
    for (const SweepPoint& s : points) {
        if (!s.converged) continue;
        if (prev && sign * (s.z_star - prev->z_star) < 0.0) return false;
        prev = &s;
    }
    return true;
}

bool SweepResult::j2j_monotone(int sign, double tol) const {
    const SweepPoint* prev = nullptr;
    for (const SweepPoint& s : points) {
        if (!s.converged) continue;
        if (prev && sign * (s.j2j - prev->j2j) < -tol) return false;
        prev = &s;
    }
    return true;
}

const SweepPoint& SweepResult::baseline() const {
    for (const SweepPoint& s : points) {
        if (s.value == baseline_value) return s;
    }
    throw ConfigError("sweep has no baseline point");
}

double stationary_j2j_rate(const EquilibriumResult& eq) {
    return (eq.flow.j2j_out.array() * eq.m_star.m.array()).sum() * eq.m_star.grid.dz;
}

SweepResult run_policy_sweep(const ModelParams& p, const Numerics& num, Lever lever,
                             const std::vector<double>& values, CounterfactualMode mode) {
    p.validate();
    num.validate();
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly ascending");
    }
    SweepResult res;
    res.lever = lever;
    res.baseline_value = lever_value(p, lever);
    if (std::find(values.begin(), values.end(), res.baseline_value) == values.end()) {
        throw ConfigError(std::string("sweep values must include the baseline ") + lever_name(lever));
    }
    for (double v : values) with_lever(p, lever, v).validate();

    std::vector<std::future<SweepPoint>> jobs;
    for (double v : values) {
        jobs.push_back(std::async(std::launch::async, [=, &num] {
            SweepPoint pt;
            pt.value = v;
            try {
                const ModelParams q = with_lever(p, lever, v);
                const EquilibriumResult eq = solve_equilibrium(q, num, mode);
                pt.converged = true;
                pt.z_star = eq.z_star;
                pt.var_logw = dispersion(eq.m_star, eq.wage);
                pt.j2j = stationary_j2j_rate(eq);
                pt.mean_w = mean_wage(eq.m_star, eq.wage);
                pt.iterations = eq.iterations;
            } catch (const Error& e) {
                pt.error = e.what();
            }
            return pt;
        }));
    }
    for (auto& j : jobs) res.points.push_back(j.get());
    return res;
}

double moment_distance(const std::vector<double>& model, const std::vector<double>& target,
                       const std::vector<double>& weights) {
    if (model.size() != target.size() || model.size() != weights.size()) {
        throw ConfigError("moment, target and weight vectors differ in length");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (weights[i] < 0.0) throw ConfigError("moment weights must be nonnegative");
        const double e = model[i] - target[i];
        d += weights[i] * e * e;
    }
    return d;
}

CalibrationMoments calibration_moments(const EquilibriumResult& eq, const Panel& panel, double T_ret) {
    CalibrationMoments c;
    const BenchmarkSpec spec{eq.env.params.z0 - eq.z_star, eq.env.coeffs.mu_Z, eq.env.coeffs.sigma_Z, T_ret};
    c.never_end = never_end_probability_truncated(spec);

    double best = -1.0;
    for (const HazardBin& h : empirical_hazard(panel, default_hazard_edges())) {
        if (!h.missing && h.rate > best) {
            best = h.rate;
            c.hazard_peak = 0.5 * (h.lo + h.hi);
        }
    }

    double growth = 0.0;
    long pairs = 0;
    for (const SpellRecord& r : panel.records) {
        for (std::size_t i = 1; i < r.wage_path.size(); ++i) {
            const WageSample& a = r.wage_path[i - 1];
            const WageSample& b = r.wage_path[i];
            growth += (b.wage - a.wage) / (b.tenure - a.tenure);
            ++pairs;
        }
    }
    c.wage_growth = pairs ? growth / pairs : 0.0;
    c.j2j = j2j_rate(panel);
    return c;
}

} // namespace wagemfg
