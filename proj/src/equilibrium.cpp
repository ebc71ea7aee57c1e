#include "wagemfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

struct Pass {
    WorkerEnv env;
    WorkerSolution sol;
    FlowSpec flow;
    StationaryDensity density;
    double VU_new = 0.0;
};

// One best response: kernel from m, worker solve, forward solve, outside value.
Pass best_response(const ModelParams& p, const Numerics& num, CounterfactualMode mode,
                   const Eigen::VectorXd& m, double VU, const std::vector<bool>& active) {
    const Grid g = build_grid(num.z_min, num.z_max, num.K);
    const OfferKernel offers = num.offers == OfferMode::PointMass
                                   ? OfferKernel::point_mass(g, p.z0)
                                   : OfferKernel::from_density(m, g, active);
    Pass out;
    out.env = make_worker_env(p, num, mode, VU, offers);
    out.sol = solve_obstacle_pi(out.env, num.pi_tol, num.pi_max_iter);
    const Eigen::VectorXd kill = Eigen::VectorXd::Constant(g.K, num.kill_rate);
    out.flow = flow_from_worker(out.env, out.sol, kill);
    out.density = solve_stationary(assemble_flux_system(out.flow, g));
    out.VU_new = mode == CounterfactualMode::Full ? outside_value(out.sol.V, offers, p) : VU;
    return out;
}

double sup_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

void Numerics::validate() const {
    if (!(z_min < z_max)) throw ConfigError("numerics: z_min must be below z_max");
    if (K < 3) throw ConfigError("numerics: K must be at least 3");
    if (!(a_max > 0.0) || n_actions < 2) throw ConfigError("numerics: bad action grid");
    if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("numerics: omega must lie in (0, 1]");
    if (!(eps_m > 0.0) || !(eps_w > 0.0)) throw ConfigError("numerics: tolerances must be positive");
    if (max_outer < 1 || pi_max_iter < 1 || vi_max_iter < 1) {
        throw ConfigError("numerics: iteration limits must be positive");
    }
    if (oscillation_window < 2) throw ConfigError("numerics: oscillation window too short");
    if (kill_rate < 0.0) throw ConfigError("numerics: kill rate must be nonnegative");
    if (!(vi_dt > 0.0) || !(vi_theta > 0.0 && vi_theta <= 1.0)) {
        throw ConfigError("numerics: bad value-iteration step");
    }
}

const char* mode_name(CounterfactualMode mode) {
    switch (mode) {
    case CounterfactualMode::Sel: return "sel";
    case CounterfactualMode::SelSearch: return "sel_search";
    case CounterfactualMode::Full: return "full";
    }
    return "?";
}

double outside_value_residual(double VU, const Eigen::VectorXd& V, const OfferKernel& offers,
                              const ModelParams& p) {
    const double gain = ((V.array() - VU).cwiseMax(0.0) * offers.probs.array()).sum();
    return p.r * VU - p.b - p.lambdaU * gain;
}

double outside_value(const Eigen::VectorXd& V, const OfferKernel& offers, const ModelParams& p) {
    if (V.size() != offers.probs.size()) throw ConfigError("value and offer kernel sizes differ");
    if (!V.allFinite() || !std::isfinite(p.b)) {
        throw ConfigError("outside value: non-finite inputs, cannot bracket the fixed point");
    }
    double lo = p.b / p.r;
    double hi = std::max(lo, V.maxCoeff());
    if (outside_value_residual(lo, V, offers, p) > 0.0 || outside_value_residual(hi, V, offers, p) < 0.0) {
        throw ConfigError("outside value: bisection bracket failed");
    }
    for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (outside_value_residual(mid, V, offers, p) <= 0.0) lo = mid;
        else hi = mid;
    }
    const double rl = std::abs(outside_value_residual(lo, V, offers, p));
    const double rh = std::abs(outside_value_residual(hi, V, offers, p));
    return rl <= rh ? lo : hi;
}

double outside_value(const Eigen::VectorXd& V, const StationaryDensity& m, const ModelParams& p) {
    return outside_value(V, OfferKernel::from_density(m.m, m.grid), p);
}

double mean_wage(const StationaryDensity& m, const Eigen::VectorXd& wage) {
    return (wage.array() * m.m.array()).sum() * m.grid.dz;
}

double dispersion(const StationaryDensity& m, const Eigen::VectorXd& wage) {
    const double wbar = mean_wage(m, wage);
    return ((wage.array() - wbar).square() * m.m.array()).sum() * m.grid.dz;
}

Eigen::VectorXd initial_density(const Grid& g, double z0, InitialDensity kind) {
    Eigen::VectorXd m;
    if (kind == InitialDensity::Uniform) {
        m = Eigen::VectorXd::Ones(g.K);
    } else {
        const double width = std::max(0.05 * (g.z_max - g.z_min), 3.0 * g.dz);
        m = (-(g.nodes.array() - z0).square() / (2.0 * width * width)).exp();
    }
    return m / (m.sum() * g.dz);
}

WorkerEnv make_worker_env(const ModelParams& p, const Numerics& num, CounterfactualMode mode,
                          double VU, const OfferKernel& offers) {
    WorkerEnv env;
    env.params = p;
    env.grid = build_grid(num.z_min, num.z_max, num.K);
    env.actions = build_action_grid(num.a_max, num.n_actions);
    env.coeffs = derive_surplus_coeffs(p);
    env.F = p.F;
    env.offers = offers;
    env.search_enabled = mode != CounterfactualMode::Sel;
    if (mode == CounterfactualMode::Full) {
        env.VU = VU;
        env.wage = wage_schedule(env.grid.nodes, VU, p, WageMode::AffineEquilibrium);
    } else {
        env.VU = p.VU_exog;
        env.wage = wage_schedule(env.grid.nodes, p.VU_exog, p, WageMode::SharingExogenous);
    }
    return env;
}

EquilibriumResult solve_equilibrium(const ModelParams& p, const Numerics& num,
                                    const Eigen::VectorXd& m0, CounterfactualMode mode) {
    p.validate();
    num.validate();
    const Grid g = build_grid(num.z_min, num.z_max, num.K);
    if (m0.size() != g.K) throw ConfigError("initial density must have one entry per node");

    // without feedback the damping only slows things down
    const bool feedback = mode != CounterfactualMode::Sel && num.offers == OfferMode::StationaryDensity;
    const double omega = (feedback || mode == CounterfactualMode::Full) ? num.omega : 1.0;

    Eigen::VectorXd m = m0 / (m0.sum() * g.dz);
    double VU = p.VU_exog;
    std::vector<bool> active;
    Eigen::VectorXd wage_prev;

    EquilibriumResult res;
    res.mode = mode;
    for (int it = 1; it <= num.max_outer; ++it) {
        Pass pass = best_response(p, num, mode, m, VU, active);
        const Eigen::VectorXd m_new = (1.0 - omega) * m + omega * pass.density.m;
        const double dm = sup_diff(m_new, m);
        const double dw = wage_prev.size() ? sup_diff(pass.env.wage, wage_prev)
                                           : std::numeric_limits<double>::infinity();
        m = m_new;
        wage_prev = pass.env.wage;
        active = pass.sol.continue_mask;
        VU = (1.0 - omega) * VU + omega * pass.VU_new;

        TraceRecord rec;
        rec.iter = it;
        rec.dm = dm;
        rec.dw = dw;
        rec.mean_z = (g.nodes.array() * pass.density.m.array()).sum() * g.dz;
        rec.z_star = pass.sol.k_star < g.K ? g.nodes[pass.sol.k_star] : g.z_max;
        rec.var_logw = dispersion(pass.density, pass.env.wage);
        res.trace.push_back(rec);

        if (dm <= num.eps_m && dw <= num.eps_w) {
            res.iterations = it;
            res.m_star = pass.density;
            res.worker = std::move(pass.sol);
            res.env = std::move(pass.env);
            res.flow = std::move(pass.flow);
            res.wage = res.env.wage;
            res.VU = res.env.VU;
            break;
        }

        const int W = num.oscillation_window;
        if (it >= 2 * W) {
            double recent = std::numeric_limits<double>::infinity(), before = recent;
            for (int i = it - W; i < it; ++i) recent = std::min(recent, res.trace[i].dm);
            for (int i = it - 2 * W; i < it - W; ++i) before = std::min(before, res.trace[i].dm);
            if (recent >= before) {
                std::ostringstream msg;
                msg << "equilibrium iteration stalled or oscillating after " << it
                    << " iterations (density change " << dm << "); try a smaller omega";
                throw IterationLimitError(msg.str(), dm, it);
            }
        }
        if (it == num.max_outer) {
            throw IterationLimitError("equilibrium did not converge within max_outer iterations", dm, it);
        }
    }

    if (res.worker.k_star >= g.K) {
        throw DomainError("equilibrium has no continuation region");
    }
    res.k_star = res.worker.k_star;
    res.z_star = g.nodes[res.k_star];

    // undamped consistency pass from the converged objects
    const Pass check = best_response(p, num, mode, res.m_star.m, res.VU, res.worker.continue_mask);
    res.posthoc_dm = sup_diff(check.density.m, res.m_star.m);
    res.posthoc_dw = sup_diff(check.env.wage, res.wage);
    if (mode == CounterfactualMode::Full) {
        res.outside_residual = std::abs(outside_value_residual(res.VU, res.worker.V, res.env.offers, p));
        res.posthoc_dw = std::max(res.posthoc_dw, std::abs(check.VU_new - res.VU));
    }
    if (res.posthoc_dm > 10.0 * num.eps_m || res.posthoc_dw > 10.0 * num.eps_w) {
        std::ostringstream msg;
        msg << "post hoc consistency pass moved the equilibrium (density " << res.posthoc_dm
            << ", wage " << res.posthoc_dw << ")";
        throw IterationLimitError(msg.str(), res.posthoc_dm, res.iterations);
    }
    return res;
}

EquilibriumResult solve_equilibrium(const ModelParams& p, const Numerics& num,
                                    CounterfactualMode mode, InitialDensity init) {
    const Grid g = build_grid(num.z_min, num.z_max, num.K);
    return solve_equilibrium(p, num, initial_density(g, p.z0, init), mode);
}

} // namespace wagemfg
