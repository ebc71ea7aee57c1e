#include "wagemfg/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "wagemfg/errors.hpp"

namespace wagemfg {

double fp_mc_l1(const EquilibriumResult& eq, const SimConfig& sc) {
    const Panel panel = simulate_panel(make_sim_policy(eq.env, eq.worker), sc);
    const Eigen::VectorXd h = occupation_density(panel);
    return (h - eq.m_star.m).cwiseAbs().sum() * eq.m_star.grid.dz;
}

double tail_mass(const StationaryDensity& d) {
    const int K = d.grid.K;
    const int cut = static_cast<int>(std::floor(0.05 * K));
    if (cut == 0) return 0.0;
    return (d.m.head(cut).sum() + d.m.tail(cut).sum()) * d.grid.dz;
}

bool continuation_is_upper_interval(const WorkerSolution& sol) {
    for (std::size_t k = 0; k < sol.continue_mask.size(); ++k) {
        if (sol.continue_mask[k] != (static_cast<int>(k) >= sol.k_star)) return false;
    }
    return true;
}

WorkerSolution resolve_on_grid(const EquilibriumResult& eq, const Numerics& num, int K) {
    Numerics fine = num;
    fine.K = K;
    const Grid g = build_grid(fine.z_min, fine.z_max, K);
    const ModelParams& p = eq.env.params;
    OfferKernel offers = OfferKernel::point_mass(g, p.z0);
    if (num.offers == OfferMode::StationaryDensity) {
        throw ConfigError("grid refinement is only defined for point-mass offers");
    }
    const WorkerEnv env = make_worker_env(p, fine, eq.mode, eq.VU, offers);
    return solve_obstacle_pi(env, num.pi_tol, num.pi_max_iter);
}

std::vector<Check> run_diagnostics(const RunConfig& cfg) {
    const Numerics& num = cfg.numerics;
    const EquilibriumResult eq = solve_equilibrium(cfg.params, num, cfg.mode);
    const Grid& g = eq.m_star.grid;
    std::vector<Check> out;
    auto add = [&out](std::string name, double value, double threshold, bool pass) {
        out.push_back({std::move(name), value, threshold, pass});
    };

    const double mass_err = std::abs(eq.m_star.mass() - 1.0);
    add("mass_conservation", mass_err, 1e-12, mass_err <= 1e-12);
    const double m_min = eq.m_star.m.minCoeff();
    add("nonnegativity", m_min, 0.0, m_min >= 0.0);
    add("posthoc_consistency", eq.posthoc_dm, 10.0 * num.eps_m, eq.posthoc_dm <= 10.0 * num.eps_m);

    const WorkerSolution vi = solve_obstacle_vi(eq.env, num.vi_dt, num.vi_theta, 1e-12, num.vi_max_iter);
    const double pv = (vi.V - eq.worker.V).cwiseAbs().maxCoeff();
    add("pi_vi_sup", pv, 1e-8, pv <= 1e-8);

    const double l1 = fp_mc_l1(eq, cfg.sim);
    add("fp_mc_l1", l1, 0.05, l1 <= 0.05);

    const int margin = std::min(eq.k_star, g.K - 1 - eq.k_star);
    add("free_boundary_margin_nodes", margin, 3, margin >= 3);
    const double tails = tail_mass(eq.m_star);
    add("tail_mass", tails, 1e-8, tails < 1e-8);
    const bool upper = continuation_is_upper_interval(eq.worker);
    add("upper_interval", upper ? 1.0 : 0.0, 1.0, upper);

    // halve dz twice with the outside value frozen
    const int K1 = 2 * num.K - 1, K2 = 2 * K1 - 1;
    const WorkerSolution s1 = resolve_on_grid(eq, num, K1);
    const WorkerSolution s2 = resolve_on_grid(eq, num, K2);
    const Grid g1 = build_grid(num.z_min, num.z_max, K1);
    const Grid g2 = build_grid(num.z_min, num.z_max, K2);
    const double dz_shift = std::abs(free_boundary(s1, g1).z_star - eq.z_star);
    add("grid_refinement_z_star", dz_shift, 2.0 * g.dz, dz_shift <= 2.0 * g.dz);
    const double r0 = smooth_fit_residual(eq.worker, g);
    const double r1 = smooth_fit_residual(s1, g1);
    const double r2 = smooth_fit_residual(s2, g2);
    const double worst = std::max(r1 / r0, r2 / r1);
    add("smooth_fit_halving_ratio", worst, 0.6, worst <= 0.6);
    return out;
}

} // namespace wagemfg
