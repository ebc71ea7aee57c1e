#include "wagemfg/kolmogorov.hpp"

#include <algorithm>
#include <cmath>

#include "wagemfg/errors.hpp"
#include "wagemfg/linalg.hpp"

namespace wagemfg {

void FlowSpec::validate(const Grid& g) const {
    const int K = g.K;
    if (drift.size() != K || vol2.size() != K || kill.size() != K || entry.size() != K ||
        j2j_out.size() != K || j2j_target.rows() != K || j2j_target.cols() != K) {
        throw ConfigError("flow coefficients must have one entry per node");
    }
    if ((vol2.array() <= 0.0).any()) throw ConfigError("flow volatility must be positive");
    if ((kill.array() < 0.0).any() || (entry.array() < 0.0).any() || (j2j_out.array() < 0.0).any()) {
        throw ConfigError("kill, entry and job-to-job rates must be nonnegative");
    }
    if (absorb_below < 0 || absorb_below > K) throw ConfigError("absorbing index out of range");
    for (int k = 0; k < K; ++k) {
        if (j2j_out[k] > 0.0 && std::abs(j2j_target.row(k).sum() - 1.0) > 1e-12) {
            throw ConfigError("job-to-job landing weights must sum to one");
        }
    }
}

FluxSystem assemble_flux_system(const FlowSpec& flow, const Grid& g) {
    flow.validate(g);
    const int K = g.K;
    const double dz = g.dz;

    FluxSystem sys;
    sys.grid = g;
    sys.absorb_below = flow.absorb_below;
    sys.op = Eigen::MatrixXd::Zero(K, K);
    sys.source = flow.entry;
    Eigen::MatrixXd& op = sys.op;

    // J_{k+1/2} = a_k m_k + b_k m_{k+1}
    for (int k = 0; k + 1 < K; ++k) {
        const double mu_bar = 0.5 * (flow.drift[k] + flow.drift[k + 1]);
        const double a = 0.5 * mu_bar + 0.5 * flow.vol2[k] / dz;
        const double b = 0.5 * mu_bar - 0.5 * flow.vol2[k + 1] / dz;
        op(k, k) -= a / dz;
        op(k, k + 1) -= b / dz;
        op(k + 1, k) += a / dz;
        op(k + 1, k + 1) += b / dz;
    }
    for (int k = 0; k < K; ++k) {
        op(k, k) -= flow.kill[k] + flow.j2j_out[k];
        if (flow.j2j_out[k] > 0.0) op.col(k) += flow.j2j_out[k] * flow.j2j_target.row(k).transpose();
    }

    sys.A = op;
    sys.rhs = -flow.entry;
    for (int k = 0; k < flow.absorb_below; ++k) {
        sys.A.row(k).setZero();
        sys.A(k, k) = 1.0;
        sys.rhs[k] = 0.0;
    }

    const bool has_sink = flow.absorb_below > 0 || (flow.kill.array() > 0.0).any();
    const double entry_total = flow.entry.tail(K - flow.absorb_below).sum();
    if (!has_sink) {
        if (entry_total > 0.0) {
            throw LinearSolveError("degenerate flow: entry without any separation sink");
        }
        // mass is conserved: fix it with a normalisation row
        sys.A.row(K - 1).setConstant(dz);
        sys.rhs[K - 1] = 1.0;
        sys.normalization_row = true;
    } else if (!(entry_total > 0.0)) {
        throw LinearSolveError("degenerate flow: separation sink without entry");
    }
    return sys;
}

StationaryDensity solve_stationary(const FluxSystem& sys) {
    Eigen::VectorXd m = solve_dense(sys.A, sys.rhs);
    const double scale = m.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !m.allFinite()) {
        throw LinearSolveError("degenerate flow: stationary density vanishes");
    }
    if (m.minCoeff() < -1e-9 * scale) {
        throw DomainError("stationary density has negative entries; refine the grid (cell Peclet number above one)");
    }
    m = m.cwiseMax(0.0);
    StationaryDensity d;
    d.grid = sys.grid;
    const double mass = m.sum() * sys.grid.dz;
    d.m = m / mass;
    d.entry_flow = sys.normalization_row ? 0.0 : sys.source.tail(sys.grid.K - sys.absorb_below).sum() * sys.grid.dz / mass;
    return d;
}

double flux_residual(const FluxSystem& sys, const StationaryDensity& d) {
    const int K = sys.grid.K;
    // the unnormalised system balances against the entry scaled by the same factor
    const double factor = sys.normalization_row ? 0.0 : d.entry_flow / std::max(sys.source.tail(K - sys.absorb_below).sum() * sys.grid.dz, 1e-300);
    const Eigen::VectorXd res = sys.op * d.m + factor * sys.source;
    const double ref = (sys.op.cwiseAbs() * d.m).cwiseMax(factor * sys.source.cwiseAbs()).maxCoeff();
    double worst = 0.0;
    for (int k = sys.absorb_below; k < K; ++k) worst = std::max(worst, std::abs(res[k]));
    return ref > 0.0 ? worst / ref : worst;
}

double separation_flux(const StationaryDensity& d, const FlowSpec& flow, int k_star) {
    const double dz = d.grid.dz;
    double out = (flow.kill.array() * d.m.array()).sum() * dz;
    if (k_star > 0 && k_star < d.grid.K) {
        const int k = k_star - 1;
        const double mu_bar = 0.5 * (flow.drift[k] + flow.drift[k + 1]);
        const double J = mu_bar * 0.5 * (d.m[k] + d.m[k + 1]) -
                         0.5 * (flow.vol2[k + 1] * d.m[k + 1] - flow.vol2[k] * d.m[k]) / dz;
        out += -J;
    }
    return out;
}

Eigen::VectorXd point_entry(const Grid& g, double z0, double rate) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(g.K);
    e[g.nearest_index(z0)] = rate / g.dz;
    return e;
}

FlowSpec flow_from_worker(const WorkerEnv& env, const WorkerSolution& sol,
                          const Eigen::VectorXd& kill) {
    const int K = env.grid.K;
    FlowSpec f;
    f.drift = Eigen::VectorXd::Constant(K, env.coeffs.mu_Z);
    f.vol2 = Eigen::VectorXd::Constant(K, env.coeffs.sigma_Z * env.coeffs.sigma_Z);
    f.kill = kill.size() == K ? kill : Eigen::VectorXd::Zero(K);
    f.entry = point_entry(env.grid, env.params.z0, env.params.entry_rate);
    f.j2j_out = Eigen::VectorXd::Zero(K);
    f.j2j_target = Eigen::MatrixXd::Zero(K, K);
    f.absorb_below = sol.k_star;
    const Eigen::VectorXd& p = env.offers.probs;
    for (int k = sol.k_star; k < K; ++k) {
        const double lam = env.lambda(sol.a_opt[k]);
        if (lam == 0.0 || !sol.continue_mask[k]) continue;
        double P = 0.0;
        for (int j = 0; j < K; ++j) {
            if (sol.V[j] > sol.V[k] && p[j] > 0.0) {
                f.j2j_target(k, j) = p[j];
                P += p[j];
            }
        }
        if (P > 0.0) {
            f.j2j_target.row(k) /= P;
            f.j2j_out[k] = lam * P;
        }
    }
    return f;
}

} // namespace wagemfg
