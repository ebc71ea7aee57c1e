#pragma once

#include <Eigen/Core>

#include "wagemfg/grid.hpp"
#include "wagemfg/hjb.hpp"

namespace wagemfg {

/// Coefficients of the stationary forward equation on the surplus grid.
struct FlowSpec {
    Eigen::VectorXd drift;
    Eigen::VectorXd vol2;
    Eigen::VectorXd kill;        // Poisson separation intensity q_k
    Eigen::VectorXd entry;       // inflow density Gamma_k (mass per unit time per unit z)
    Eigen::VectorXd j2j_out;     // job-to-job outflow rate at k
    Eigen::MatrixXd j2j_target;  // row k: where movers out of k land (probabilities)
    int absorb_below = 0;        // nodes k < absorb_below carry no mass

    void validate(const Grid& g) const;
};

/// Dense system A m = rhs. `op` is the flux operator before the absorbing and
/// normalisation rows are substituted, kept for residual checks.
struct FluxSystem {
    Grid grid;
    Eigen::MatrixXd A;
    Eigen::VectorXd rhs;
    Eigen::MatrixXd op;
    Eigen::VectorXd source;
    int absorb_below = 0;
    bool normalization_row = false;
};

struct StationaryDensity {
    Grid grid;
    Eigen::VectorXd m;
    double entry_flow = 0.0;  // total entry after normalising the mass to one

    double mass() const { return m.sum() * grid.dz; }
};

/// Conservative finite-volume form with arithmetic cell-edge averages and
/// no-flux ends:
///   J_{k+1/2} = mean(mu) * mean(m) - (vol2_{k+1} m_{k+1} - vol2_k m_k) / (2 dz).
FluxSystem assemble_flux_system(const FlowSpec& flow, const Grid& g);

/// Solves and renormalises to unit mass. Throws LinearSolveError when the flow
/// is degenerate (entry without any sink, or a sink without entry) and
/// DomainError when the solution is materially negative.
StationaryDensity solve_stationary(const FluxSystem& sys);

/// Sup-norm residual of the flux equations on the active rows, relative to the
/// largest term.
double flux_residual(const FluxSystem& sys, const StationaryDensity& d);

/// Outflow through the edge below k_star plus Poisson separations.
double separation_flux(const StationaryDensity& d, const FlowSpec& flow, int k_star);

/// Single entry atom at the node nearest z0, carrying `rate` units of mass per year.
Eigen::VectorXd point_entry(const Grid& g, double z0, double rate);

/// Flow induced by a solved worker problem: surplus diffusion, boundary
/// absorption below k_star, value-ranked job-to-job moves under the offer kernel.
FlowSpec flow_from_worker(const WorkerEnv& env, const WorkerSolution& sol,
                          const Eigen::VectorXd& kill = Eigen::VectorXd());

} // namespace wagemfg
