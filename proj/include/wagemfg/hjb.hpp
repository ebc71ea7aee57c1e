#pragma once

#include <vector>

#include <Eigen/Core>

#include "wagemfg/grid.hpp"
#include "wagemfg/model.hpp"

namespace wagemfg {

/// Distribution from which on-the-job offers are drawn, stored as node
/// probabilities (nu_j * dz) that sum to one.
struct OfferKernel {
    enum class Kind { PointMass, Density };

    Kind kind = Kind::PointMass;
    Eigen::VectorXd probs;

    /// Single atom at the node nearest to z.
    static OfferKernel point_mass(const Grid& g, double z);

    /// Density m restricted to the nodes where `active` is true, renormalised.
    /// Falls back to the unrestricted density when the restriction carries no mass.
    static OfferKernel from_density(const Eigen::VectorXd& m, const Grid& g,
                                    const std::vector<bool>& active = {});
};

/// Everything the worker takes as given when solving the obstacle problem.
struct WorkerEnv {
    Grid grid;
    ActionGrid actions;
    SurplusCoeffs coeffs;
    Eigen::VectorXd wage;
    double VU = 0.0;
    double F = 0.0;
    OfferKernel offers;
    ModelParams params;
    bool search_enabled = true;  // false forces lambda = 0

    double obstacle() const { return VU - F; }
    double lambda(double a) const;
    void validate() const;
};

struct WorkerSolution {
    Eigen::VectorXd V;
    Eigen::VectorXd a_opt;
    std::vector<bool> continue_mask;
    int k_star = 0;        // first continuation node, K when stopping everywhere
    int iterations = 0;
    double residual = 0.0; // sup-norm complementarity residual at exit
};

/// Expected capital gain per unit arrival rate, for every node:
/// sum_j max(V_j - V_k, 0) * probs_j. Offers that tie the current value are rejected.
Eigen::VectorXd offer_gain_per_arrival(const Eigen::VectorXd& V, const OfferKernel& offers);

/// lambda(a) * sum_j max(V_j - V_k, 0) * nu_j * dz.
double offer_gain(int k, const Eigen::VectorXd& V, const WorkerEnv& env, double a);

/// Sup-norm of min{ rV - max_a H_a(V), V - (VU - F) } with the nonlocal offer term
/// evaluated exactly.
double hjb_residual(const WorkerEnv& env, const Eigen::VectorXd& V);

/// Howard policy iteration on (stop/continue, action, offer acceptance set)
/// with a direct solve of each policy-evaluation system.
WorkerSolution solve_obstacle_pi(const WorkerEnv& env, double tol = 1e-10, int max_iter = 500);

/// Damped backward-Euler value iteration started from the obstacle.
/// The diagonal of the generator and of the offer outflow is taken implicitly,
/// so any dt > 0 is stable; dt -> infinity with theta = 1 is a Jacobi sweep.
/// When `change_trace` is given it receives the sup-norm change of every step.
WorkerSolution solve_obstacle_vi(const WorkerEnv& env, double dt, double theta,
                                 double tol = 1e-9, int max_iter = 200000,
                                 std::vector<double>* change_trace = nullptr);

/// Location of the discrete free boundary.
struct FreeBoundary {
    double z_star = 0.0;
    int k_star = 0;
    bool truncated = false;  // continuation already at z_min: the grid starts too high
};

/// Throws DomainError when the solution stops everywhere.
FreeBoundary free_boundary(const WorkerSolution& sol, const Grid& g);

/// |V[k*+1] - V[k*]| / dz, the discrete slope that smooth fit sets to zero.
double smooth_fit_residual(const WorkerSolution& sol, const Grid& g);

/// Builds continue_mask, k_star and the argmax policy for a given value vector.
WorkerSolution finalize_solution(const WorkerEnv& env, Eigen::VectorXd V, int iterations);

} // namespace wagemfg
