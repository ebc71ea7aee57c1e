#pragma once

#include <vector>

#include <Eigen/Core>

#include "wagemfg/grid.hpp"
#include "wagemfg/hjb.hpp"
#include "wagemfg/kolmogorov.hpp"
#include "wagemfg/model.hpp"

namespace wagemfg {

/// SEL: no on-the-job search, exogenous sharing wage and outside value.
/// SEL_SEARCH: optimal search on, same exogenous wage and outside value.
/// FULL: affine equilibrium wage with the outside value solved jointly.
enum class CounterfactualMode { Sel, SelSearch, Full };

enum class OfferMode { StationaryDensity, PointMass };

enum class InitialDensity { Uniform, EntryBump };

struct Numerics {
    double z_min = -1.0;
    double z_max = 3.0;
    int K = 400;
    double a_max = 2.0;
    int n_actions = 41;

    double omega = 0.5;
    double eps_m = 1e-8;
    double eps_w = 1e-8;
    int max_outer = 1000;
    int oscillation_window = 50;

    double pi_tol = 1e-10;
    int pi_max_iter = 500;
    double vi_tol = 1e-9;
    int vi_max_iter = 200000;
    double vi_dt = 1e30;
    double vi_theta = 1.0;

    OfferMode offers = OfferMode::StationaryDensity;
    double kill_rate = 0.0;  // Poisson separation intensity, zero = pure absorption

    void validate() const;
};

struct TraceRecord {
    int iter = 0;
    double dm = 0.0;
    double dw = 0.0;
    double mean_z = 0.0;
    double z_star = 0.0;
    double var_logw = 0.0;
};

struct EquilibriumResult {
    CounterfactualMode mode = CounterfactualMode::Full;
    StationaryDensity m_star;
    WorkerSolution worker;
    WorkerEnv env;  // environment the final worker solution was computed against
    FlowSpec flow;
    Eigen::VectorXd wage;
    double VU = 0.0;
    double z_star = 0.0;
    int k_star = 0;
    int iterations = 0;
    std::vector<TraceRecord> trace;
    double posthoc_dm = 0.0;
    double posthoc_dw = 0.0;
    double outside_residual = 0.0;
};

/// Outside value VU solving r VU = b + lambdaU * sum_j max(V_j - VU, 0) probs_j by bisection.
double outside_value(const Eigen::VectorXd& V, const OfferKernel& offers, const ModelParams& p);
double outside_value(const Eigen::VectorXd& V, const StationaryDensity& m, const ModelParams& p);

/// Residual of the defining equation of the outside value.
double outside_value_residual(double VU, const Eigen::VectorXd& V, const OfferKernel& offers,
                              const ModelParams& p);

/// Wage variance under the density: sum (w - wbar)^2 m dz.
double dispersion(const StationaryDensity& m, const Eigen::VectorXd& wage);
double mean_wage(const StationaryDensity& m, const Eigen::VectorXd& wage);

Eigen::VectorXd initial_density(const Grid& g, double z0, InitialDensity kind);

/// Grid, action set and worker environment for given primitives.
WorkerEnv make_worker_env(const ModelParams& p, const Numerics& num, CounterfactualMode mode,
                          double VU, const OfferKernel& offers);

/// Damped fixed point on (density, outside value). Throws IterationLimitError
/// on hitting max_outer, on detected oscillation, or when the post hoc
/// consistency pass moves the solution by more than ten times the tolerances.
EquilibriumResult solve_equilibrium(const ModelParams& p, const Numerics& num,
                                    const Eigen::VectorXd& m0, CounterfactualMode mode);

EquilibriumResult solve_equilibrium(const ModelParams& p, const Numerics& num,
                                    CounterfactualMode mode,
                                    InitialDensity init = InitialDensity::EntryBump);

const char* mode_name(CounterfactualMode mode);

} // namespace wagemfg
