#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wagemfg/equilibrium.hpp"
#include "wagemfg/montecarlo.hpp"

namespace wagemfg {

/// Tenure bins {0-1, 1-3, 3-7, 7-15, 15-30} years.
std::vector<double> default_tenure_edges();

struct DecompositionRow {
    double lo = 0.0;
    double hi = 0.0;
    double var_sel = 0.0;
    double var_sel_search = 0.0;
    double var_full = 0.0;
    std::array<long, 3> count{};
    bool signs_agree = true;  // orderings reproduced by the cross-check panel
};

/// Within-bin Var(log w) for the three economies. Tenure is measured from the
/// start of the spell out of unemployment unless the simulation config splits
/// records at job-to-job moves.
struct DecompositionTable {
    std::vector<DecompositionRow> rows;
    std::array<double, 3> z_star{};
    std::array<double, 3> stationary_var{};
    std::array<int, 3> iterations{};
    std::uint64_t check_seed = 0;

    bool all_signs_agree() const;
};

/// Solves SEL, SEL_SEARCH and FULL on the same diffusion and simulates each from
/// its own policies with a shared seed. A second panel drawn with `check_seed`
/// must reproduce the sign of Var_full - Var_sel and Var_sel - Var_sel_search
/// in every bin. Any mode failing to converge aborts with the solver's error.
DecompositionTable run_decomposition(const ModelParams& p, const Numerics& num,
                                     const SimConfig& sc, const std::vector<double>& edges);

enum class Lever { FiringCost, SearchSubsidy, VolMultiplier };

const char* lever_name(Lever lever);
/// Accepts firing_cost, search_subsidy, vol_multiplier. Throws ConfigError otherwise.
Lever parse_lever(const std::string& name);

/// Copy of p with the lever set to value.
ModelParams with_lever(ModelParams p, Lever lever, double value);
double lever_value(const ModelParams& p, Lever lever);

struct SweepPoint {
    double value = 0.0;
    bool converged = false;
    std::string error;
    double z_star = 0.0;
    double var_logw = 0.0;
    double j2j = 0.0;
    double mean_w = 0.0;
    int iterations = 0;
};

struct SweepResult {
    Lever lever = Lever::FiringCost;
    double baseline_value = 0.0;
    std::vector<SweepPoint> points;

    bool partial() const;
    /// sign = -1 checks weakly decreasing, +1 weakly increasing, over converged points.
    bool z_star_monotone(int sign) const;
    bool j2j_monotone(int sign, double tol = 1e-12) const;
    const SweepPoint& baseline() const;
};

/// Aggregate job-to-job moves per worker-year under the stationary density.
double stationary_j2j_rate(const EquilibriumResult& eq);

/// One FULL equilibrium per value, solved concurrently. Values must be strictly
/// ascending and contain the lever's value in p. Non-converged points are kept
/// with their error message.
SweepResult run_policy_sweep(const ModelParams& p, const Numerics& num, Lever lever,
                             const std::vector<double>& values,
                             CounterfactualMode mode = CounterfactualMode::Full);

/// (m - target)' diag(w) (m - target).
double moment_distance(const std::vector<double>& model, const std::vector<double>& target,
                       const std::vector<double>& weights);

struct CalibrationMoments {
    double never_end = 0.0;    // analytic survival to the retirement horizon
    double hazard_peak = 0.0;  // tenure (years) of the highest simulated hazard bin
    double wage_growth = 0.0;  // mean annual within-record log wage change
    double j2j = 0.0;          // simulated job-to-job moves per year

    std::vector<double> as_vector() const { return {never_end, hazard_peak, wage_growth, j2j}; }
};

/// Hazard bins used for the peak moment: half years to 3, then widening.
std::vector<double> default_hazard_edges();

CalibrationMoments calibration_moments(const EquilibriumResult& eq, const Panel& panel,
                                       double T_ret = 40.0);

} // namespace wagemfg
