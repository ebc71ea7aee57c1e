#pragma once

#include <string>
#include <vector>

#include "wagemfg/config.hpp"

namespace wagemfg {

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// L1 distance sum |m - h| dz between the forward-equation density and the
/// simulated occupation histogram of the same policies.
double fp_mc_l1(const EquilibriumResult& eq, const SimConfig& sc);

/// Mass in the outer 5% of nodes on each side.
double tail_mass(const StationaryDensity& d);

/// True when the continuation set is exactly {k >= k_star}.
bool continuation_is_upper_interval(const WorkerSolution& sol);

/// Worker problem of `eq` re-solved on a grid with K nodes, outside value held fixed.
WorkerSolution resolve_on_grid(const EquilibriumResult& eq, const Numerics& num, int K);

/// Numerical checks on the configured equilibrium: mass conservation,
/// positivity, PI against VI, forward equation against simulation, interior
/// free boundary, tail mass, upper-interval continuation, grid refinement and
/// first-order smooth fit.
std::vector<Check> run_diagnostics(const RunConfig& cfg);

} // namespace wagemfg
