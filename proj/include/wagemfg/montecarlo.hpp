#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "wagemfg/grid.hpp"
#include "wagemfg/hjb.hpp"
#include "wagemfg/model.hpp"

namespace wagemfg {

/// Philox4x32-10 counter-based generator. The stream for (key, stream id) is
/// a pure function of those two numbers, so spells can be simulated in any
/// order on any number of threads.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox(std::uint64_t key, std::uint64_t stream);

    static Block round10(Block ctr, std::array<std::uint32_t, 2> key);

    std::uint32_t next_u32();
    /// Uniform on (0, 1), 53 bits.
    double uniform();
    /// Standard normal by Box-Muller.
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Block buf_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SimConfig {
    long n_spells = 10000;
    double dt_sim = 1.0 / 12.0;
    std::uint64_t seed = 20240101;
    double max_years = 200.0;
    bool bridge_correction = true;  // Brownian-bridge barrier crossing inside a step
    bool split_on_j2j = false;      // a job-to-job move closes the record and opens a new one
    double snapshot_interval = 1.0;
    int threads = 0;                // 0: WAGEMFG_THREADS or hardware concurrency

    void validate() const;
};

enum class EndReason { Boundary, J2J, Censored };

struct WageSample {
    double tenure;
    double wage;
    double z;
};

struct SpellRecord {
    long spell = 0;
    double duration = 0.0;
    bool censored = false;
    int j2j_moves = 0;
    EndReason end_reason = EndReason::Censored;
    std::vector<WageSample> wage_path;
};

/// Everything a simulated worker needs: the value ranking for offer
/// acceptance, arrival rates, wages and the separation barrier.
struct SimPolicy {
    Grid grid;
    SurplusCoeffs coeffs;
    Eigen::VectorXd V;
    Eigen::VectorXd lambda;  // arrival rate at each node under the optimal action
    Eigen::VectorXd wage;
    OfferKernel offers;
    double z0 = 0.0;
    bool has_barrier = false;
    double barrier = 0.0;    // separation when z falls to or below this level

    void validate() const;
};

/// The barrier sits at the last stopping node, where the interpolated value
/// first meets the obstacle. That is the absorbing node of the forward equation.
SimPolicy make_sim_policy(const WorkerEnv& env, const WorkerSolution& sol);

struct Panel {
    std::vector<SpellRecord> records;
    std::vector<std::uint64_t> occupancy;  // simulation steps spent in each grid cell
    double dt = 0.0;
    double max_years = 0.0;
    Grid grid;

    double spell_years() const;
};

Panel simulate_panel(const SimPolicy& policy, const SimConfig& sc);

/// Occupation-time histogram normalised to unit mass on the grid cells.
Eigen::VectorXd occupation_density(const Panel& panel);

/// Fraction of spells that ended at the barrier by time t.
double hitting_fraction(const Panel& panel, double t);

struct HazardBin {
    double lo = 0.0;
    double hi = 0.0;
    double exposure = 0.0;
    long events = 0;
    double rate = 0.0;
    bool missing = false;  // no exposure in this bin
};

/// Barrier separations per person-year at risk, by tenure bin.
std::vector<HazardBin> empirical_hazard(const Panel& panel, const std::vector<double>& edges);

struct TenureVariance {
    double lo = 0.0;
    double hi = 0.0;
    double var = 0.0;             // cross-sectional Var(log w)
    double var_with_noise = 0.0;  // plus the transitory measurement variance
    long count = 0;
    bool low_confidence = false;  // fewer than 30 observations
};

std::vector<TenureVariance> variance_by_tenure(const Panel& panel, const std::vector<double>& edges,
                                               double sigma_u2);

/// Job-to-job moves per person-year.
double j2j_rate(const Panel& panel);

/// Thread count from WAGEMFG_THREADS, else the hardware concurrency.
int default_threads();

} // namespace wagemfg
