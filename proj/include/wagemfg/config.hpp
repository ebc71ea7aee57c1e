#pragma once

#include <string>
#include <vector>

#include "wagemfg/equilibrium.hpp"
#include "wagemfg/montecarlo.hpp"

namespace wagemfg {

struct ExperimentSettings {
    std::vector<double> tenure_edges = {0.0, 1.0, 3.0, 7.0, 15.0, 30.0};
    std::vector<double> firing_cost = {0.0, 0.05, 0.1, 0.2};
    std::vector<double> search_subsidy = {0.0, 0.25, 0.5, 0.75};
    std::vector<double> vol_multiplier = {0.8, 0.9, 1.0, 1.1, 1.25};
    double retirement_years = 40.0;
    std::string targets;  // path to the calibration targets, relative to the config file
};

/// One file fully determines a run. `hash` is the SHA-1 of the file bytes.
struct RunConfig {
    ModelParams params;
    Numerics numerics;
    SimConfig sim;
    ExperimentSettings experiments;
    CounterfactualMode mode = CounterfactualMode::Full;
    std::string path;
    std::string hash;
};

/// INI text with sections [diffusion] [wage] [search] [policy] [numerics]
/// [simulation] [experiments]. Absent keys keep their defaults; unknown
/// sections or keys and malformed values throw ConfigError.
RunConfig parse_config(const std::string& text);

/// Reads and parses a file. IoError when it cannot be read.
RunConfig load_config(const std::string& path);

struct MomentTargets {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> weights;
};

/// [targets] and [weights] sections keyed by never_end, hazard_peak_years,
/// wage_growth_annual, j2j_annual.
MomentTargets load_targets(const std::string& path);

std::string sha1_hex(const std::string& bytes);

/// Comma separated list of reals.
std::vector<double> parse_real_list(const std::string& text);

} // namespace wagemfg
