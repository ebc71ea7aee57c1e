#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wagemfg/benchmark.hpp"
#include "wagemfg/config.hpp"
#include "wagemfg/equilibrium.hpp"
#include "wagemfg/experiments.hpp"
#include "wagemfg/montecarlo.hpp"

namespace wagemfg {

/// 17 significant digits, so every double round-trips.
std::string fmt(double x);

/// Header plus rows, comma separated, newline terminated.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& cells);
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

/// IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Creates the directory if needed and checks that it is writable.
void prepare_output_dir(const std::filesystem::path& dir);

// z, m
CsvTable density_csv(const StationaryDensity& d);
// z, V, obstacle, a_opt, continue, wage
CsvTable value_csv(const WorkerEnv& env, const WorkerSolution& sol);
// iter, dm, dw, mean_z, z_star, var_logw
CsvTable trace_csv(const std::vector<TraceRecord>& trace);
// name, value
CsvTable scalars_csv(const std::vector<std::pair<std::string, double>>& scalars);
// lo, hi, exposure, events, rate
CsvTable hazard_csv(const std::vector<HazardBin>& bins);
// lo, hi, var, var_with_noise, count, low_confidence
CsvTable var_by_tenure_csv(const std::vector<TenureVariance>& bins);
// bin, var_sel, var_sel_search, var_full
CsvTable decomposition_csv(const DecompositionTable& t);
// value, z_star, var_logw, j2j, mean_w, converged
CsvTable sweep_csv(const SweepResult& s);
// t, cdf, hazard
CsvTable benchmark_csv(const std::vector<CurvePoint>& curve);
// tenure, mean_wage, count  (annual tenure cells)
CsvTable wage_tenure_csv(const Panel& panel);
// z, then one density column per tenure bin
CsvTable density_by_age_csv(const Panel& panel, const std::vector<double>& edges);

/// Config hash, seed and version, attached to every run summary.
nlohmann::ordered_json provenance(const RunConfig& cfg, const std::string& command);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

} // namespace wagemfg
