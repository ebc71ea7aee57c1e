#include "wagemfg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "wagemfg/errors.hpp"

namespace wagemfg {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw ConfigError("csv row width does not match the header");
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    rows_.push_back(std::move(line));
}

void CsvTable::add_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double x : cells) s.push_back(fmt(x));
    add_row(s);
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const std::string& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void prepare_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
    const auto probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
}

CsvTable density_csv(const StationaryDensity& d) {
    CsvTable t({"z", "m"});
    for (int k = 0; k < d.grid.K; ++k) t.add_row(std::vector<double>{d.grid.nodes[k], d.m[k]});
    return t;
}

CsvTable value_csv(const WorkerEnv& env, const WorkerSolution& sol) {
    CsvTable t({"z", "V", "obstacle", "a_opt", "continue", "wage"});
    for (int k = 0; k < env.grid.K; ++k) {
        t.add_row({fmt(env.grid.nodes[k]), fmt(sol.V[k]), fmt(env.obstacle()), fmt(sol.a_opt[k]),
                   sol.continue_mask[k] ? "1" : "0", fmt(env.wage[k])});
    }
    return t;
}

CsvTable trace_csv(const std::vector<TraceRecord>& trace) {
    CsvTable t({"iter", "dm", "dw", "mean_z", "z_star", "var_logw"});
    for (const TraceRecord& r : trace) {
        t.add_row({std::to_string(r.iter), fmt(r.dm), fmt(r.dw), fmt(r.mean_z), fmt(r.z_star),
                   fmt(r.var_logw)});
    }
    return t;
}

CsvTable scalars_csv(const std::vector<std::pair<std::string, double>>& scalars) {
    CsvTable t({"name", "value"});
    for (const auto& [name, value] : scalars) t.add_row({name, fmt(value)});
    return t;
}

CsvTable hazard_csv(const std::vector<HazardBin>& bins) {
    CsvTable t({"lo", "hi", "exposure", "events", "rate"});
    for (const HazardBin& b : bins) {
        t.add_row({fmt(b.lo), fmt(b.hi), fmt(b.exposure), std::to_string(b.events), fmt(b.rate)});
    }
    return t;
}

CsvTable var_by_tenure_csv(const std::vector<TenureVariance>& bins) {
    CsvTable t({"lo", "hi", "var", "var_with_noise", "count", "low_confidence"});
    for (const TenureVariance& b : bins) {
        t.add_row({fmt(b.lo), fmt(b.hi), fmt(b.var), fmt(b.var_with_noise), std::to_string(b.count),
                   b.low_confidence ? "1" : "0"});
    }
    return t;
}

CsvTable decomposition_csv(const DecompositionTable& d) {
    CsvTable t({"bin", "var_sel", "var_sel_search", "var_full"});
    for (const DecompositionRow& r : d.rows) {
        t.add_row({fmt(r.lo) + "-" + fmt(r.hi), fmt(r.var_sel), fmt(r.var_sel_search), fmt(r.var_full)});
    }
    return t;
}

CsvTable sweep_csv(const SweepResult& s) {
    CsvTable t({"value", "z_star", "var_logw", "j2j", "mean_w", "converged"});
    for (const SweepPoint& p : s.points) {
        if (p.converged) {
            t.add_row({fmt(p.value), fmt(p.z_star), fmt(p.var_logw), fmt(p.j2j), fmt(p.mean_w), "1"});
        } else {
            t.add_row({fmt(p.value), "nan", "nan", "nan", "nan", "0"});
        }
    }
    return t;
}

CsvTable benchmark_csv(const std::vector<CurvePoint>& curve) {
    CsvTable t({"t", "cdf", "hazard"});
    for (const CurvePoint& c : curve) t.add_row(std::vector<double>{c.t, c.cdf, c.hazard});
    return t;
}

CsvTable wage_tenure_csv(const Panel& panel) {
    std::map<long, std::pair<double, long>> cells;
    for (const SpellRecord& r : panel.records) {
        for (const WageSample& s : r.wage_path) {
            auto& c = cells[static_cast<long>(std::floor(s.tenure))];
            c.first += s.wage;
            ++c.second;
        }
    }
    CsvTable t({"tenure", "mean_wage", "count"});
    for (const auto& [year, c] : cells) {
        t.add_row({fmt(year + 0.5), fmt(c.first / c.second), std::to_string(c.second)});
    }
    return t;
}

CsvTable density_by_age_csv(const Panel& panel, const std::vector<double>& edges) {
    if (edges.size() < 2) throw ConfigError("density by age needs at least one bin");
    const Grid& g = panel.grid;
    const std::size_t nb = edges.size() - 1;
    std::vector<std::vector<double>> h(nb, std::vector<double>(g.K, 0.0));
    std::vector<long> n(nb, 0);
    for (const SpellRecord& r : panel.records) {
        for (const WageSample& s : r.wage_path) {
            for (std::size_t b = 0; b < nb; ++b) {
                if (s.tenure >= edges[b] && s.tenure < edges[b + 1]) {
                    h[b][g.nearest_index(s.z)] += 1.0;
                    ++n[b];
                    break;
                }
            }
        }
    }
    std::vector<std::string> header = {"z"};
    for (std::size_t b = 0; b < nb; ++b) header.push_back("age_" + fmt(edges[b]) + "_" + fmt(edges[b + 1]));
    CsvTable t(header);
    for (int k = 0; k < g.K; ++k) {
        std::vector<double> row = {g.nodes[k]};
        for (std::size_t b = 0; b < nb; ++b) row.push_back(n[b] ? h[b][k] / (n[b] * g.dz) : 0.0);
        t.add_row(row);
    }
    return t;
}

nlohmann::ordered_json provenance(const RunConfig& cfg, const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = cfg.path;
    j["config_hash"] = cfg.hash;
    j["seed"] = cfg.sim.seed;
    j["version"] = WAGEMFG_VERSION;
    return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace wagemfg
