#include "wagemfg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/uuid/detail/sha1.hpp>

#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_real(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("'" + key + "': expected a number, got '" + raw + "'");
    }
    return v;
}

long to_integer(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("'" + key + "': expected an integer, got '" + raw + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + raw + "'");
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;
using Section = std::map<std::string, Setter>;

Setter real(double& field) {
    return [&field](const std::string& k, const std::string& v) { field = to_real(k, v); };
}

Setter integer(int& field) {
    return [&field](const std::string& k, const std::string& v) {
        const long x = to_integer(k, v);
        if (x < -2147483647L || x > 2147483647L) throw ConfigError("'" + k + "' out of range");
        field = static_cast<int>(x);
    };
}

Setter list(std::vector<double>& field) {
    return [&field](const std::string& k, const std::string& v) {
        try {
            field = parse_real_list(v);
        } catch (const ConfigError& e) {
            throw ConfigError("'" + k + "': " + e.what());
        }
    };
}

std::map<std::string, Section> schema(RunConfig& c) {
    ModelParams& p = c.params;
    Numerics& n = c.numerics;
    SimConfig& s = c.sim;
    ExperimentSettings& e = c.experiments;
    return {
        {"diffusion",
         {{"r_annual", real(p.r)},
          {"mu_P_annual", real(p.mu_P)},
          {"mu_R_annual", real(p.mu_R)},
          {"sigma_P_annual", real(p.sigma_P)},
          {"sigma_R_annual", real(p.sigma_R)},
          {"rho", real(p.rho)},
          {"z0", real(p.z0)}}},
        {"wage",
         {{"gamma", real(p.gamma)},
          {"alpha", real(p.alpha)},
          {"sigma_u2", real(p.sigma_u2)},
          {"beta_w", real(p.beta_w)},
          {"R_ref", real(p.R_ref)},
          {"VU_exog", real(p.VU_exog)}}},
        {"search",
         {{"kappa", real(p.kappa)},
          {"eta", real(p.eta)},
          {"lambda0_annual", real(p.lambda0)},
          {"lambda_bar_annual", real(p.lambda_bar)},
          {"b_annual", real(p.b)},
          {"lambdaU_annual", real(p.lambdaU)},
          {"entry_rate_annual", real(p.entry_rate)}}},
        {"policy", {{"F", real(p.F)}, {"s", real(p.s)}, {"chi", real(p.chi)}}},
        {"numerics",
         {{"z_min", real(n.z_min)},
          {"z_max", real(n.z_max)},
          {"K", integer(n.K)},
          {"a_max", real(n.a_max)},
          {"n_actions", integer(n.n_actions)},
          {"omega", real(n.omega)},
          {"eps_m", real(n.eps_m)},
          {"eps_w", real(n.eps_w)},
          {"max_outer", integer(n.max_outer)},
          {"oscillation_window", integer(n.oscillation_window)},
          {"pi_tol", real(n.pi_tol)},
          {"pi_max_iter", integer(n.pi_max_iter)},
          {"vi_tol", real(n.vi_tol)},
          {"vi_max_iter", integer(n.vi_max_iter)},
          {"vi_dt_years", real(n.vi_dt)},
          {"vi_theta", real(n.vi_theta)},
          {"kill_rate_annual", real(n.kill_rate)},
          {"offers",
           [&n](const std::string& k, const std::string& v) {
               const std::string t = trim(v);
               if (t == "point_mass") n.offers = OfferMode::PointMass;
               else if (t == "stationary_density") n.offers = OfferMode::StationaryDensity;
               else throw ConfigError("'" + k + "': expected point_mass or stationary_density");
           }}}},
        {"simulation",
         {{"n_spells",
           [&s](const std::string& k, const std::string& v) { s.n_spells = to_integer(k, v); }},
          {"dt_years", real(s.dt_sim)},
          {"seed",
           [&s](const std::string& k, const std::string& v) {
               const std::string t = trim(v);
               unsigned long long x = 0;
               const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
               if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
                   throw ConfigError("'" + k + "': expected an unsigned integer");
               }
               s.seed = x;
           }},
          {"max_years", real(s.max_years)},
          {"bridge_correction",
           [&s](const std::string& k, const std::string& v) { s.bridge_correction = to_bool(k, v); }},
          {"split_on_j2j",
           [&s](const std::string& k, const std::string& v) { s.split_on_j2j = to_bool(k, v); }},
          {"snapshot_interval_years", real(s.snapshot_interval)},
          {"threads", integer(s.threads)}}},
        {"experiments",
         {{"tenure_edges_years", list(e.tenure_edges)},
          {"firing_cost_values", list(e.firing_cost)},
          {"search_subsidy_values", list(e.search_subsidy)},
          {"vol_multiplier_values", list(e.vol_multiplier)},
          {"retirement_years", real(e.retirement_years)},
          {"targets", [&e](const std::string&, const std::string& v) { e.targets = trim(v); }},
          {"mode",
           [&c](const std::string& k, const std::string& v) {
               const std::string t = trim(v);
               if (t == "sel") c.mode = CounterfactualMode::Sel;
               else if (t == "sel_search") c.mode = CounterfactualMode::SelSearch;
               else if (t == "full") c.mode = CounterfactualMode::Full;
               else throw ConfigError("'" + k + "': expected sel, sel_search or full");
           }}}},
    };
}

boost::property_tree::ptree read_ini_text(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    return tree;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real("list entry", item));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::string sha1_hex(const std::string& bytes) {
    boost::uuids::detail::sha1 h;
    h.process_bytes(bytes.data(), bytes.size());
    boost::uuids::detail::sha1::digest_type d;
    h.get_digest(d);
    std::string out;
    char buf[9];
    for (unsigned int word : d) {
        std::snprintf(buf, sizeof buf, "%08x", word);
        out += buf;
    }
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    c.numerics.offers = OfferMode::PointMass;
    const auto tree = read_ini_text(text);
    auto sections = schema(c);
    for (const auto& [name, body] : tree) {
        const auto sec = sections.find(name);
        if (sec == sections.end()) throw ConfigError("unknown config section [" + name + "]");
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + name + "' outside any section");
        }
        for (const auto& [key, node] : body) {
            const auto set = sec->second.find(key);
            if (set == sec->second.end()) {
                throw ConfigError("unknown key '" + key + "' in [" + name + "]");
            }
            set->second(key, node.data());
        }
    }
    c.params.validate();
    c.numerics.validate();
    c.sim.validate();
    if (!(c.experiments.retirement_years > 0.0)) throw ConfigError("retirement_years must be positive");
    c.hash = sha1_hex(text);
    return c;
}

RunConfig load_config(const std::string& path) {
    RunConfig c = parse_config(read_file(path));
    c.path = path;
    if (!c.experiments.targets.empty()) {
        const std::filesystem::path t(c.experiments.targets);
        if (t.is_relative()) {
            c.experiments.targets = (std::filesystem::path(path).parent_path() / t).string();
        }
    }
    return c;
}

MomentTargets load_targets(const std::string& path) {
    const auto tree = read_ini_text(read_file(path));
    const std::vector<std::string> names = {"never_end", "hazard_peak_years", "wage_growth_annual",
                                            "j2j_annual"};
    MomentTargets t;
    for (const auto& [name, body] : tree) {
        if (name != "targets" && name != "weights") {
            throw ConfigError("unknown section [" + name + "] in targets file");
        }
        for (const auto& [key, node] : body) {
            if (std::find(names.begin(), names.end(), key) == names.end()) {
                throw ConfigError("unknown moment '" + key + "' in targets file");
            }
        }
    }
    for (const std::string& n : names) {
        const auto v = tree.get_optional<std::string>("targets." + n);
        if (!v) throw ConfigError("targets file lacks '" + n + "'");
        t.names.push_back(n);
        t.values.push_back(to_real(n, *v));
        const auto w = tree.get_optional<std::string>("weights." + n);
        t.weights.push_back(w ? to_real(n, *w) : 1.0);
    }
    return t;
}

} // namespace wagemfg
