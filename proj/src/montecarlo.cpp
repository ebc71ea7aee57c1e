#include "wagemfg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

double interp(const Grid& g, const Eigen::VectorXd& f, double z) {
    const double t = (z - g.z_min) / g.dz;
    if (t <= 0.0) return f[0];
    if (t >= g.K - 1) return f[g.K - 1];
    const int k = static_cast<int>(t);
    const double w = t - k;
    return (1.0 - w) * f[k] + w * f[k + 1];
}

int cell_of(const Grid& g, double z) {
    return std::clamp(static_cast<int>(std::floor((z - g.z_min) / g.dz + 0.5)), 0, g.K - 1);
}

struct Chunk {
    std::vector<SpellRecord> records;
    std::vector<std::uint64_t> occupancy;
};

class SpellSimulator {
public:
    SpellSimulator(const SimPolicy& pol, const SimConfig& sc)
        : pol_(pol), sc_(sc), sqdt_(std::sqrt(sc.dt_sim)),
          s2_(pol.coeffs.sigma_Z * pol.coeffs.sigma_Z) {
        cdf_.resize(pol.offers.probs.size());
        double acc = 0.0;
        for (Eigen::Index j = 0; j < pol.offers.probs.size(); ++j) {
            acc += pol.offers.probs[j];
            cdf_[j] = acc;
        }
    }

    void run(long spell, Chunk& out) const {
        // diffusion shocks and event draws use separate streams, and every step
        // consumes the same number of event draws, so two policies simulated
        // with one seed share their Brownian paths
        Philox noise(sc_.seed, 2 * static_cast<std::uint64_t>(spell));
        Philox rng(sc_.seed, 2 * static_cast<std::uint64_t>(spell) + 1);
        const Grid& g = pol_.grid;
        const double dt = sc_.dt_sim;
        const long n_steps = static_cast<long>(std::llround(sc_.max_years / dt));

        SpellRecord rec;
        rec.spell = spell;
        double z = pol_.z0;
        double t0 = 0.0;  // start of the current record
        double next_snap = rng.uniform() * sc_.snapshot_interval;
        bool done = false;
        for (long step = 0; step < n_steps && !done; ++step) {
            const double t = step * dt;
            while (next_snap <= t - t0 + 1e-12) {
                rec.wage_path.push_back({next_snap, interp(g, pol_.wage, z), z});
                next_snap += sc_.snapshot_interval;
            }

            const double z_prev = z;
            z += pol_.coeffs.mu_Z * dt + pol_.coeffs.sigma_Z * sqdt_ * noise.normal();
            if (z > g.z_max) z = 2.0 * g.z_max - z;
            if (!pol_.has_barrier && z < g.z_min) z = 2.0 * g.z_min - z;
            const double t_end = t + dt;

            if (pol_.has_barrier) {
                const double u_cross = rng.uniform();
                bool hit = z <= pol_.barrier;
                if (!hit && sc_.bridge_correction) {
                    const double p_cross = std::exp(-2.0 * (z_prev - pol_.barrier) *
                                                    (z - pol_.barrier) / (s2_ * dt));
                    hit = u_cross < p_cross;
                }
                if (hit) {
                    rec.duration = t_end - t0;
                    rec.end_reason = EndReason::Boundary;
                    done = true;
                    break;
                }
            }

            const double lam = interp(g, pol_.lambda, z_prev);
            const double u_arrive = rng.uniform();
            const double u_offer = rng.uniform();
            const double u_jitter = rng.uniform();
            if (lam > 0.0 && u_arrive < -std::expm1(-lam * dt)) {
                const double zo = draw_offer(u_offer, u_jitter);
                if (interp(g, pol_.V, zo) > interp(g, pol_.V, z)) {
                    z = zo;
                    ++rec.j2j_moves;
                    if (sc_.split_on_j2j) {
                        rec.duration = t_end - t0;
                        rec.end_reason = EndReason::J2J;
                        out.records.push_back(std::move(rec));
                        rec = SpellRecord{};
                        rec.spell = spell;
                        t0 = t_end;
                        next_snap = rng.uniform() * sc_.snapshot_interval;
                    }
                }
            }
            ++out.occupancy[cell_of(g, z)];
        }
        if (!done) {
            rec.duration = n_steps * dt - t0;
            rec.censored = true;
            rec.end_reason = EndReason::Censored;
        }
        out.records.push_back(std::move(rec));
    }

private:
    double draw_offer(double u_offer, double u_jitter) const {
        const Grid& g = pol_.grid;
        const double u = u_offer * cdf_.back();
        const int j = static_cast<int>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
        const int jj = std::min(j, g.K - 1);
        if (pol_.offers.kind == OfferKernel::Kind::PointMass) return g.nodes[jj];
        const double z = g.nodes[jj] + (u_jitter - 0.5) * g.dz;
        return std::clamp(z, g.z_min, g.z_max);
    }

    const SimPolicy& pol_;
    const SimConfig& sc_;
    double sqdt_;
    double s2_;
    std::vector<double> cdf_;
};

} // namespace

Philox::Philox(std::uint64_t key, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}, stream_(stream) {}

Philox::Block Philox::round10(Block ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint32_t Philox::next_u32() {
    if (used_ == 4) {
        const Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buf_ = round10(ctr, key_);
        ++block_;
        used_ = 0;
    }
    return buf_[used_++];
}

double Philox::uniform() {
    const std::uint64_t hi = next_u32() >> 5;  // 27 bits
    const std::uint64_t lo = next_u32() >> 6;  // 26 bits
    return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
}

double Philox::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
}

void SimConfig::validate() const {
    if (n_spells < 1) throw ConfigError("simulation needs at least one spell");
    if (!(dt_sim > 0.0) || dt_sim > 1.0 / 12.0 + 1e-15) {
        throw ConfigError("simulation step must lie in (0, 1/12] years");
    }
    if (!(max_years > 0.0)) throw ConfigError("max_years must be positive");
    if (!(snapshot_interval > 0.0)) throw ConfigError("snapshot interval must be positive");
    if (threads < 0) throw ConfigError("thread count must be nonnegative");
}

void SimPolicy::validate() const {
    const int K = grid.K;
    if (V.size() != K || lambda.size() != K || wage.size() != K || offers.probs.size() != K) {
        throw ConfigError("simulation policy does not match the grid");
    }
    if (!(coeffs.sigma_Z > 0.0)) throw ConfigError("simulation needs a positive volatility");
    if ((lambda.array() < 0.0).any()) throw ConfigError("arrival rates must be nonnegative");
}

SimPolicy make_sim_policy(const WorkerEnv& env, const WorkerSolution& sol) {
    if (sol.V.size() != env.grid.K) throw ConfigError("worker solution does not match the grid");
    SimPolicy pol;
    pol.grid = env.grid;
    pol.coeffs = env.coeffs;
    pol.V = sol.V;
    pol.wage = env.wage;
    pol.offers = env.offers;
    pol.z0 = env.params.z0;
    pol.lambda = Eigen::VectorXd::Zero(env.grid.K);
    for (int k = 0; k < env.grid.K; ++k) {
        if (sol.continue_mask[k]) pol.lambda[k] = env.lambda(sol.a_opt[k]);
    }
    if (sol.k_star > 0) {
        pol.has_barrier = true;
        pol.barrier = sol.k_star < env.grid.K ? env.grid.nodes[sol.k_star - 1] : env.grid.z_max;
    }
    return pol;
}

int default_threads() {
    if (const char* env = std::getenv("WAGEMFG_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

double Panel::spell_years() const {
    double total = 0.0;
    for (const SpellRecord& r : records) total += r.duration;
    return total;
}

Panel simulate_panel(const SimPolicy& policy, const SimConfig& sc) {
    sc.validate();
    policy.validate();
    const int n_threads = static_cast<int>(
        std::min<long>(sc.threads > 0 ? sc.threads : default_threads(), sc.n_spells));
    const SpellSimulator sim(policy, sc);

    // contiguous blocks of spells per thread, merged in spell order
    std::vector<Chunk> chunks(n_threads);
    std::vector<std::thread> pool;
    const long per = (sc.n_spells + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
        chunks[t].occupancy.assign(policy.grid.K, 0);
        const long lo = t * per, hi = std::min(sc.n_spells, lo + per);
        auto work = [&sim, &chunks, t, lo, hi] {
            for (long s = lo; s < hi; ++s) sim.run(s, chunks[t]);
        };
        if (n_threads == 1) work();
        else pool.emplace_back(work);
    }
    for (std::thread& th : pool) th.join();

    Panel panel;
    panel.dt = sc.dt_sim;
    panel.max_years = sc.max_years;
    panel.grid = policy.grid;
    panel.occupancy.assign(policy.grid.K, 0);
    for (Chunk& c : chunks) {
        for (int k = 0; k < policy.grid.K; ++k) panel.occupancy[k] += c.occupancy[k];
        std::move(c.records.begin(), c.records.end(), std::back_inserter(panel.records));
    }
    return panel;
}

Eigen::VectorXd occupation_density(const Panel& panel) {
    Eigen::VectorXd h(panel.grid.K);
    std::uint64_t total = 0;
    for (int k = 0; k < panel.grid.K; ++k) {
        h[k] = static_cast<double>(panel.occupancy[k]);
        total += panel.occupancy[k];
    }
    if (total == 0) throw DomainError("empty occupation histogram");
    return h / (static_cast<double>(total) * panel.grid.dz);
}

double hitting_fraction(const Panel& panel, double t) {
    if (panel.records.empty()) throw DomainError("empty panel");
    long hits = 0, spells = 0;
    long last = -1;
    // with split records the spell-level clock is the sum of record durations
    double elapsed = 0.0;
    for (const SpellRecord& r : panel.records) {
        if (r.spell != last) {
            ++spells;
            last = r.spell;
            elapsed = 0.0;
        }
        elapsed += r.duration;
        if (r.end_reason == EndReason::Boundary && elapsed <= t + 1e-9) ++hits;
    }
    return static_cast<double>(hits) / spells;
}

std::vector<HazardBin> empirical_hazard(const Panel& panel, const std::vector<double>& edges) {
    if (panel.records.empty()) throw DomainError("empty panel");
    if (edges.size() < 2) throw ConfigError("hazard needs at least one tenure bin");
    std::vector<HazardBin> bins(edges.size() - 1);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        bins[b].lo = edges[b];
        bins[b].hi = edges[b + 1];
    }
    for (const SpellRecord& r : panel.records) {
        for (HazardBin& bin : bins) {
            bin.exposure += std::clamp(r.duration - bin.lo, 0.0, bin.hi - bin.lo);
            if (r.end_reason == EndReason::Boundary && r.duration > bin.lo && r.duration <= bin.hi) {
                ++bin.events;
            }
        }
    }
    for (HazardBin& bin : bins) {
        bin.missing = !(bin.exposure > 0.0);
        bin.rate = bin.missing ? std::nan("") : bin.events / bin.exposure;
    }
    return bins;
}

std::vector<TenureVariance> variance_by_tenure(const Panel& panel, const std::vector<double>& edges,
                                               double sigma_u2) {
    if (edges.size() < 2) throw ConfigError("variance by tenure needs at least one bin");
    const std::size_t nb = edges.size() - 1;
    std::vector<double> sum(nb, 0.0), sum2(nb, 0.0);
    std::vector<long> n(nb, 0);
    // shift by a reference wage so the one-pass variance is well conditioned
    double ref = 0.0;
    for (const SpellRecord& r : panel.records) {
        if (!r.wage_path.empty()) {
            ref = r.wage_path.front().wage;
            break;
        }
    }
    for (const SpellRecord& r : panel.records) {
        for (const WageSample& s : r.wage_path) {
            for (std::size_t b = 0; b < nb; ++b) {
                if (s.tenure >= edges[b] && s.tenure < edges[b + 1]) {
                    const double w = s.wage - ref;
                    sum[b] += w;
                    sum2[b] += w * w;
                    ++n[b];
                    break;
                }
            }
        }
    }
    std::vector<TenureVariance> out(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        out[b].lo = edges[b];
        out[b].hi = edges[b + 1];
        out[b].count = n[b];
        out[b].low_confidence = n[b] < 30;
        if (n[b] > 0) {
            const double mean = sum[b] / n[b];
            out[b].var = std::max(0.0, sum2[b] / n[b] - mean * mean);
        } else {
            out[b].var = std::nan("");
        }
        out[b].var_with_noise = out[b].var + sigma_u2;
    }
    return out;
}

double j2j_rate(const Panel& panel) {
    if (panel.records.empty()) throw DomainError("empty panel");
    double years = 0.0;
    long moves = 0;
    for (const SpellRecord& r : panel.records) {
        years += r.duration;
        moves += r.j2j_moves;
    }
    return years > 0.0 ? moves / years : 0.0;
}

} // namespace wagemfg
