#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "wagemfg/benchmark.hpp"
#include "wagemfg/errors.hpp"
#include "wagemfg/montecarlo.hpp"

using namespace wagemfg;

namespace {

// Pure stopping problem: wage = z, no search, barrier below z0.
SimPolicy stopping_policy(double mu, double sigma, double z0, double barrier, double z_max = 6.0) {
    SimPolicy pol;
    pol.grid = build_grid(-2.0, z_max, 801);
    pol.coeffs = {mu, sigma};
    pol.V = pol.grid.nodes;
    pol.wage = pol.grid.nodes;
    pol.lambda = Eigen::VectorXd::Zero(pol.grid.K);
    pol.offers = OfferKernel::point_mass(pol.grid, z0);
    pol.z0 = z0;
    pol.has_barrier = true;
    pol.barrier = barrier;
    return pol;
}

SpellRecord record(long spell, double duration, EndReason why, std::vector<WageSample> path = {}) {
    SpellRecord r;
    r.spell = spell;
    r.duration = duration;
    r.end_reason = why;
    r.censored = why == EndReason::Censored;
    r.wage_path = std::move(path);
    return r;
}

} // namespace

TEST_CASE("philox known answers") {
    using B = Philox::Block;
    CHECK(Philox::round10(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox::round10(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox::round10(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams are reproducible and distinct") {
    Philox a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a.next_u32();
        CHECK(x == b.next_u32());
        differ_c |= x != c.next_u32();
        differ_d |= x != d.next_u32();
    }
    CHECK(differ_c);
    CHECK(differ_d);
}

TEST_CASE("uniform and normal moments") {
    Philox rng(11, 0);
    const int n = 400000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
    double lo = 1, hi = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        su += u;
        su2 += u * u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(su2 / n - 1.0 / 3) < 0.003);
    CHECK(std::abs(sn / n) < 4 / std::sqrt(double(n)));
    CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
    CHECK(std::abs(sn4 / n - 3.0) < 0.05);
}

TEST_CASE("hitting fractions match the inverse-Gaussian law") {
    const double mu = -0.015, sigma = 0.115, d = 0.25;
    const SimPolicy pol = stopping_policy(mu, sigma, 0.0, -d);
    SimConfig sc;
    sc.n_spells = 200000;
    sc.dt_sim = 1.0 / 52;
    sc.max_years = 20.0;
    sc.seed = 99;
    sc.threads = 1;
    const Panel panel = simulate_panel(pol, sc);
    const BenchmarkSpec spec{d, mu, sigma, 40.0};
    for (double t : {1.0, 5.0, 10.0, 20.0}) {
        const double p = hitting_cdf(t, spec);
        const double se = std::sqrt(p * (1 - p) / sc.n_spells);
        CHECK(std::abs(hitting_fraction(panel, t) - p) < 3 * se);
    }
}

TEST_CASE("upward drift with tiny noise never hits") {
    const SimPolicy pol = stopping_policy(0.05, 1e-6, 0.0, -0.5);
    SimConfig sc;
    sc.n_spells = 500;
    sc.max_years = 30.0;
    sc.threads = 1;
    const Panel panel = simulate_panel(pol, sc);
    for (const SpellRecord& r : panel.records) {
        CHECK(r.censored);
        CHECK(r.end_reason == EndReason::Censored);
        CHECK(r.duration == doctest::Approx(30.0));
    }
    CHECK(hitting_fraction(panel, 30.0) == 0.0);
}

TEST_CASE("panels do not depend on the thread count") {
    SimPolicy pol = stopping_policy(-0.01, 0.12, 0.0, -0.3);
    pol.lambda.setConstant(0.5);
    SimConfig sc;
    sc.n_spells = 3001;
    sc.max_years = 25.0;
    sc.seed = 5;
    sc.threads = 1;
    const Panel a = simulate_panel(pol, sc);
    for (int threads : {2, 3, 7}) {
        sc.threads = threads;
        const Panel b = simulate_panel(pol, sc);
        REQUIRE(a.records.size() == b.records.size());
        CHECK(a.occupancy == b.occupancy);
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            CHECK(a.records[i].duration == b.records[i].duration);
            CHECK(a.records[i].j2j_moves == b.records[i].j2j_moves);
            REQUIRE(a.records[i].wage_path.size() == b.records[i].wage_path.size());
            for (std::size_t j = 0; j < a.records[i].wage_path.size(); ++j) {
                CHECK(a.records[i].wage_path[j].wage == b.records[i].wage_path[j].wage);
            }
        }
    }
}

TEST_CASE("dominated offers are never accepted and leave the paths unchanged") {
    // upward drift keeps survivors above z0, where the offer is worth less
    SimPolicy quiet = stopping_policy(0.3, 0.05, 0.0, -0.5);
    SimPolicy busy = quiet;
    busy.lambda.setZero();
    for (int k = 0; k < busy.grid.K; ++k) {
        if (busy.grid.nodes[k] > 0.05) busy.lambda[k] = 2.0;
    }
    SimConfig sc;
    sc.n_spells = 400;
    sc.max_years = 10.0;
    sc.threads = 1;
    const Panel a = simulate_panel(quiet, sc);
    const Panel b = simulate_panel(busy, sc);
    CHECK(j2j_rate(b) == 0.0);
    CHECK(a.occupancy == b.occupancy);
}

TEST_CASE("job-to-job moves and record splitting") {
    // every node below z0 searches hard, so drifting workers jump back to z0
    SimPolicy pol = stopping_policy(-0.05, 0.1, 0.0, -1.5);
    for (int k = 0; k < pol.grid.K; ++k) {
        if (pol.grid.nodes[k] < 0.0) pol.lambda[k] = 3.0;
    }
    SimConfig sc;
    sc.n_spells = 300;
    sc.max_years = 20.0;
    sc.threads = 1;
    const Panel joined = simulate_panel(pol, sc);
    CHECK(j2j_rate(joined) > 0.1);
    CHECK(joined.records.size() == 300);

    sc.split_on_j2j = true;
    const Panel split = simulate_panel(pol, sc);
    CHECK(split.records.size() > 300);
    long moves = 0, j2j_ends = 0;
    for (const SpellRecord& r : split.records) {
        moves += r.j2j_moves;
        j2j_ends += r.end_reason == EndReason::J2J;
        CHECK(r.j2j_moves <= 1);
    }
    CHECK(moves == j2j_ends);
    // the spell-level clock is unchanged by splitting
    CHECK(split.spell_years() == doctest::Approx(joined.spell_years()).epsilon(0.05));
}

TEST_CASE("occupation density has unit mass") {
    const SimPolicy pol = stopping_policy(-0.01, 0.1, 0.0, -0.3);
    SimConfig sc;
    sc.n_spells = 2000;
    sc.max_years = 20.0;
    sc.threads = 1;
    const Panel panel = simulate_panel(pol, sc);
    const Eigen::VectorXd h = occupation_density(panel);
    CHECK(h.sum() * panel.grid.dz == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.minCoeff() >= 0.0);
}

TEST_CASE("hazard bins on a hand-built panel") {
    Panel p;
    p.records = {record(0, 0.5, EndReason::Boundary), record(1, 1.5, EndReason::Boundary),
                 record(2, 3.0, EndReason::Censored), record(3, 2.0, EndReason::J2J)};
    const auto h = empirical_hazard(p, {0.0, 1.0, 2.0, 4.0, 5.0});
    REQUIRE(h.size() == 4);
    // exposure: 0.5+1+1+1 ; 0.5+1+1 ; 1 ; 0
    CHECK(h[0].exposure == doctest::Approx(3.5));
    CHECK(h[0].events == 1);
    CHECK(h[0].rate == doctest::Approx(1 / 3.5));
    CHECK(h[1].exposure == doctest::Approx(2.5));
    CHECK(h[1].events == 1);
    CHECK(h[2].exposure == doctest::Approx(1.0));
    CHECK(h[2].events == 0);
    CHECK(h[3].missing);
    CHECK(std::isnan(h[3].rate));
}

TEST_CASE("variance by tenure on a hand-built panel") {
    Panel p;
    p.records = {record(0, 5, EndReason::Boundary, {{0.5, 1.0, 0}, {1.5, 2.0, 0}, {2.5, 4.0, 0}}),
                 record(1, 5, EndReason::Boundary, {{0.2, 3.0, 0}, {1.2, 2.0, 0}})};
    const auto v = variance_by_tenure(p, {0.0, 1.0, 2.0, 3.0}, 0.01);
    REQUIRE(v.size() == 3);
    CHECK(v[0].count == 2);
    CHECK(v[0].var == doctest::Approx(1.0));  // {1, 3}
    CHECK(v[1].var == doctest::Approx(0.0));  // {2, 2}
    CHECK(v[2].count == 1);
    CHECK(v[2].var == 0.0);
    CHECK(v[0].var_with_noise == doctest::Approx(1.01));
    CHECK(v[0].low_confidence);
}

TEST_CASE("policy built from a worker solution") {
    using testing_support::small_env;
    WorkerEnv env = small_env(61, -0.01, 0.1, 0.05);
    env.wage = (0.5 * env.grid.nodes.array() + 0.05).matrix();
    env.VU = 3.0;
    const WorkerSolution sol = solve_obstacle_pi(env);
    const SimPolicy pol = make_sim_policy(env, sol);
    REQUIRE(sol.k_star > 0);
    CHECK(pol.has_barrier);
    CHECK(pol.barrier == env.grid.nodes[sol.k_star - 1]);
    for (int k = 0; k < sol.k_star; ++k) CHECK(pol.lambda[k] == 0.0);
}

TEST_CASE("invalid simulation settings") {
    SimConfig sc;
    sc.dt_sim = 0.1;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = SimConfig{};
    sc.n_spells = 0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    SimPolicy pol = stopping_policy(0.0, 0.1, 0.0, -0.2);
    pol.lambda.resize(3);
    CHECK_THROWS_AS(simulate_panel(pol, SimConfig{}), ConfigError);
    CHECK_THROWS_AS(occupation_density(Panel{}), DomainError);
}
