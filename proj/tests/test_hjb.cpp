#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "wagemfg/errors.hpp"
#include "wagemfg/hjb.hpp"

using namespace wagemfg;
using testing_support::small_env;

namespace {

// Projected Jacobi iteration written against the raw equations, with the
// offer sum evaluated by a double loop. Slow but independent of the library.
Eigen::VectorXd brute_force_values(const WorkerEnv& env, int sweeps) {
    const int K = env.grid.K;
    const double dz = env.grid.dz, mu = env.coeffs.mu_Z, s2 = env.coeffs.sigma_Z * env.coeffs.sigma_Z;
    const double r = env.params.r, g = env.VU - env.F;
    const double up = std::max(mu, 0.0) / dz + 0.5 * s2 / (dz * dz);
    const double dn = std::max(-mu, 0.0) / dz + 0.5 * s2 / (dz * dz);
    Eigen::VectorXd V = Eigen::VectorXd::Constant(K, g), W(K);
    for (int it = 0; it < sweeps; ++it) {
        for (int k = 0; k < K; ++k) {
            // reflecting ends: a ghost node equal to the boundary node
            const double vu = k + 1 < K ? V[k + 1] : V[k];
            const double vd = k > 0 ? V[k - 1] : V[k];
            const double a_up = k + 1 < K ? up : 0.0;
            const double a_dn = k > 0 ? dn : 0.0;
            double best = -1e300;
            for (int i = 0; i < env.actions.size(); ++i) {
                const double a = env.actions.values[i];
                const double lam = std::min(env.params.lambda0 * a, env.params.lambda_bar);
                const double cost = (1 - env.params.s) * env.params.kappa *
                                    std::pow(a, 1 + env.params.eta) / (1 + env.params.eta);
                double mass = 0.0, val = 0.0;
                for (int j = 0; j < K; ++j) {
                    if (V[j] > V[k]) {
                        mass += env.offers.probs[j];
                        val += env.offers.probs[j] * V[j];
                    }
                }
                const double num = env.wage[k] - cost + a_up * vu + a_dn * vd + lam * val;
                const double den = r + a_up + a_dn + lam * mass;
                best = std::max(best, num / den);
            }
            W[k] = std::max(best, g);
        }
        V = W;
    }
    return V;
}

// Free boundary of the continuous problem without search:
// V = (w0 + beta z)/r + beta mu / r^2 + A exp(rho z), value matching and smooth fit at z*.
double analytic_threshold(double w0, double beta, double mu, double sigma, double r, double g) {
    const double s2 = sigma * sigma;
    const double rho = (-mu - std::sqrt(mu * mu + 2 * s2 * r)) / s2;
    return (r * (g + beta / (r * rho)) - beta * mu / r - w0) / beta;
}

} // namespace

TEST_CASE("offer gain") {
    WorkerEnv env = small_env(11);
    env.offers = OfferKernel::point_mass(env.grid, env.grid.z_max);
    const Eigen::VectorXd V = env.grid.nodes.array().exp();
    for (int k = 0; k < 11; ++k) {
        CHECK(offer_gain(k, V, env, 0.0) == 0.0);
        CHECK(offer_gain(k, Eigen::VectorXd::Constant(11, 2.0), env, 1.5) == 0.0);
    }
    for (int k = 0; k < 10; ++k) {
        CHECK(offer_gain(k, V, env, 1.0) ==
              doctest::Approx(env.lambda(1.0) * (V[10] - V[k])).epsilon(1e-14));
    }
    CHECK(offer_gain(10, V, env, 1.0) == 0.0);

    // the vectorised version agrees with the direct sum for arbitrary V and kernels
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd m(11), W(11);
    for (int k = 0; k < 11; ++k) {
        m[k] = u(rng);
        W[k] = std::round(5 * u(rng));  // plenty of ties
    }
    env.offers = OfferKernel::from_density(m, env.grid);
    const Eigen::VectorXd G = offer_gain_per_arrival(W, env.offers);
    for (int k = 0; k < 11; ++k) {
        CHECK(G[k] * env.lambda(0.7) == doctest::Approx(offer_gain(k, W, env, 0.7)).epsilon(1e-13));
    }
}

TEST_CASE("offer kernel from a restricted density") {
    const Grid g = build_grid(0.0, 1.0, 5);
    Eigen::VectorXd m(5);
    m << 1, 1, 2, 0, 1;
    const OfferKernel k = OfferKernel::from_density(m, g, {false, true, true, true, true});
    CHECK(k.probs.sum() == doctest::Approx(1.0));
    CHECK(k.probs[0] == 0.0);
    CHECK(k.probs[2] == doctest::Approx(0.5));
    CHECK_THROWS_AS(OfferKernel::from_density(Eigen::VectorXd::Zero(5), g), DomainError);
}

TEST_CASE("flat wage above the obstacle continues everywhere") {
    WorkerEnv env = small_env(31, 0.0);
    env.search_enabled = false;
    env.wage = Eigen::VectorXd::Constant(31, 0.2);
    env.VU = 1.0;
    const WorkerSolution pi = solve_obstacle_pi(env);
    CHECK((pi.V.array() - 0.2 / 0.05).abs().maxCoeff() < 1e-10);
    CHECK(pi.k_star == 0);
    const FreeBoundary fb = free_boundary(pi, env.grid);
    CHECK(fb.truncated);
    const WorkerSolution vi = solve_obstacle_vi(env, 1e30, 1.0, 1e-13);
    CHECK((vi.V - pi.V).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("flat wage below the obstacle stops everywhere") {
    WorkerEnv env = small_env(31);
    env.wage = Eigen::VectorXd::Constant(31, 0.01);
    env.VU = 1.0;
    const WorkerSolution pi = solve_obstacle_pi(env);
    CHECK((pi.V.array() - 1.0).abs().maxCoeff() == 0.0);
    CHECK(pi.k_star == 31);
    CHECK_THROWS_AS(free_boundary(pi, env.grid), DomainError);
    const WorkerSolution vi = solve_obstacle_vi(env, 10.0, 0.7);
    CHECK(vi.k_star == 31);
}

TEST_CASE("threshold without search matches the continuous free boundary") {
    for (double mu : {-0.02, 0.0, 0.01}) {
        WorkerEnv env = small_env(301, mu, 0.12);
        env.search_enabled = false;
        const WorkerSolution sol = solve_obstacle_pi(env);
        const double exact = analytic_threshold(0.0, 0.5, mu, 0.12, 0.05, 0.0);
        const FreeBoundary fb = free_boundary(sol, env.grid);
        CHECK(std::abs(fb.z_star - exact) <= 2 * env.grid.dz);
    }
}

TEST_CASE("policy iteration agrees with a brute-force projected iteration") {
    WorkerEnv env = small_env(31, -0.01, 0.15, 0.8);
    const Eigen::VectorXd ref = brute_force_values(env, 6000);
    const WorkerSolution pi = solve_obstacle_pi(env);
    CHECK((pi.V - ref).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pi.residual <= 1e-10);
}

TEST_CASE("value iteration converges monotonically from the obstacle") {
    WorkerEnv env = small_env(61);
    std::vector<double> trace;
    const WorkerSolution vi = solve_obstacle_vi(env, 1e30, 1.0, 1e-13, 200000, &trace);
    const WorkerSolution pi = solve_obstacle_pi(env);
    CHECK((vi.V - pi.V).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(vi.k_star == pi.k_star);
    REQUIRE(trace.size() > 20);
    const std::size_t burn = trace.size() / 10;
    bool monotone = true;
    for (std::size_t i = burn + 1; i < trace.size(); ++i) monotone &= trace[i] <= trace[i - 1] * (1 + 1e-9);
    CHECK(monotone);

    // damping and finite dt change the path, not the fixed point
    const WorkerSolution vi2 = solve_obstacle_vi(env, 2.0, 0.6, 1e-13);
    CHECK((vi2.V - pi.V).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("random environments: structural properties") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mu(-0.03, 0.03), sig(0.05, 0.25), lam(0.0, 2.0),
        beta(0.1, 1.0), vu(-0.5, 0.5), F(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        WorkerEnv env = small_env(41 + 10 * (trial % 3), mu(rng), sig(rng), 0.05 + lam(rng), beta(rng));
        env.VU = vu(rng);
        env.F = F(rng);
        env.wage = wage_schedule(env.grid.nodes, env.VU, env.params, WageMode::AffineEquilibrium);
        if (trial % 2) {
            Eigen::VectorXd m = (-(env.grid.nodes.array() - 0.5).square() / 0.1).exp();
            env.offers = OfferKernel::from_density(m, env.grid);
        }
        const WorkerSolution s = solve_obstacle_pi(env);
        const double g = env.VU - env.F;
        CHECK(s.residual <= 1e-10);
        CHECK((s.V.array() - g).minCoeff() >= -1e-12);
        for (int k = 1; k < env.grid.K; ++k) {
            CHECK(s.V[k] >= s.V[k - 1] - 1e-12);
            CHECK((!s.continue_mask[k - 1] || s.continue_mask[k]));
        }
        // a_opt is zero where no offer can improve on the current value
        const Eigen::VectorXd G = offer_gain_per_arrival(s.V, env.offers);
        for (int k = 0; k < env.grid.K; ++k) {
            if (G[k] == 0.0) CHECK(s.a_opt[k] == 0.0);
        }

        const WorkerSolution v = solve_obstacle_vi(env, 1e30, 1.0, 1e-13);
        CHECK((v.V - s.V).cwiseAbs().maxCoeff() < 1e-8);

        // a higher firing cost lowers the obstacle and expands continuation
        WorkerEnv env2 = env;
        env2.F = env.F + 0.3;
        const WorkerSolution s2 = solve_obstacle_pi(env2);
        CHECK(s2.k_star <= s.k_star);
    }
}

TEST_CASE("smooth fit") {
    WorkerEnv env = small_env(31);
    env.wage = Eigen::VectorXd::Constant(31, 0.0);
    env.VU = 1.0;
    WorkerSolution flat = finalize_solution(env, Eigen::VectorXd::Constant(31, 1.0), 0);
    flat.k_star = 10;
    CHECK(smooth_fit_residual(flat, env.grid) == 0.0);

    // manufactured kink with unit slope above k_star
    Eigen::VectorXd V = Eigen::VectorXd::Constant(31, 1.0);
    for (int k = 10; k < 31; ++k) V[k] = 1.0 + (k - 9) * env.grid.dz;
    const WorkerSolution kink = finalize_solution(env, V, 0);
    CHECK(kink.k_star == 10);
    CHECK(smooth_fit_residual(kink, env.grid) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("invalid inputs") {
    WorkerEnv env = small_env(21);
    env.wage = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(solve_obstacle_pi(env), ConfigError);
    WorkerEnv env2 = small_env(21);
    CHECK_THROWS_AS(solve_obstacle_vi(env2, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(solve_obstacle_vi(env2, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(solve_obstacle_pi(env2, 1e-10, 0), IterationLimitError);
}
