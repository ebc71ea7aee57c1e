#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "wagemfg/errors.hpp"
#include "wagemfg/grid.hpp"

using namespace wagemfg;

TEST_CASE("grid construction") {
    const Grid g = build_grid(0.0, 1.0, 3);
    CHECK(g.dz == 0.5);
    CHECK(g.nodes[0] == 0.0);
    CHECK(g.nodes[1] == 0.5);
    CHECK(g.nodes[2] == 1.0);

    const Grid h = build_grid(-2.0, 2.0, 5);
    for (int k = 0; k < 5; ++k) CHECK(h.nodes[k] == -2.0 + k);

    CHECK_THROWS_AS(build_grid(0.0, 1.0, 2), ConfigError);
    CHECK_THROWS_AS(build_grid(1.0, 1.0, 10), ConfigError);
}

TEST_CASE("nearest node") {
    const Grid g = build_grid(-2.0, 2.0, 5);
    CHECK(g.nearest_index(0.2) == 2);
    CHECK(g.nearest_index(0.5) == 2);  // tie goes down
    CHECK(g.nearest_index(0.51) == 3);
    CHECK(g.nearest_index(-10.0) == 0);
    CHECK(g.nearest_index(10.0) == 4);
}

TEST_CASE("action grid") {
    const ActionGrid a = build_action_grid(2.0, 5);
    CHECK(a.size() == 5);
    CHECK(a.values[0] == 0.0);
    CHECK(a.values[4] == 2.0);
    Eigen::VectorXd bad(3);
    bad << 0.0, 1.0, 1.0;
    CHECK_THROWS_AS(make_action_grid(bad), ConfigError);
    bad << 0.5, 1.0, 2.0;
    CHECK_THROWS_AS(make_action_grid(bad), ConfigError);
}

TEST_CASE("pure diffusion stencil") {
    const Grid g = build_grid(0.0, 1.0, 3);
    const double s2 = 0.04;
    const TridiagonalOperator L = assemble_generator(Eigen::VectorXd::Zero(3),
                                                     Eigen::VectorXd::Constant(3, s2), g);
    const double c = s2 / (2 * g.dz * g.dz);
    CHECK(L.lower[0] == doctest::Approx(c));
    CHECK(L.diag[1] == doctest::Approx(-2 * c));
    CHECK(L.upper[1] == doctest::Approx(c));
}

TEST_CASE("drift placement keeps the scheme monotone") {
    const Grid g = build_grid(0.0, 1.0, 11);
    const double c = 0.3, s2 = 1e-4;
    const TridiagonalOperator Lp = assemble_generator(Eigen::VectorXd::Constant(11, c),
                                                      Eigen::VectorXd::Constant(11, s2), g);
    // positive drift moves mass up: the drift enters the upper off-diagonal
    const double diff = 0.5 * s2 / (g.dz * g.dz);
    CHECK(Lp.upper[5] == doctest::Approx(c / g.dz + diff));
    CHECK(Lp.lower[4] == doctest::Approx(diff));
    const TridiagonalOperator Lm = assemble_generator(Eigen::VectorXd::Constant(11, -c),
                                                      Eigen::VectorXd::Constant(11, s2), g);
    CHECK(Lm.lower[4] == doctest::Approx(c / g.dz + diff));
    CHECK(Lm.upper[5] == doctest::Approx(diff));
}

TEST_CASE("random coefficients: nonnegative off-diagonals, constants annihilated") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mu(-2.0, 2.0), s2(1e-6, 1.0), zl(-3.0, 0.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 3 + trial % 40;
        const Grid g = build_grid(zl(rng), 1.0, K);
        Eigen::VectorXd d(K), v(K);
        for (int k = 0; k < K; ++k) {
            d[k] = mu(rng);
            v[k] = s2(rng);
        }
        const TridiagonalOperator L = assemble_generator(d, v, g);
        CHECK(L.lower.minCoeff() >= 0.0);
        CHECK(L.upper.minCoeff() >= 0.0);
        const Eigen::VectorXd one = L.apply(Eigen::VectorXd::Ones(K));
        CHECK(one.cwiseAbs().maxCoeff() <= 1e-9 * L.diag.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("consistency on a quadratic") {
    const Grid g = build_grid(-1.0, 1.0, 201);
    const double c = 0.2, s2 = 0.09;
    const TridiagonalOperator L = assemble_generator(Eigen::VectorXd::Constant(g.K, c),
                                                     Eigen::VectorXd::Constant(g.K, s2), g);
    const Eigen::VectorXd q = g.nodes.array().square();
    const Eigen::VectorXd Lq = L.apply(q);
    for (int k = 1; k < g.K - 1; ++k) {
        const double exact = 2 * c * g.nodes[k] + s2;
        // first-order upwind error is c * dz for z^2
        CHECK(std::abs(Lq[k] - exact) <= c * g.dz * 1.0000001);
    }
    // pure diffusion part is exact
    const TridiagonalOperator D = assemble_generator(Eigen::VectorXd::Zero(g.K),
                                                     Eigen::VectorXd::Constant(g.K, s2), g);
    const Eigen::VectorXd Dq = D.apply(q);
    for (int k = 1; k < g.K - 1; ++k) CHECK(Dq[k] == doctest::Approx(s2).epsilon(1e-9));
}

TEST_CASE("non-elliptic coefficients are rejected") {
    const Grid g = build_grid(0.0, 1.0, 5);
    Eigen::VectorXd v = Eigen::VectorXd::Constant(5, 0.1);
    v[2] = 0.0;
    CHECK_THROWS_AS(assemble_generator(Eigen::VectorXd::Zero(5), v, g), ConfigError);
}

TEST_CASE("tridiagonal solve") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int K = 50;
    TridiagonalOperator A{Eigen::VectorXd(K - 1), Eigen::VectorXd(K), Eigen::VectorXd(K - 1)};
    for (int k = 0; k < K - 1; ++k) {
        A.lower[k] = -u(rng);
        A.upper[k] = -u(rng);
    }
    for (int k = 0; k < K; ++k) A.diag[k] = 2.5 + u(rng);
    Eigen::VectorXd x(K);
    for (int k = 0; k < K; ++k) x[k] = u(rng) - 0.5;
    const Eigen::VectorXd b = A.apply(x);
    CHECK((solve_tridiagonal(A, b) - x).cwiseAbs().maxCoeff() < 1e-13);

    // transpose of the operator agrees with the dense transpose
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K, K);
    for (int k = 0; k < K; ++k) M(k, k) = A.diag[k];
    for (int k = 0; k < K - 1; ++k) {
        M(k, k + 1) = A.upper[k];
        M(k + 1, k) = A.lower[k];
    }
    CHECK((A.transpose().apply(x) - M.transpose() * x).cwiseAbs().maxCoeff() < 1e-14);
}
