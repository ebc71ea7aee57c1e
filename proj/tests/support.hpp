#pragma once

#include <cmath>

#include "wagemfg/grid.hpp"
#include "wagemfg/hjb.hpp"
#include "wagemfg/model.hpp"

namespace testing_support {

// Small worker problem with an affine wage and point-mass offers at z0.
inline wagemfg::WorkerEnv small_env(int K = 61, double mu = -0.01, double sigma = 0.1,
                                    double lambda0 = 0.5, double beta = 0.5) {
    using namespace wagemfg;
    ModelParams p;
    p.mu_P = mu;
    p.mu_R = 0.0;
    p.sigma_P = sigma / std::sqrt(2.0);
    p.sigma_R = sigma / std::sqrt(2.0);
    p.rho = 0.0;
    p.z0 = 0.3;
    p.kappa = 0.5;
    p.eta = 1.0;
    p.lambda0 = lambda0;
    p.beta_w = beta;
    WorkerEnv env;
    env.params = p;
    env.grid = build_grid(-1.0, 2.0, K);
    env.actions = build_action_grid(2.0, 21);
    env.coeffs = derive_surplus_coeffs(p);
    env.VU = 0.0;
    env.F = 0.0;
    env.wage = wage_schedule(env.grid.nodes, env.VU, p, WageMode::AffineEquilibrium);
    env.offers = OfferKernel::point_mass(env.grid, p.z0);
    return env;
}

} // namespace testing_support
