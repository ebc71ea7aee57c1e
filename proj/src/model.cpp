#include "wagemfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(name) + " must be strictly positive, got " +
                          std::to_string(value));
    }
}

} // namespace

void ModelParams::validate() const {
    require_positive(r, "r");
    require_positive(sigma_P, "sigma_P");
    require_positive(sigma_R, "sigma_R");
    require_positive(kappa, "kappa");
    require_positive(eta, "eta");
    require_positive(lambda0, "lambda0");
    require_positive(lambda_bar, "lambda_bar");
    require_positive(entry_rate, "entry_rate");
    require_positive(chi, "chi");
    if (lambdaU < 0.0) throw ConfigError("lambdaU must be nonnegative");
    if (rho < -1.0 || rho > 1.0) throw ConfigError("rho must lie in [-1, 1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (std::abs(alpha + gamma - 1.0) > 1e-12) throw ConfigError("alpha + gamma must equal 1");
    if (sigma_u2 < 0.0) throw ConfigError("sigma_u2 must be nonnegative");
    if (!(beta_w > 0.0 && beta_w <= 1.0)) throw ConfigError("beta_w must lie in (0, 1]");
    if (F < 0.0) throw ConfigError("firing cost F must be nonnegative");
    if (!(s >= 0.0 && s < 1.0)) throw ConfigError("search subsidy s must lie in [0, 1)");
    // ellipticity is checked by derive_surplus_coeffs
    derive_surplus_coeffs(*this);
}

SurplusCoeffs derive_surplus_coeffs(const ModelParams& p) {
    const double var = p.sigma_P * p.sigma_P + p.sigma_R * p.sigma_R -
                       2.0 * p.rho * p.sigma_P * p.sigma_R;
    if (!(var > 0.0) || !(p.chi > 0.0)) {
        throw ConfigError("surplus volatility is not uniformly elliptic (sigma_Z^2 = " +
                          std::to_string(var) + ")");
    }
    return SurplusCoeffs{p.mu_P - p.mu_R, std::sqrt(var) * p.chi};
}

double wage_at(double z, double VU, const ModelParams& p, WageMode mode) {
    switch (mode) {
    case WageMode::SharingExogenous:
        // alpha*P + (1-alpha)*R with R = R_ref and P = R_ref + z
        return (1.0 - p.gamma) * (z + p.R_ref) + p.gamma * p.R_ref;
    case WageMode::AffineEquilibrium:
        return VU + p.beta_w * z;
    }
    return 0.0;
}

Eigen::VectorXd wage_schedule(const Eigen::VectorXd& nodes, double VU,
                              const ModelParams& p, WageMode mode) {
    return nodes.unaryExpr([&](double z) { return wage_at(z, VU, p, mode); });
}

double search_cost(double a, const ModelParams& p) {
    if (a < 0.0) throw DomainError("search intensity must be nonnegative");
    return (1.0 - p.s) * p.kappa * std::pow(a, 1.0 + p.eta) / (1.0 + p.eta);
}

double arrival_rate(double a, const ModelParams& p) {
    return std::min(p.lambda0 * a, p.lambda_bar);
}

} // namespace wagemfg
