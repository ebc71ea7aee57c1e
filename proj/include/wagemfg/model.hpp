#pragma once

#include <Eigen/Core>

namespace wagemfg {

/// Structural primitives of the economy. Units are annual.
///
/// The three policy levers each touch exactly one primitive:
/// `F` lowers the separation obstacle, `s` scales the search cost and
/// `chi` scales the surplus volatility.
struct ModelParams {
    // diffusion block
    double r = 0.05;
    double mu_P = 0.0;
    double mu_R = 0.0;
    double sigma_P = 0.1;
    double sigma_R = 0.1;
    double rho = 0.0;
    double z0 = 0.0;

    // wage block
    double gamma = 0.73;
    double alpha = 0.27;
    double sigma_u2 = 0.0046;
    double beta_w = 0.5;
    double R_ref = 0.0;      // reference outside level of the exogenous sharing rule
    double VU_exog = 0.0;    // frozen outside value used by the exogenous-wage modes

    // search block
    double kappa = 1.0;
    double eta = 1.0;
    double lambda0 = 1.0;
    double lambda_bar = 10.0;
    double b = 0.0;
    double lambdaU = 0.0;
    double entry_rate = 1.0;

    // policy levers
    double F = 0.0;
    double s = 0.0;
    double chi = 1.0;

    /// Throws ConfigError when any invariant is violated.
    void validate() const;
};

struct SurplusCoeffs {
    double mu_Z = 0.0;
    double sigma_Z = 0.0;
};

enum class WageMode { SharingExogenous, AffineEquilibrium };

SurplusCoeffs derive_surplus_coeffs(const ModelParams& p);

/// Log wage paid at surplus `z` given the outside value `VU`.
double wage_at(double z, double VU, const ModelParams& p, WageMode mode);

/// Wage schedule evaluated on a vector of nodes.
Eigen::VectorXd wage_schedule(const Eigen::VectorXd& nodes, double VU,
                              const ModelParams& p, WageMode mode);

/// (1-s) * kappa * a^(1+eta) / (1+eta). Throws DomainError for a < 0.
double search_cost(double a, const ModelParams& p);

/// min(lambda0 * a, lambda_bar).
double arrival_rate(double a, const ModelParams& p);

} // namespace wagemfg
