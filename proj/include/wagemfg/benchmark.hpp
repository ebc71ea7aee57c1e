#pragma once

#include <vector>

namespace wagemfg {

/// Brownian surplus started d above an absorbing barrier.
struct BenchmarkSpec {
    double d = 1.0;
    double mu_Z = 0.0;
    double sigma_Z = 1.0;
    double T_ret = 40.0;

    void validate() const;
};

/// P(tau <= t) for the first passage of the barrier.
double hitting_cdf(double t, const BenchmarkSpec& s);

/// First-passage density at t (defective when mu_Z > 0).
double hitting_density(double t, const BenchmarkSpec& s);

/// 1 - exp(-2 mu d / sigma^2) for mu > 0, else 0.
double never_end_probability(const BenchmarkSpec& s);

/// Probability of surviving to the retirement horizon, 1 - hitting_cdf(T_ret).
double never_end_probability_truncated(const BenchmarkSpec& s);

/// density / survival. Throws DomainError when the survival underflows.
double hazard(double t, const BenchmarkSpec& s);

/// Tenure at which the hazard peaks, searched on (0, t_max].
double hazard_peak(const BenchmarkSpec& s, double t_max = 60.0);

/// Distance d giving the requested retirement survival for fixed drift and volatility.
double distance_for_survival(double mu_Z, double sigma_Z, double T_ret, double survival);

struct CurvePoint {
    double t;
    double cdf;
    double hazard;
};

std::vector<CurvePoint> benchmark_curve(const BenchmarkSpec& s, double t_max, int n_points);

} // namespace wagemfg
