#include "wagemfg/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_norm_cdf(double x) {
    if (x > -30.0) return std::log(norm_cdf(x));
    // Mills-ratio asymptotics in the far left tail
    const double x2 = x * x;
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// P(tau > t): Phi(a) - exp(-2 mu d / s^2) Phi(b)
double survival(double t, const BenchmarkSpec& s) {
    const double st = s.sigma_Z * std::sqrt(t);
    const double a = (s.d + s.mu_Z * t) / st;
    const double b = (-s.d + s.mu_Z * t) / st;
    const double expo = -2.0 * s.mu_Z * s.d / (s.sigma_Z * s.sigma_Z);
    const double second = std::exp(expo + log_norm_cdf(b));
    return std::max(0.0, norm_cdf(a) - second);
}

} // namespace

void BenchmarkSpec::validate() const {
    if (!(d > 0.0)) throw DomainError("benchmark distance d must be positive");
    if (!(sigma_Z > 0.0)) throw DomainError("benchmark volatility must be positive");
    if (!(T_ret > 0.0)) throw DomainError("retirement horizon must be positive");
}

double hitting_cdf(double t, const BenchmarkSpec& s) {
    s.validate();
    if (!(t > 0.0)) throw DomainError("hitting_cdf needs t > 0");
    return std::clamp(1.0 - survival(t, s), 0.0, 1.0);
}

double hitting_density(double t, const BenchmarkSpec& s) {
    s.validate();
    if (!(t > 0.0)) throw DomainError("hitting density needs t > 0");
    const double s2 = s.sigma_Z * s.sigma_Z;
    const double x = s.d + s.mu_Z * t;
    return s.d / (s.sigma_Z * std::sqrt(2.0 * std::numbers::pi * t * t * t)) *
           std::exp(-x * x / (2.0 * s2 * t));
}

double never_end_probability(const BenchmarkSpec& s) {
    s.validate();
    if (s.mu_Z <= 0.0) return 0.0;
    return -std::expm1(-2.0 * s.mu_Z * s.d / (s.sigma_Z * s.sigma_Z));
}

double never_end_probability_truncated(const BenchmarkSpec& s) {
    return 1.0 - hitting_cdf(s.T_ret, s);
}

double hazard(double t, const BenchmarkSpec& s) {
    s.validate();
    if (!(t > 0.0)) throw DomainError("hazard needs t > 0");
    const double S = survival(t, s);
    if (!(S > 1e-300)) throw DomainError("hazard: survival underflows at this tenure");
    return hitting_density(t, s) / S;
}

double hazard_peak(const BenchmarkSpec& s, double t_max) {
    // coarse scan, then golden-section refinement around the best point
    const int n = 2000;
    double best_t = t_max / n, best_h = -1.0;
    for (int i = 1; i <= n; ++i) {
        const double t = t_max * i / n;
        const double h = hazard(t, s);
        if (h > best_h) {
            best_h = h;
            best_t = t;
        }
    }
    double lo = std::max(best_t - t_max / n, 1e-9), hi = std::min(best_t + t_max / n, t_max);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (hazard(a, s) < hazard(b, s)) lo = a;
        else hi = b;
    }
    return 0.5 * (lo + hi);
}

double distance_for_survival(double mu_Z, double sigma_Z, double T_ret, double target) {
    if (!(target > 0.0 && target < 1.0)) throw DomainError("target survival must lie in (0, 1)");
    // survival to T_ret increases with d
    BenchmarkSpec s{1e-8, mu_Z, sigma_Z, T_ret};
    double lo = 1e-8, hi = sigma_Z * std::sqrt(T_ret);
    s.d = hi;
    while (never_end_probability_truncated(s) < target) {
        hi *= 2.0;
        s.d = hi;
        if (hi > 1e6) throw DomainError("cannot reach the target survival");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        s.d = mid;
        if (never_end_probability_truncated(s) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<CurvePoint> benchmark_curve(const BenchmarkSpec& s, double t_max, int n_points) {
    if (n_points < 1 || !(t_max > 0.0)) throw DomainError("bad curve range");
    std::vector<CurvePoint> out;
    out.reserve(n_points);
    for (int i = 1; i <= n_points; ++i) {
        const double t = t_max * i / n_points;
        out.push_back({t, hitting_cdf(t, s), hazard(t, s)});
    }
    return out;
}

} // namespace wagemfg
