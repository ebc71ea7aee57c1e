#include "wagemfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wagemfg/errors.hpp"

namespace wagemfg {

int Grid::nearest_index(double z) const {
    const double t = (z - z_min) / dz;
    int k = static_cast<int>(std::floor(t + 0.5));
    if (t + 0.5 == std::floor(t + 0.5) && k > 0) --k;
    return std::clamp(k, 0, K - 1);
}

Grid build_grid(double z_min, double z_max, int K) {
    if (K < 3) throw ConfigError("grid needs at least 3 nodes, got " + std::to_string(K));
    if (!(z_min < z_max)) throw ConfigError("grid requires z_min < z_max");
    Grid g;
    g.z_min = z_min;
    g.z_max = z_max;
    g.K = K;
    g.dz = (z_max - z_min) / (K - 1);
    g.nodes.resize(K);
    for (int k = 0; k < K; ++k) g.nodes[k] = z_min + k * g.dz;
    g.nodes[K - 1] = z_max;
    return g;
}

ActionGrid build_action_grid(double a_max, int n_actions) {
    if (n_actions < 2) throw ConfigError("action grid needs at least 2 points");
    if (!(a_max > 0.0)) throw ConfigError("action grid upper bound must be positive");
    return ActionGrid{Eigen::VectorXd::LinSpaced(n_actions, 0.0, a_max)};
}

ActionGrid make_action_grid(const Eigen::VectorXd& values) {
    if (values.size() < 2) throw ConfigError("action grid needs at least 2 points");
    if (values[0] != 0.0) throw ConfigError("action grid must start at 0");
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1]) || !std::isfinite(values[i])) {
            throw ConfigError("action grid must be finite and strictly increasing");
        }
    }
    return ActionGrid{values};
}

TridiagonalOperator assemble_generator(const Eigen::VectorXd& drift,
                                       const Eigen::VectorXd& vol2, const Grid& g) {
    const int K = g.K;
    if (drift.size() != K || vol2.size() != K) {
        throw ConfigError("generator coefficients must have one entry per node");
    }
    if ((vol2.array() <= 0.0).any()) {
        throw ConfigError("generator requires strictly positive volatility (ellipticity)");
    }
    const double dz = g.dz;
    const double dz2 = dz * dz;

    TridiagonalOperator L{Eigen::VectorXd::Zero(K - 1), Eigen::VectorXd::Zero(K),
                          Eigen::VectorXd::Zero(K - 1)};
    for (int k = 0; k < K; ++k) {
        const double up = std::max(drift[k], 0.0) / dz + 0.5 * vol2[k] / dz2;
        const double down = -std::min(drift[k], 0.0) / dz + 0.5 * vol2[k] / dz2;
        if (k == 0) {
            L.upper[0] = up;
            L.diag[0] = -up;
        } else if (k == K - 1) {
            L.lower[K - 2] = down;
            L.diag[K - 1] = -down;
        } else {
            L.lower[k - 1] = down;
            L.upper[k] = up;
            L.diag[k] = -(up + down);
        }
    }
    return L;
}

Eigen::VectorXd solve_tridiagonal(const TridiagonalOperator& A, const Eigen::VectorXd& rhs) {
    const int K = A.size();
    Eigen::VectorXd c(K), d(K), x(K);
    double denom = A.diag[0];
    if (denom == 0.0) throw LinearSolveError("zero pivot in tridiagonal solve");
    c[0] = K > 1 ? A.upper[0] / denom : 0.0;
    d[0] = rhs[0] / denom;
    for (int k = 1; k < K; ++k) {
        denom = A.diag[k] - A.lower[k - 1] * c[k - 1];
        if (denom == 0.0 || !std::isfinite(denom)) {
            throw LinearSolveError("zero pivot in tridiagonal solve");
        }
        c[k] = k < K - 1 ? A.upper[k] / denom : 0.0;
        d[k] = (rhs[k] - A.lower[k - 1] * d[k - 1]) / denom;
    }
    x[K - 1] = d[K - 1];
    for (int k = K - 2; k >= 0; --k) x[k] = d[k] - c[k] * x[k + 1];
    return x;
}

} // namespace wagemfg
