#pragma once

#include <Eigen/Core>

namespace wagemfg {

/// Equidistant surplus grid on [z_min, z_max] with K nodes.
struct Grid {
    double z_min = 0.0;
    double z_max = 1.0;
    int K = 0;
    double dz = 0.0;
    Eigen::VectorXd nodes;

    /// Index of the node closest to z (ties go to the lower node).
    int nearest_index(double z) const;
};

Grid build_grid(double z_min, double z_max, int K);

/// Discrete search-intensity set; values[0] == 0, strictly increasing.
struct ActionGrid {
    Eigen::VectorXd values;

    int size() const { return static_cast<int>(values.size()); }
};

ActionGrid build_action_grid(double a_max, int n_actions);
ActionGrid make_action_grid(const Eigen::VectorXd& values);

/// Tridiagonal matrix. Row k reads lower[k-1], diag[k], upper[k].
struct TridiagonalOperator {
    Eigen::VectorXd lower;
    Eigen::VectorXd diag;
    Eigen::VectorXd upper;

    int size() const { return static_cast<int>(diag.size()); }

    template <typename Derived>
    Eigen::VectorXd apply(const Eigen::MatrixBase<Derived>& x) const {
        const int K = size();
        Eigen::VectorXd y = diag.cwiseProduct(x);
        y.head(K - 1) += upper.cwiseProduct(x.tail(K - 1));
        y.tail(K - 1) += lower.cwiseProduct(x.head(K - 1));
        return y;
    }

    /// Same operator with rows and columns swapped.
    TridiagonalOperator transpose() const { return {upper, diag, lower}; }
};

/// Monotone upwind discretisation of  drift * d/dz + 0.5 * vol2 * d^2/dz^2.
///
/// Interior rows use the forward difference where drift > 0 and the backward
/// difference where drift < 0, which keeps every off-diagonal nonnegative.
/// Boundary rows mirror the ghost node (V_0 = V_1, V_{K+1} = V_K), i.e. a
/// homogeneous Neumann closure, so every row sums to zero.
TridiagonalOperator assemble_generator(const Eigen::VectorXd& drift,
                                       const Eigen::VectorXd& vol2, const Grid& g);

/// Thomas algorithm. Requires a nonsingular, diagonally dominant system.
Eigen::VectorXd solve_tridiagonal(const TridiagonalOperator& A, const Eigen::VectorXd& rhs);

} // namespace wagemfg
