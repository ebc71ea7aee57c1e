#pragma once

#include <Eigen/Core>

namespace wagemfg {

/// Solves A x = b for a dense square A.
///
/// Upper- and lower-Hessenberg matrices (a tridiagonal band plus a dense
/// triangle, the shape produced by value-ranked offer acceptance) are
/// eliminated in O(n^2) with adjacent-row pivoting; anything else falls back
/// to partial-pivot LU. Throws LinearSolveError on a singular system.
Eigen::VectorXd solve_dense(Eigen::MatrixXd A, Eigen::VectorXd b);

} // namespace wagemfg
