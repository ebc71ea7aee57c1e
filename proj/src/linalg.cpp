#include "wagemfg/linalg.hpp"

#include <cmath>
#include <utility>

#include <Eigen/LU>

#include "wagemfg/errors.hpp"

namespace wagemfg {

namespace {

bool is_upper_hessenberg(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 2; i < n; ++i) {
            if (A(i, j) != 0.0) return false;
        }
    }
    return true;
}

Eigen::VectorXd solve_upper_hessenberg(Eigen::MatrixXd& A, Eigen::VectorXd& b) {
    const Eigen::Index n = A.rows();
    const double scale = A.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw LinearSolveError("singular system (zero matrix)");
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        if (std::abs(A(j + 1, j)) > std::abs(A(j, j))) {
            A.row(j).tail(n - j).swap(A.row(j + 1).tail(n - j));
            std::swap(b[j], b[j + 1]);
        }
        if (A(j + 1, j) == 0.0) continue;
        if (A(j, j) == 0.0) throw LinearSolveError("singular Hessenberg system");
        const double f = A(j + 1, j) / A(j, j);
        A.row(j + 1).tail(n - j) -= f * A.row(j).tail(n - j);
        b[j + 1] -= f * b[j];
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        const double piv = A(i, i);
        if (std::abs(piv) <= 1e-300 || std::abs(piv) < 1e-15 * scale) {
            throw LinearSolveError("singular Hessenberg system");
        }
        double acc = b[i];
        if (i + 1 < n) acc -= A.row(i).tail(n - i - 1).dot(x.tail(n - i - 1));
        x[i] = acc / piv;
    }
    return x;
}

} // namespace

Eigen::VectorXd solve_dense(Eigen::MatrixXd A, Eigen::VectorXd b) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || b.size() != n) throw LinearSolveError("dimension mismatch");

    if (is_upper_hessenberg(A)) return solve_upper_hessenberg(A, b);

    // lower Hessenberg becomes upper Hessenberg under index reversal
    Eigen::MatrixXd R = A.colwise().reverse().rowwise().reverse();
    if (is_upper_hessenberg(R)) {
        Eigen::VectorXd rb = b.reverse();
        return solve_upper_hessenberg(R, rb).reverse();
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) throw LinearSolveError("singular dense system");
    Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite() || (A * x - b).cwiseAbs().maxCoeff() >
                              1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) {
        throw LinearSolveError("singular dense system");
    }
    return x;
}

} // namespace wagemfg
