#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hgp/error.hpp"

namespace hgp {

struct CholeskyFactor {
    Eigen::MatrixXd lower;
    double jitter = 0.0;  // diagonal shift that was needed, 0 if none

    [[nodiscard]] double log_det() const { return 2.0 * lower.diagonal().array().log().sum(); }

    /// Solve A x = b.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& b) const {
        Eigen::VectorXd x = lower.triangularView<Eigen::Lower>().solve(b);
        lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
        return x;
    }

    [[nodiscard]] Eigen::MatrixXd inverse() const {
        Eigen::MatrixXd x = Eigen::MatrixXd::Identity(lower.rows(), lower.cols());
        lower.triangularView<Eigen::Lower>().solveInPlace(x);
        lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
        return x;
    }

    /// diag(A^{-1}) via the explicit inverse of the triangular factor.
    [[nodiscard]] Eigen::VectorXd inverse_diagonal() const {
        const Eigen::Index m = lower.rows();
        Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(m, m);
        lower.triangularView<Eigen::Lower>().solveInPlace(linv);
        return linv.colwise().squaredNorm().transpose();
    }
};

/// Cholesky with escalating diagonal jitter: 1e-10, 1e-9, ..., 1e-6 times
/// `scale` (default: the mean diagonal). Throws ConditioningError when the
/// ladder is exhausted.
inline CholeskyFactor robust_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& A, const std::string& context = "",
                                      double scale = 0.0) {
    const Eigen::Index m = A.rows();
    if (m != A.cols()) throw InvalidArgument("cholesky: matrix is not square");
    auto attempt = [&](double shift, CholeskyFactor& out) {
        Eigen::MatrixXd work = A;
        if (shift > 0.0) work.diagonal().array() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() != Eigen::Success) return false;
        Eigen::MatrixXd l = llt.matrixL();
        if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) return false;
        out.lower = std::move(l);
        out.jitter = shift;
        return true;
    };
    CholeskyFactor f;
    if (A.allFinite()) {
        if (attempt(0.0, f)) return f;
        const double base = scale > 0.0 ? scale : m > 0 ? A.diagonal().mean() : 0.0;
        if (base > 0.0 && std::isfinite(base)) {
            for (double rel = 1e-10; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
                if (attempt(rel * base, f)) return f;
            }
        }
    }
    std::ostringstream msg;
    msg << "cholesky failed";
    if (!context.empty()) msg << " (" << context << ")";
    throw ConditioningError(msg.str());
}

}  // namespace hgp
