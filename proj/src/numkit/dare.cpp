#include <cmath>
#include <limits>
#include <sstream>

#include "pathfg/numkit.hpp"

namespace pathfg::numkit {

double dare_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P) {
    const Mat btpa = B.transpose() * P * A;
    const Mat s = R + B.transpose() * P * B;
    const Mat rhs = Q + A.transpose() * P * A - btpa.transpose() * s.ldlt().solve(btpa);
    return (P - rhs).norm();
}

DareResult solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol, int max_iter) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
        R.cols() != B.cols())
        throw DimensionError("solve_dare: inconsistent matrix dimensions");
    if (!is_symmetric(Q) || min_eigenvalue_symmetric(Q) < -1e-12)
        throw PreconditionError("solve_dare: Q must be symmetric positive semidefinite");
    if (!is_symmetric(R)) throw PreconditionError("solve_dare: R must be symmetric");
    Eigen::LLT<Mat> r_llt(R);
    if (r_llt.info() != Eigen::Success || min_eigenvalue_symmetric(R) <= 0.0)
        throw PreconditionError("solve_dare: R must be positive definite");

    const Mat id = Mat::Identity(n, n);
    Mat Ak = A;
    Mat Gk = B * r_llt.solve(B.transpose());
    Mat Hk = Q;
    int iterations = 0;
    bool converged = false;
    double delta = 0.0;
    for (iterations = 1; iterations <= max_iter; ++iterations) {
        Eigen::PartialPivLU<Mat> w(id + Gk * Hk);
        const Mat w_inv_a = w.solve(Ak);
        const Mat w_inv_g = w.solve(Gk);
        Mat H_next = Hk + Ak.transpose() * Hk * w_inv_a;
        Mat G_next = Gk + Ak * w_inv_g * Ak.transpose();
        Mat A_next = Ak * w_inv_a;
        H_next = 0.5 * (H_next + H_next.transpose());
        G_next = 0.5 * (G_next + G_next.transpose());
        if (!H_next.allFinite() || !A_next.allFinite()) {
            throw DareError("solve_dare: iteration diverged; (A, B) is likely not stabilizable",
                            std::numeric_limits<double>::infinity());
        }
        delta = (H_next - Hk).norm();
        Hk = std::move(H_next);
        Gk = std::move(G_next);
        Ak = std::move(A_next);
        if (delta <= tol * std::max(1.0, Hk.norm())) {
            converged = true;
            break;
        }
    }

    const double residual = dare_residual(A, B, Q, R, Hk);
    if (!converged) {
        std::ostringstream msg;
        msg << "solve_dare: no convergence after " << max_iter << " iterations (residual " << residual << ")";
        throw DareError(msg.str(), residual);
    }

    const Mat s = R + B.transpose() * Hk * B;
    Eigen::LLT<Mat> s_llt(s);
    if (s_llt.info() != Eigen::Success) throw DareError("solve_dare: R + B'PB is singular", residual);

    DareResult out;
    out.P = Hk;
    out.K = s_llt.solve(B.transpose() * Hk * A);
    out.iterations = iterations;
    out.residual = residual;

    if (residual > 1e-8 * std::max(1.0, Hk.norm()))
        throw DareError("solve_dare: fixed-point residual too large", residual);
    if (spectral_radius(A - B * out.K) >= 1.0)
        throw DareError("solve_dare: closed loop is not Schur stable; (A, B) is not stabilizable", residual);
    if (min_eigenvalue_symmetric(out.P) < -1e-10)
        throw DareError("solve_dare: solution is not positive semidefinite", residual);
    return out;
}

}  // namespace pathfg::numkit
