#pragma once

// Dense numerical kernels shared by the rest of the library: a convex QP
// solver (operator splitting with polishing), a discrete algebraic Riccati
// solver and a handful of linear algebra helpers.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathfg/error.hpp"

namespace pathfg::numkit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Linear algebra helpers
// ---------------------------------------------------------------------------

bool is_symmetric(const Mat& m, double tol = 1e-9);
double min_eigenvalue_symmetric(const Mat& m);
double spectral_radius(const Mat& m);

/// exp(m) by scaling and squaring with a diagonal [6/6] Pade approximant.
Mat expm(const Mat& m);

/// Orthonormal basis of ker(m) from a full SVD. Singular values below
/// `rank_tol * max(1, sigma_max)` count as zero.
Mat kernel_basis(const Mat& m, double rank_tol = 1e-10);

// ---------------------------------------------------------------------------
// Quadratic programming
// ---------------------------------------------------------------------------

/// Second-order block `|| rows * x - center ||_2 <= radius`.
struct BallConstraint {
    Mat rows;
    Vec center;
    double radius = 0.0;
};

/// minimize 0.5 x'Hx + q'x  s.t.  G x <= h,  E x = b,  and every ball block.
struct QpProblem {
    Mat hessian;
    Vec linear_term;
    Mat ineq_rows;
    Vec ineq_rhs;
    Mat eq_rows;
    Vec eq_rhs;
    std::vector<BallConstraint> balls;

    int num_variables() const { return static_cast<int>(linear_term.size()); }

    /// Throws DimensionError on shape mismatch and PreconditionError when the
    /// hessian is not symmetric positive semidefinite (tolerance 1e-9).
    void validate() const;
};

enum class QpStatus { optimal, infeasible, max_iter };

std::string to_string(QpStatus status);

struct QpSettings {
    double tol = 1e-8;
    int max_iter = 20000;
    double rho = 0.1;
    double sigma = 1e-6;
    double alpha = 1.6;
    int scaling_iters = 15;
    int check_every = 10;
    bool adaptive_rho = true;
    bool polish = true;
    /// Optional starting point for the primal iterate.
    std::optional<Vec> initial_primal;
};

struct QpSolution {
    Vec primal;
    Vec dual_ineq;
    Vec dual_eq;
    std::vector<Vec> dual_ball;
    double objective = 0.0;
    QpStatus status = QpStatus::max_iter;
    int iterations = 0;
    bool polished = false;

    // Unscaled KKT residuals of the returned point.
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
    /// For status == infeasible: the relative norm of A' dy of the certificate.
    double infeasibility_residual = 0.0;
};

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});
QpSolution solve_qp(const QpProblem& problem, double tol, int max_iter);

/// KKT residuals of an arbitrary primal/dual point, used for reporting and tests.
struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
};
KktResiduals kkt_residuals(const QpProblem& problem, const Vec& x, const Vec& dual_ineq,
                           const Vec& dual_eq, const std::vector<Vec>& dual_ball);

// ---------------------------------------------------------------------------
// Discrete algebraic Riccati equation
// ---------------------------------------------------------------------------

/// Raised when the Riccati iteration fails; carries the last fixed-point residual.
class DareError : public Error {
public:
    DareError(const std::string& what, double residual) : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct DareResult {
    Mat P;
    Mat K;
    int iterations = 0;
    double residual = 0.0;
};

/// Stabilizing solution of P = Q + A'PA - A'PB (R + B'PB)^{-1} B'PA and the
/// gain K = (R + B'PB)^{-1} B'PA, by the structure-preserving doubling
/// iteration started from P0 = Q.
DareResult solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol = 1e-12,
                      int max_iter = 200);

/// Frobenius norm of the Riccati fixed-point residual at P.
double dare_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P);

}  // namespace pathfg::numkit
