#pragma once

#include <utility>
#include <vector>

#include "pathfg/geometry.hpp"

namespace pathfg {

struct TerminalOptions {
    /// Every constraint row is tightened by this amount so that a QP solution
    /// accurate to roughly the solver tolerance still satisfies the nominal set.
    double backoff = 1e-6;
    /// Per-row positive scaling factors; empty means all ones.
    std::vector<double> alphas;
};

/// Largest sublevel value of ||x - x_bar||_P^2 contained in {c'x <= d}:
/// (d - c'x_bar)^2 / (c' P^-1 c). The sign follows the margin d - c'x_bar, so a
/// violated row yields a negative threshold.
double lyapunov_threshold(const Mat& P, const Vec& c, double d, const Vec& x_bar);

/// Reference-dependent ellipsoidal terminal set
///   T = {(x, r) : max_i alpha_i (||x - x_bar_r||_P^2 - Lambda_i(r)) <= 0}
/// built from the LQR pair (P, K) and the linearized constraint rows.
class TerminalSet {
public:
    /// P and K from the DARE with weights (Q, R). Q and R must be symmetric
    /// positive definite.
    static TerminalSet synthesize(const LtiModel& model, const Scene& scene, const Mat& Q, const Mat& R,
                                  TerminalOptions options = {});

    const Mat& P() const { return P_; }
    const Mat& K() const { return K_; }
    const Mat& Q() const { return Q_; }
    const Mat& R() const { return R_; }
    const LtiModel& model() const { return model_; }
    const Scene& scene() const { return scene_; }
    const std::vector<double>& alphas() const { return alphas_; }
    double backoff() const { return backoff_; }
    std::size_t num_rows() const { return alphas_.size(); }

    /// Obstacle half-spaces about x_bar_r, state box rows, then input rows
    /// under the terminal law. Offsets include the back-off. Throws
    /// PreconditionError unless r is strictly admissible.
    std::vector<Halfspace> constraint_rows(const Vec& r) const;

    /// Lambda_i(r) in row order, in closed form (no allocation of rows).
    Vec thresholds(const Vec& r) const;
    double min_threshold(const Vec& r) const { return thresholds(r).minCoeff(); }

    double lyapunov_value(const Vec& x, const Vec& r) const;
    double delta(const Vec& x, const Vec& r) const;

    /// delta(x, r) <= 0, evaluated row by row with early exit and no allocation
    /// beyond the equilibrium offset.
    bool contains(const Vec& x, const Vec& r) const;

    /// u = u_bar - K (x - x_bar), x_next = A x + B u.
    std::pair<Vec, Vec> step(const Vec& x, const Vec& r) const;

    /// Smallest eigenvalue of P - (A-BK)'P(A-BK) - Q - K'RK.
    double certificate_min_eigenvalue() const;

    /// Contraction factor of V along the terminal dynamics: V(x+) <= rho V(x).
    double contraction() const { return contraction_; }

private:
    Mat P_, K_, Q_, R_;
    Mat P_inv_;
    Mat pos_inv_;       // xi_map P^-1 xi_map'
    Vec input_inv_;     // diag(K P^-1 K')
    LtiModel model_;
    Scene scene_;
    std::vector<double> alphas_;
    double backoff_ = 0.0;
    double contraction_ = 1.0;
};

TerminalSet synthesize_terminal_ingredients(const LtiModel& model, const Scene& scene, const Mat& Q, const Mat& R);

}  // namespace pathfg
