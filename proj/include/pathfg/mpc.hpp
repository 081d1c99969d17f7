#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathfg/terminal.hpp"

namespace pathfg {

struct OcpOptions {
    double qp_tol = 1e-8;
    int qp_max_iter = 20000;
    /// Tightening of every linear stage and input row inside the QP. It should
    /// match the terminal-set back-off so that shifted solutions stay feasible.
    double constraint_backoff = 1e-6;
};

/// Linear tracking OCP over horizon N, condensed to the inputs:
///   min ||xi_N - x_bar||_P^2 + sum_i ||xi_i - x_bar||_Q^2 + ||mu_i - u_bar||_R^2
/// subject to the dynamics, linearized stage polytopes for xi_1..xi_{N-1},
/// the input box and the terminal set. xi_0 is the query state and xi_N is
/// constrained by the terminal set, which implies the stage constraints.
class OcpSpec {
public:
    OcpSpec(TerminalSet terminal, int horizon, OcpOptions options = {});

    const TerminalSet& terminal() const { return terminal_; }
    const LtiModel& model() const { return terminal_.model(); }
    const Scene& scene() const { return terminal_.scene(); }
    const Mat& Q() const { return terminal_.Q(); }
    const Mat& R() const { return terminal_.R(); }
    int horizon() const { return N_; }
    const OcpOptions& options() const { return options_; }

    /// Block i of the prediction xi_i = Phi_i x0 + Gamma_i U.
    const Mat& phi(int i) const { return phi_[static_cast<std::size_t>(i)]; }
    const Mat& gamma(int i) const { return gamma_[static_cast<std::size_t>(i)]; }

    /// Condensed cost Hessian over the stacked inputs.
    const Mat& hessian() const { return hessian_; }
    /// L' Gamma_N with P = L L', the terminal ellipsoid in input coordinates.
    const Mat& terminal_rows() const { return terminal_rows_; }
    const Mat& terminal_factor() const { return terminal_factor_; }

    /// Relative shrink of the terminal ellipsoid inside the QP. The terminal
    /// dynamics contract V by more than this, so shifted solutions remain
    /// feasible while the exact membership check keeps a margin against
    /// solver round-off.
    double terminal_shrink() const { return terminal_shrink_; }

private:
    TerminalSet terminal_;
    int N_;
    OcpOptions options_;
    std::vector<Mat> phi_;
    std::vector<Mat> gamma_;
    Mat hessian_;
    Mat terminal_factor_;
    Mat terminal_rows_;
    double terminal_shrink_ = 0.0;
};

/// Linearized free space for each stage 0..N: box rows followed by one
/// half-space per obstacle.
struct StagePolytopes {
    std::vector<std::vector<Halfspace>> stages;
    /// Full-state linearization point of each stage.
    std::vector<Vec> points;
};

enum class OcpStatus { feasible, infeasible };
std::string to_string(OcpStatus status);

struct OcpSolution {
    /// Row i is the predicted state xi_i (N+1 rows).
    Mat xi;
    /// Row i is the input mu_i (N rows).
    Mat mu;
    double cost = 0.0;
    OcpStatus status = OcpStatus::infeasible;
    double solve_time = 0.0;
    numkit::QpStatus qp_status = numkit::QpStatus::max_iter;
    int qp_iterations = 0;
    /// Number of tighter re-solves needed to pass the exact membership check.
    int backoffs = 0;
    /// Delta(xi_N, r) of the returned trajectory.
    double terminal_delta = 0.0;
    std::string message;

    bool feasible() const { return status == OcpStatus::feasible; }
    int horizon() const { return static_cast<int>(mu.rows()); }
};

/// Stage i is linearized about prev.xi[i + 1] (stage N reuses prev.xi[N]);
/// without a previous solution every stage uses x0.
StagePolytopes linearize_constraints(const OcpSpec& spec, const OcpSolution* prev, const Vec& x0);

/// Linearization about arbitrary per-stage points (N+1 full states).
StagePolytopes linearize_about(const OcpSpec& spec, const std::vector<Vec>& points);

/// Points on the straight segment from the position of x0 to r, as equilibrium states.
std::vector<Vec> straight_line_points(const OcpSpec& spec, const Vec& x0, const Vec& r);

OcpSolution solve_ocp(const OcpSpec& spec, const Vec& x0, const Vec& r, const StagePolytopes& polytopes,
                      const std::optional<Vec>& warm_start = std::nullopt);

/// Linearize about x0, solve, re-linearize about the solution and solve again.
OcpSolution solve_ocp_bootstrap(const OcpSpec& spec, const Vec& x0, const Vec& r);

/// Stacked input guess: previous inputs shifted by one, last filled by the terminal law.
Vec shifted_warm_start(const OcpSpec& spec, const OcpSolution& prev, const Vec& r);

/// mu_0 of a feasible solution.
Vec mpc_feedback(const OcpSolution& solution);

/// Feasibility of (x0, r): solve with constraints linearized along the
/// straight segment to r; if that fails, linearize about x0 and re-linearize
/// once about the resulting trajectory.
bool is_feasible(const OcpSpec& spec, const Vec& x0, const Vec& r);

}  // namespace pathfg
