#include "pathfg/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace pathfg {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Vec> trajectory_rows(const Mat& xi) {
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(xi.rows()));
    for (Eigen::Index i = 0; i < xi.rows(); ++i) out.emplace_back(xi.row(i).transpose());
    return out;
}

// Checks the rolled-out trajectory against the nominal (not backed-off)
// constraints and the exact terminal set. Returns an empty string on success.
std::string verify(const OcpSpec& spec, const StagePolytopes& polytopes, const Vec& r, OcpSolution& sol) {
    const Scene& scene = spec.scene();
    const int N = spec.horizon();
    std::ostringstream why;
    for (int i = 1; i < N; ++i) {
        const Vec x = sol.xi.row(i).transpose();
        for (const auto& h : polytopes.stages[static_cast<std::size_t>(i)]) {
            if (h.slack(x) < 0.0) {
                why << "stage " << i << " violates a linearized row by " << -h.slack(x);
                return why.str();
            }
        }
    }
    for (int i = 0; i < N; ++i) {
        const Vec u = sol.mu.row(i).transpose();
        if (!is_input_admissible(scene, u).admissible) {
            why << "input " << i << " leaves the input box";
            return why.str();
        }
    }
    sol.terminal_delta = spec.terminal().delta(sol.xi.row(N).transpose(), r);
    if (sol.terminal_delta > 0.0) {
        why << "terminal state outside the terminal set (delta " << sol.terminal_delta << ")";
        return why.str();
    }
    return {};
}

}  // namespace

std::string to_string(OcpStatus status) { return status == OcpStatus::feasible ? "feasible" : "infeasible"; }

OcpSpec::OcpSpec(TerminalSet terminal, int horizon, OcpOptions options)
    : terminal_(std::move(terminal)), N_(horizon), options_(options) {
    if (N_ < 1) throw PreconditionError("OcpSpec: horizon must be at least 1");
    if (!(options_.qp_tol > 0.0)) throw PreconditionError("OcpSpec: qp_tol must be positive");
    if (options_.qp_max_iter < 1) throw PreconditionError("OcpSpec: qp_max_iter must be positive");
    if (!(options_.constraint_backoff >= 0.0)) throw PreconditionError("OcpSpec: constraint_backoff must be nonnegative");

    const LtiModel& m = terminal_.model();
    const Eigen::Index nx = m.nx();
    const Eigen::Index nu = m.nu();
    const Eigen::Index nU = nu * N_;
    phi_.assign(static_cast<std::size_t>(N_ + 1), Mat());
    gamma_.assign(static_cast<std::size_t>(N_ + 1), Mat());
    phi_[0] = Mat::Identity(nx, nx);
    gamma_[0] = Mat::Zero(nx, nU);
    for (int i = 1; i <= N_; ++i) {
        const auto k = static_cast<std::size_t>(i);
        phi_[k] = m.A * phi_[k - 1];
        gamma_[k] = m.A * gamma_[k - 1];
        gamma_[k].middleCols((i - 1) * nu, nu) = m.B;
    }

    hessian_ = Mat::Zero(nU, nU);
    for (int i = 1; i < N_; ++i) hessian_ += gamma(i).transpose() * Q() * gamma(i);
    hessian_ += gamma(N_).transpose() * terminal_.P() * gamma(N_);
    for (int i = 0; i < N_; ++i) hessian_.block(i * nu, i * nu, nu, nu) += R();
    hessian_ = 0.5 * (hessian_ + hessian_.transpose());

    terminal_factor_ = Eigen::LLT<Mat>(terminal_.P()).matrixL();
    terminal_rows_ = terminal_factor_.transpose() * gamma(N_);
    terminal_shrink_ = std::min(1e-4, 0.5 * (1.0 - terminal_.contraction()));
}

StagePolytopes linearize_about(const OcpSpec& spec, const std::vector<Vec>& points) {
    const int N = spec.horizon();
    if (static_cast<int>(points.size()) != N + 1) throw DimensionError("linearize_about: need N + 1 points");
    const Scene& scene = spec.scene();
    const Eigen::Index nx = scene.nx();
    StagePolytopes out;
    out.points = points;
    out.stages.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& rows = out.stages[i];
        rows.reserve(static_cast<std::size_t>(2 * nx) + scene.obstacles.size());
        for (Eigen::Index j = 0; j < nx; ++j) {
            rows.push_back({Vec::Unit(nx, j), scene.x_max(j)});
            rows.push_back({-Vec::Unit(nx, j), -scene.x_min(j)});
        }
        for (const auto& o : scene.obstacles)
            rows.push_back(halfspace_approximation(o, scene.agent_radius, scene.xi_map, points[i]));
    }
    return out;
}

StagePolytopes linearize_constraints(const OcpSpec& spec, const OcpSolution* prev, const Vec& x0) {
    const int N = spec.horizon();
    if (x0.size() != spec.model().nx()) throw DimensionError("linearize_constraints: x0 has wrong dimension");
    std::vector<Vec> points(static_cast<std::size_t>(N + 1), x0);
    if (prev != nullptr) {
        if (prev->horizon() != N || prev->xi.rows() != N + 1)
            throw DimensionError("linearize_constraints: previous solution has a different horizon");
        for (int i = 0; i <= N; ++i) points[static_cast<std::size_t>(i)] = prev->xi.row(std::min(i + 1, N)).transpose();
    }
    return linearize_about(spec, points);
}

std::vector<Vec> straight_line_points(const OcpSpec& spec, const Vec& x0, const Vec& r) {
    const int N = spec.horizon();
    const LtiModel& m = spec.model();
    const Vec p0 = m.xi_map * x0;
    std::vector<Vec> points;
    points.reserve(static_cast<std::size_t>(N + 1));
    points.push_back(x0);
    for (int i = 1; i <= N; ++i) {
        const double t = static_cast<double>(i) / N;
        points.push_back(m.Gx * ((1.0 - t) * p0 + t * r));
    }
    return points;
}

OcpSolution solve_ocp(const OcpSpec& spec, const Vec& x0, const Vec& r, const StagePolytopes& polytopes,
                      const std::optional<Vec>& warm_start) {
    const LtiModel& m = spec.model();
    const Scene& scene = spec.scene();
    const int N = spec.horizon();
    const Eigen::Index nu = m.nu();
    const Eigen::Index nU = nu * N;
    if (x0.size() != m.nx()) throw DimensionError("solve_ocp: x0 has wrong dimension");
    if (r.size() != m.nr()) throw DimensionError("solve_ocp: r has wrong dimension");
    if (static_cast<int>(polytopes.stages.size()) != N + 1) throw DimensionError("solve_ocp: need N + 1 stage polytopes");
    if (!is_reference_strictly_admissible(scene, m, r))
        throw PreconditionError("solve_ocp: reference is not strictly admissible");

    const Equilibrium eq = equilibrium_for_reference(m, r);
    const double tau = spec.options().constraint_backoff;

    numkit::QpProblem qp;
    qp.hessian = spec.hessian();
    qp.linear_term = Vec::Zero(nU);
    for (int i = 1; i <= N; ++i) {
        const Mat& W = i < N ? spec.Q() : spec.terminal().P();
        qp.linear_term += spec.gamma(i).transpose() * (W * (spec.phi(i) * x0 - eq.x_bar));
    }
    for (int i = 0; i < N; ++i) qp.linear_term.segment(i * nu, nu) -= spec.R() * eq.u_bar;

    Eigen::Index rows = 2 * nU;
    for (int i = 1; i < N; ++i) rows += static_cast<Eigen::Index>(polytopes.stages[static_cast<std::size_t>(i)].size());
    qp.ineq_rows = Mat::Zero(rows, nU);
    qp.ineq_rhs = Vec::Zero(rows);
    Eigen::Index row = 0;
    for (int i = 1; i < N; ++i) {
        const Vec free = spec.phi(i) * x0;
        for (const auto& h : polytopes.stages[static_cast<std::size_t>(i)]) {
            qp.ineq_rows.row(row) = h.normal.transpose() * spec.gamma(i);
            qp.ineq_rhs(row) = h.offset - tau - h.normal.dot(free);
            ++row;
        }
    }
    for (int i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < nu; ++j) {
            qp.ineq_rows(row, i * nu + j) = 1.0;
            qp.ineq_rhs(row++) = scene.u_max(j) - tau;
            qp.ineq_rows(row, i * nu + j) = -1.0;
            qp.ineq_rhs(row++) = -scene.u_min(j) - tau;
        }
    }
    qp.eq_rows = Mat::Zero(0, nU);
    qp.eq_rhs = Vec::Zero(0);

    const double lambda = spec.terminal().min_threshold(r);
    numkit::BallConstraint ball;
    ball.rows = spec.terminal_rows();
    ball.center = spec.terminal_factor().transpose() * (eq.x_bar - spec.phi(N) * x0);
    ball.radius = std::sqrt(std::max(0.0, (1.0 - spec.terminal_shrink()) * lambda));
    qp.balls.push_back(std::move(ball));

    numkit::QpSettings settings;
    settings.tol = spec.options().qp_tol;
    settings.max_iter = spec.options().qp_max_iter;
    if (warm_start && warm_start->size() == nU) settings.initial_primal = *warm_start;

    OcpSolution sol;
    const auto run = [&](const numkit::QpSettings& s) {
        const auto t0 = Clock::now();
        numkit::QpSolution q = numkit::solve_qp(qp, s);
        sol.solve_time += std::chrono::duration<double>(Clock::now() - t0).count();
        sol.qp_status = q.status;
        sol.qp_iterations += q.iterations;
        if (q.status == numkit::QpStatus::infeasible) {
            sol.message = "QP infeasible";
            return false;
        }
        sol.mu.resize(N, nu);
        sol.xi.resize(N + 1, m.nx());
        Vec x = x0;
        sol.xi.row(0) = x.transpose();
        double cost = 0.0;
        for (int i = 0; i < N; ++i) {
            const Vec u = q.primal.segment(i * nu, nu);
            sol.mu.row(i) = u.transpose();
            const Vec e = x - eq.x_bar;
            const Vec du = u - eq.u_bar;
            cost += e.dot(spec.Q() * e) + du.dot(spec.R() * du);
            x = m.step(x, u);
            sol.xi.row(i + 1) = x.transpose();
        }
        const Vec eN = x - eq.x_bar;
        sol.cost = cost + eN.dot(spec.terminal().P() * eN);
        sol.message = verify(spec, polytopes, r, sol);
        return sol.message.empty();
    };

    bool ok = run(settings);
    if (!ok && sol.qp_status != numkit::QpStatus::infeasible) {
        numkit::QpSettings tight = settings;
        tight.tol = settings.tol / 100.0;
        tight.max_iter = settings.max_iter * 2;
        sol.backoffs = 1;
        ok = run(tight);
    }
    sol.status = ok ? OcpStatus::feasible : OcpStatus::infeasible;
    return sol;
}

OcpSolution solve_ocp_bootstrap(const OcpSpec& spec, const Vec& x0, const Vec& r) {
    OcpSolution first = solve_ocp(spec, x0, r, linearize_constraints(spec, nullptr, x0));
    if (!first.feasible()) return first;
    const Vec warm = Eigen::Map<const Vec>(Mat(first.mu.transpose()).data(), first.mu.size());
    OcpSolution second = solve_ocp(spec, x0, r, linearize_about(spec, trajectory_rows(first.xi)), warm);
    second.solve_time += first.solve_time;
    if (!second.feasible()) {
        first.solve_time = second.solve_time;
        return first;
    }
    return second;
}

Vec shifted_warm_start(const OcpSpec& spec, const OcpSolution& prev, const Vec& r) {
    const int N = spec.horizon();
    const Eigen::Index nu = spec.model().nu();
    Vec out(nu * N);
    for (int i = 0; i + 1 < N; ++i) out.segment(i * nu, nu) = prev.mu.row(i + 1).transpose();
    out.segment((N - 1) * nu, nu) = spec.terminal().step(prev.xi.row(N).transpose(), r).second;
    return out;
}

Vec mpc_feedback(const OcpSolution& solution) {
    if (!solution.feasible()) throw PreconditionError("mpc_feedback: OCP solution is infeasible");
    return solution.mu.row(0).transpose();
}

bool is_feasible(const OcpSpec& spec, const Vec& x0, const Vec& r) {
    // Any linearization yields an inner approximation of the free space, so a
    // single feasible pass is already a witness.
    if (solve_ocp(spec, x0, r, linearize_about(spec, straight_line_points(spec, x0, r))).feasible()) return true;
    return solve_ocp_bootstrap(spec, x0, r).feasible();
}

}  // namespace pathfg
