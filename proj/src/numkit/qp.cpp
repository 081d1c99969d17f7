// Operator-splitting QP solver.
//
// The problem is rewritten as  min 0.5 x'Px + q'x  s.t.  Ax = z,  z in C,  where
// C is a product of intervals [l_i, u_i] (inequality and equality rows) and
// Euclidean balls (second-order blocks). Iterations follow the standard ADMM
// splitting with over-relaxation, Ruiz equilibration, adaptive step size and a
// final active-set polish on the unscaled problem.

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathfg/numkit.hpp"

namespace pathfg::numkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqFactor = 1e3;
constexpr double kPrimalInfeasTol = 1e-5;
constexpr int kAdaptInterval = 50;

double limit_scaling(double v) {
    if (v < kMinScaling) return 1.0;
    return std::min(v, kMaxScaling);
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct BallBlock {
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
    Vec center;
    double radius = 0.0;
};

// Stacked constraint representation shared by the scaled and unscaled views.
struct Stacked {
    Mat A;
    Vec l;  // box rows only; length = num_box
    Vec u;
    Eigen::Index num_ineq = 0;
    Eigen::Index num_eq = 0;
    Eigen::Index num_box = 0;
    std::vector<BallBlock> balls;
};

Stacked stack_constraints(const QpProblem& p) {
    Stacked s;
    const Eigen::Index n = p.num_variables();
    s.num_ineq = p.ineq_rows.rows();
    s.num_eq = p.eq_rows.rows();
    s.num_box = s.num_ineq + s.num_eq;
    Eigen::Index ball_rows = 0;
    for (const auto& b : p.balls) ball_rows += b.rows.rows();

    s.A.resize(s.num_box + ball_rows, n);
    s.l.resize(s.num_box);
    s.u.resize(s.num_box);
    if (s.num_ineq > 0) {
        s.A.topRows(s.num_ineq) = p.ineq_rows;
        s.l.head(s.num_ineq).setConstant(-kInf);
        s.u.head(s.num_ineq) = p.ineq_rhs;
    }
    if (s.num_eq > 0) {
        s.A.middleRows(s.num_ineq, s.num_eq) = p.eq_rows;
        s.l.segment(s.num_ineq, s.num_eq) = p.eq_rhs;
        s.u.segment(s.num_ineq, s.num_eq) = p.eq_rhs;
    }
    Eigen::Index offset = s.num_box;
    for (const auto& b : p.balls) {
        const Eigen::Index k = b.rows.rows();
        s.A.middleRows(offset, k) = b.rows;
        s.balls.push_back({offset, k, b.center, b.radius});
        offset += k;
    }
    return s;
}

void project(const Stacked& s, Vec& v) {
    for (Eigen::Index i = 0; i < s.num_box; ++i) v(i) = std::clamp(v(i), s.l(i), s.u(i));
    for (const auto& b : s.balls) {
        auto seg = v.segment(b.offset, b.size);
        Vec w = seg - b.center;
        const double norm = w.norm();
        if (norm > b.radius) seg = b.center + w * (b.radius / norm);
    }
}

// Support function of C at y; +inf when unbounded in direction y.
double support(const Stacked& s, const Vec& y) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < s.num_box; ++i) {
        if (y(i) > 0.0) {
            if (std::isinf(s.u(i))) return kInf;
            value += s.u(i) * y(i);
        } else if (y(i) < 0.0) {
            if (std::isinf(s.l(i))) return kInf;
            value += s.l(i) * y(i);
        }
    }
    for (const auto& b : s.balls) {
        auto seg = y.segment(b.offset, b.size);
        value += seg.dot(b.center) + b.radius * seg.norm();
    }
    return value;
}

struct Scaling {
    Vec D;  // variables
    Vec E;  // constraint rows
    double c = 1.0;
};

Scaling ruiz_equilibrate(Mat& P, Vec& q, Stacked& s, int iterations) {
    const Eigen::Index n = P.rows();
    const Eigen::Index m = s.A.rows();
    Scaling sc{Vec::Ones(n), Vec::Ones(m), 1.0};
    for (int it = 0; it < iterations; ++it) {
        Vec d_tmp(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double norm = P.col(j).cwiseAbs().maxCoeff();
            if (m > 0) norm = std::max(norm, s.A.col(j).cwiseAbs().maxCoeff());
            d_tmp(j) = 1.0 / std::sqrt(limit_scaling(norm));
        }
        Vec e_tmp(m);
        for (Eigen::Index i = 0; i < m; ++i) e_tmp(i) = 1.0 / std::sqrt(limit_scaling(s.A.row(i).cwiseAbs().maxCoeff()));
        // A ball must stay a ball: one scale per block.
        for (const auto& b : s.balls) {
            double norm = 0.0;
            for (Eigen::Index i = b.offset; i < b.offset + b.size; ++i)
                norm = std::max(norm, s.A.row(i).cwiseAbs().maxCoeff());
            e_tmp.segment(b.offset, b.size).setConstant(1.0 / std::sqrt(limit_scaling(norm)));
        }

        P = d_tmp.asDiagonal() * P * d_tmp.asDiagonal();
        q = d_tmp.cwiseProduct(q);
        s.A = e_tmp.asDiagonal() * s.A * d_tmp.asDiagonal();
        sc.D = sc.D.cwiseProduct(d_tmp);
        sc.E = sc.E.cwiseProduct(e_tmp);

        double mean_col = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) mean_col += P.col(j).cwiseAbs().maxCoeff();
        mean_col /= static_cast<double>(std::max<Eigen::Index>(n, 1));
        const double cost_tmp = 1.0 / limit_scaling(std::max(mean_col, inf_norm(q)));
        P *= cost_tmp;
        q *= cost_tmp;
        sc.c *= cost_tmp;
    }
    for (Eigen::Index i = 0; i < s.num_box; ++i) {
        s.l(i) *= sc.E(i);
        s.u(i) *= sc.E(i);
    }
    for (auto& b : s.balls) {
        const double e = sc.E(b.offset);
        b.center *= e;
        b.radius *= e;
    }
    return sc;
}

Vec rho_vector(const Stacked& s, double rho) {
    Vec r = Vec::Constant(s.A.rows(), rho);
    for (Eigen::Index i = 0; i < s.num_box; ++i) {
        if (std::isinf(s.l(i)) && std::isinf(s.u(i)))
            r(i) = kRhoMin;
        else if (s.u(i) - s.l(i) < 1e-12)
            r(i) = kRhoEqFactor * rho;
    }
    return r;
}

struct SplitDuals {
    Vec ineq;
    Vec eq;
    std::vector<Vec> ball;
};

SplitDuals split_duals(const QpProblem& p, const Stacked& s, const Vec& y) {
    SplitDuals d;
    d.ineq = y.head(s.num_ineq);
    d.eq = y.segment(s.num_ineq, s.num_eq);
    for (const auto& b : s.balls) d.ball.push_back(y.segment(b.offset, b.size));
    (void)p;
    return d;
}

double objective(const QpProblem& p, const Vec& x) {
    return 0.5 * x.dot(p.hessian * x) + p.linear_term.dot(x);
}

// Active-set polish on the unscaled problem. Balls are only allowed when
// inactive; the caller guarantees that.
bool polish(const QpProblem& p, const Stacked& s, const Vec& z_scaled, const Vec& y_scaled,
            const Stacked& scaled, double tol, Vec& x_out, Vec& y_out) {
    const Eigen::Index n = p.num_variables();
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < s.num_box; ++i) {
        const bool eq = i >= s.num_ineq;
        const bool upper = scaled.u(i) - z_scaled(i) < y_scaled(i);
        if (eq || upper) active.push_back(i);
    }
    const auto na = static_cast<Eigen::Index>(active.size());
    Mat A_act(na, n);
    Vec b_act(na);
    for (Eigen::Index k = 0; k < na; ++k) {
        A_act.row(k) = s.A.row(active[k]);
        b_act(k) = s.u(active[k]);
    }

    const double delta = 1e-10;
    Mat kkt = Mat::Zero(n + na, n + na);
    kkt.topLeftCorner(n, n) = p.hessian;
    kkt.topRightCorner(n, na) = A_act.transpose();
    kkt.bottomLeftCorner(na, n) = A_act;
    Mat kkt_reg = kkt;
    kkt_reg.topLeftCorner(n, n).diagonal().array() += delta;
    kkt_reg.bottomRightCorner(na, na).diagonal().array() -= delta;
    Vec rhs(n + na);
    rhs << -p.linear_term, b_act;

    Eigen::PartialPivLU<Mat> lu(kkt_reg);
    Vec sol = lu.solve(rhs);
    for (int refine = 0; refine < 5; ++refine) sol += lu.solve(rhs - kkt * sol);
    if (!sol.allFinite()) return false;

    Vec x = sol.head(n);
    Vec y = Vec::Zero(s.A.rows());
    for (Eigen::Index k = 0; k < na; ++k) y(active[k]) = sol(n + k);

    const double feas_tol = tol * (1.0 + inf_norm(s.u.head(s.num_ineq)));
    if (s.num_ineq > 0) {
        Vec slack = p.ineq_rhs - p.ineq_rows * x;
        if (slack.minCoeff() < -feas_tol) return false;
        if (y.head(s.num_ineq).minCoeff() < -tol) return false;
    }
    for (const auto& b : s.balls)
        if ((s.A.middleRows(b.offset, b.size) * x - b.center).norm() > b.radius) return false;

    x_out = x;
    y_out = y;
    return true;
}

}  // namespace

std::string to_string(QpStatus status) {
    switch (status) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::infeasible: return "infeasible";
        case QpStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

void QpProblem::validate() const {
    const Eigen::Index n = linear_term.size();
    if (hessian.rows() != n || hessian.cols() != n)
        throw DimensionError("solve_qp: hessian must be n x n with n = size of linear_term");
    if (ineq_rows.rows() != ineq_rhs.size() || (ineq_rows.rows() > 0 && ineq_rows.cols() != n))
        throw DimensionError("solve_qp: inequality rows/rhs mismatch");
    if (eq_rows.rows() != eq_rhs.size() || (eq_rows.rows() > 0 && eq_rows.cols() != n))
        throw DimensionError("solve_qp: equality rows/rhs mismatch");
    for (const auto& b : balls) {
        if (b.rows.cols() != n || b.rows.rows() != b.center.size())
            throw DimensionError("solve_qp: ball block rows/center mismatch");
        if (!(b.radius >= 0.0)) throw PreconditionError("solve_qp: ball radius must be nonnegative");
    }
    if (!hessian.allFinite() || !linear_term.allFinite())
        throw PreconditionError("solve_qp: non-finite cost data");
    if (!is_symmetric(hessian, 1e-9)) throw PreconditionError("solve_qp: hessian is not symmetric");
    if (n > 0 && min_eigenvalue_symmetric(hessian) < -1e-9)
        throw PreconditionError("solve_qp: hessian is not positive semidefinite");
}

KktResiduals kkt_residuals(const QpProblem& p, const Vec& x, const Vec& dual_ineq, const Vec& dual_eq,
                           const std::vector<Vec>& dual_ball) {
    KktResiduals r;
    Vec grad = p.hessian * x + p.linear_term;
    if (p.ineq_rows.rows() > 0) {
        Vec slack = p.ineq_rhs - p.ineq_rows * x;
        r.primal = std::max(r.primal, std::max(0.0, -slack.minCoeff()));
        grad += p.ineq_rows.transpose() * dual_ineq;
        for (Eigen::Index i = 0; i < slack.size(); ++i)
            r.complementarity = std::max(r.complementarity, std::abs(dual_ineq(i) * slack(i)));
        r.dual = std::max(r.dual, std::max(0.0, -dual_ineq.minCoeff()));
    }
    if (p.eq_rows.rows() > 0) {
        r.primal = std::max(r.primal, inf_norm(p.eq_rows * x - p.eq_rhs));
        grad += p.eq_rows.transpose() * dual_eq;
    }
    for (std::size_t k = 0; k < p.balls.size(); ++k) {
        const auto& b = p.balls[k];
        const double dist = (b.rows * x - b.center).norm();
        r.primal = std::max(r.primal, std::max(0.0, dist - b.radius));
        grad += b.rows.transpose() * dual_ball[k];
        r.complementarity = std::max(r.complementarity, std::abs(dual_ball[k].norm() * (b.radius - dist)));
    }
    r.dual = std::max(r.dual, inf_norm(grad));
    return r;
}

QpSolution solve_qp(const QpProblem& problem, double tol, int max_iter) {
    QpSettings settings;
    settings.tol = tol;
    settings.max_iter = max_iter;
    return solve_qp(problem, settings);
}

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings) {
    problem.validate();
    if (!(settings.tol > 0.0)) throw PreconditionError("solve_qp: tol must be positive");
    const Eigen::Index n = problem.num_variables();
    const double tol = settings.tol;

    const Stacked original = stack_constraints(problem);
    Stacked s = original;
    Mat P = problem.hessian;
    Vec q = problem.linear_term;
    const Scaling sc = ruiz_equilibrate(P, q, s, settings.scaling_iters);
    const Eigen::Index m = s.A.rows();
    const Vec D_inv = sc.D.cwiseInverse();
    const Vec E_inv = sc.E.cwiseInverse();

    double rho = settings.rho;
    Vec rho_vec = rho_vector(s, rho);
    auto factor = [&](const Vec& rv) {
        Mat K = P + s.A.transpose() * rv.asDiagonal() * s.A;
        K.diagonal().array() += settings.sigma;
        return Eigen::LLT<Mat>(K);
    };
    Eigen::LLT<Mat> llt = factor(rho_vec);

    Vec x = Vec::Zero(n);
    if (settings.initial_primal) {
        if (settings.initial_primal->size() != n) throw DimensionError("solve_qp: initial primal size mismatch");
        x = D_inv.cwiseProduct(*settings.initial_primal);
    }
    Vec z = s.A * x;
    project(s, z);
    Vec y = Vec::Zero(m);
    Vec y_prev = y;

    QpSolution sol;
    sol.status = QpStatus::max_iter;
    double prim_res = kInf;
    double dual_res = kInf;
    int iter = 0;
    for (iter = 1; iter <= settings.max_iter; ++iter) {
        y_prev = y;
        Vec rhs = settings.sigma * x - q + s.A.transpose() * (rho_vec.cwiseProduct(z) - y);
        Vec x_tilde = llt.solve(rhs);
        Vec z_tilde = s.A * x_tilde;
        x = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
        Vec z_relaxed = settings.alpha * z_tilde + (1.0 - settings.alpha) * z;
        Vec z_next = z_relaxed + y.cwiseQuotient(rho_vec);
        project(s, z_next);
        y += rho_vec.cwiseProduct(z_relaxed - z_next);
        z = std::move(z_next);

        const bool check = iter % settings.check_every == 0 || iter == settings.max_iter;
        if (!check) continue;

        const Vec Ax = s.A * x;
        const Vec Px = P * x;
        const Vec Aty = s.A.transpose() * y;
        prim_res = m > 0 ? inf_norm(E_inv.cwiseProduct(Ax - z)) : 0.0;
        dual_res = inf_norm(D_inv.cwiseProduct(Px + q + Aty)) / sc.c;
        const double eps_prim =
            tol + tol * (m > 0 ? std::max(inf_norm(E_inv.cwiseProduct(Ax)), inf_norm(E_inv.cwiseProduct(z))) : 0.0);
        const double eps_dual =
            tol + tol / sc.c *
                      std::max({inf_norm(D_inv.cwiseProduct(Px)), inf_norm(D_inv.cwiseProduct(Aty)),
                                inf_norm(D_inv.cwiseProduct(q))});
        if (prim_res <= eps_prim && dual_res <= eps_dual) {
            sol.status = QpStatus::optimal;
            break;
        }

        if (m > 0) {
            const Vec dy = y - y_prev;
            const Vec dy_unscaled = sc.E.cwiseProduct(dy);
            const double dy_norm = inf_norm(dy_unscaled);
            if (dy_norm > 1e-30) {
                const double at_dy = inf_norm(D_inv.cwiseProduct(s.A.transpose() * dy));
                const double supp = support(original, dy_unscaled);
                if (at_dy <= kPrimalInfeasTol * dy_norm && supp <= -kPrimalInfeasTol * dy_norm) {
                    sol.status = QpStatus::infeasible;
                    sol.infeasibility_residual = at_dy / dy_norm;
                    break;
                }
            }
        }

        if (settings.adaptive_rho && m > 0 && iter % kAdaptInterval == 0) {
            const double prim_scale = std::max(inf_norm(Ax), inf_norm(z));
            const double dual_scale = std::max({inf_norm(Px), inf_norm(Aty), inf_norm(q)});
            const double prim_rel = inf_norm(Ax - z) / (prim_scale + 1e-30);
            const double dual_rel = inf_norm(Px + q + Aty) / (dual_scale + 1e-30);
            double rho_new = rho * std::sqrt(prim_rel / (dual_rel + 1e-30));
            rho_new = std::clamp(rho_new, kRhoMin, kRhoMax);
            if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
                rho = rho_new;
                rho_vec = rho_vector(s, rho);
                llt = factor(rho_vec);
            }
        }
    }
    sol.iterations = std::min(iter, settings.max_iter);

    Vec x_out = sc.D.cwiseProduct(x);
    Vec y_out = sc.E.cwiseProduct(y) / sc.c;

    if (sol.status == QpStatus::optimal && settings.polish && original.num_box > 0) {
        bool balls_inactive = true;
        for (const auto& b : s.balls) {
            if ((z.segment(b.offset, b.size) - b.center).norm() >= b.radius * (1.0 - 1e-9)) balls_inactive = false;
        }
        if (balls_inactive) {
            Vec x_pol;
            Vec y_pol;
            if (polish(problem, original, z, y, s, tol, x_pol, y_pol)) {
                const auto d_admm = split_duals(problem, original, y_out);
                const auto d_pol = split_duals(problem, original, y_pol);
                const auto r_admm = kkt_residuals(problem, x_out, d_admm.ineq, d_admm.eq, d_admm.ball);
                const auto r_pol = kkt_residuals(problem, x_pol, d_pol.ineq, d_pol.eq, d_pol.ball);
                if (r_pol.primal <= std::max(r_admm.primal, tol) && r_pol.dual <= std::max(r_admm.dual, tol)) {
                    x_out = x_pol;
                    y_out = y_pol;
                    sol.polished = true;
                }
            }
        }
    }

    const auto duals = split_duals(problem, original, y_out);
    sol.primal = x_out;
    sol.dual_ineq = duals.ineq;
    sol.dual_eq = duals.eq;
    sol.dual_ball = duals.ball;
    sol.objective = objective(problem, x_out);
    const auto res = kkt_residuals(problem, x_out, duals.ineq, duals.eq, duals.ball);
    sol.primal_residual = res.primal;
    sol.dual_residual = res.dual;
    sol.complementarity = res.complementarity;
    return sol;
}

}  // namespace pathfg::numkit
