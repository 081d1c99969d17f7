#include "pathfg/terminal.hpp"

#include <cmath>
#include <limits>

namespace pathfg {

double lyapunov_threshold(const Mat& P, const Vec& c, double d, const Vec& x_bar) {
    if (c.size() != P.rows() || x_bar.size() != P.rows()) throw DimensionError("lyapunov_threshold: dimension mismatch");
    if (!(c.norm() > 0.0)) throw PreconditionError("lyapunov_threshold: constraint normal is zero");
    const double margin = d - c.dot(x_bar);
    const double weight = c.dot(P.ldlt().solve(c));
    return std::copysign(margin * margin / weight, margin);
}

namespace {

double signed_ratio(double margin, double weight) {
    if (weight <= 0.0) return margin >= 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    return std::copysign(margin * margin / weight, margin);
}

}  // namespace

TerminalSet TerminalSet::synthesize(const LtiModel& model, const Scene& scene, const Mat& Q, const Mat& R,
                                    TerminalOptions options) {
    scene.validate();
    if (scene.nx() != model.nx() || scene.nu() != model.nu()) throw DimensionError("TerminalSet: scene and model disagree");
    if (!numkit::is_symmetric(Q) || numkit::min_eigenvalue_symmetric(Q) <= 0.0)
        throw PreconditionError("TerminalSet: Q must be symmetric positive definite");
    if (!numkit::is_symmetric(R) || numkit::min_eigenvalue_symmetric(R) <= 0.0)
        throw PreconditionError("TerminalSet: R must be symmetric positive definite");
    if (!(options.backoff >= 0.0)) throw PreconditionError("TerminalSet: backoff must be nonnegative");

    const numkit::DareResult dare = numkit::solve_dare(model.A, model.B, Q, R);
    TerminalSet ts;
    ts.P_ = dare.P;
    ts.K_ = dare.K;
    ts.Q_ = Q;
    ts.R_ = R;
    ts.model_ = model;
    ts.scene_ = scene;
    ts.backoff_ = options.backoff;

    Eigen::LLT<Mat> llt(ts.P_);
    if (llt.info() != Eigen::Success) throw PreconditionError("TerminalSet: P is not positive definite");
    ts.P_inv_ = llt.solve(Mat::Identity(model.nx(), model.nx()));
    ts.P_inv_ = 0.5 * (ts.P_inv_ + ts.P_inv_.transpose());
    ts.pos_inv_ = scene.xi_map * ts.P_inv_ * scene.xi_map.transpose();
    ts.input_inv_ = (ts.K_ * ts.P_inv_ * ts.K_.transpose()).diagonal();

    const std::size_t rows = scene.obstacles.size() + 2 * static_cast<std::size_t>(model.nx() + model.nu());
    if (options.alphas.empty()) options.alphas.assign(rows, 1.0);
    if (options.alphas.size() != rows) throw DimensionError("TerminalSet: one alpha per constraint row is required");
    for (double a : options.alphas)
        if (!(a > 0.0)) throw PreconditionError("TerminalSet: alphas must be positive");
    ts.alphas_ = std::move(options.alphas);

    if (ts.certificate_min_eigenvalue() < -1e-6)
        throw numkit::DareError("TerminalSet: terminal cost decrease certificate failed", dare.residual);

    // V(x+) = V(x) - e'(Q + K'RK)e <= (1 - lambda_min(L^-1 (Q + K'RK) L^-T)) V(x), with P = L L'.
    const Mat W = Q + ts.K_.transpose() * R * ts.K_;
    const Mat L = llt.matrixL();
    const Mat Linv = L.triangularView<Eigen::Lower>().solve(Mat::Identity(model.nx(), model.nx()));
    ts.contraction_ = 1.0 - numkit::min_eigenvalue_symmetric(Linv * W * Linv.transpose());
    return ts;
}

double TerminalSet::certificate_min_eigenvalue() const {
    const Mat Acl = model_.A - model_.B * K_;
    const Mat M = P_ - Acl.transpose() * P_ * Acl - Q_ - K_.transpose() * R_ * K_;
    return numkit::min_eigenvalue_symmetric(M);
}

std::vector<Halfspace> TerminalSet::constraint_rows(const Vec& r) const {
    if (!is_reference_strictly_admissible(scene_, model_, r))
        throw PreconditionError("TerminalSet: reference is not strictly admissible");
    const Equilibrium eq = equilibrium_for_reference(model_, r);
    const Eigen::Index nx = model_.nx();
    const Eigen::Index nu = model_.nu();
    std::vector<Halfspace> rows;
    rows.reserve(num_rows());
    for (const auto& o : scene_.obstacles) {
        Halfspace h = halfspace_approximation(o, scene_.agent_radius, scene_.xi_map, eq.x_bar);
        h.offset -= backoff_;
        rows.push_back(std::move(h));
    }
    for (Eigen::Index j = 0; j < nx; ++j) {
        rows.push_back({Vec::Unit(nx, j), scene_.x_max(j) - backoff_});
        rows.push_back({-Vec::Unit(nx, j), -scene_.x_min(j) - backoff_});
    }
    for (Eigen::Index j = 0; j < nu; ++j) {
        const Vec k = K_.row(j).transpose();
        const double kx = k.dot(eq.x_bar);
        rows.push_back({-k, scene_.u_max(j) - eq.u_bar(j) - kx - backoff_});
        rows.push_back({k, -scene_.u_min(j) + eq.u_bar(j) + kx - backoff_});
    }
    return rows;
}

Vec TerminalSet::thresholds(const Vec& r) const {
    const Equilibrium eq = equilibrium_for_reference(model_, r);
    const Eigen::Index nx = model_.nx();
    const Eigen::Index nu = model_.nu();
    Vec out(static_cast<Eigen::Index>(num_rows()));
    Eigen::Index i = 0;
    const Vec pos = scene_.xi_map * eq.x_bar;
    for (const auto& o : scene_.obstacles) {
        const Vec d = o.center - pos;
        const double n = d.norm();
        if (!(n > 0.0)) throw PreconditionError("TerminalSet: reference at an obstacle center");
        const Vec unit = d / n;
        const double margin = n - scene_.agent_radius - o.radius - backoff_;
        out(i++) = signed_ratio(margin, unit.dot(pos_inv_ * unit));
    }
    for (Eigen::Index j = 0; j < nx; ++j) {
        const double w = P_inv_(j, j);
        out(i++) = signed_ratio(scene_.x_max(j) - backoff_ - eq.x_bar(j), w);
        out(i++) = signed_ratio(eq.x_bar(j) - scene_.x_min(j) - backoff_, w);
    }
    for (Eigen::Index j = 0; j < nu; ++j) {
        const double w = input_inv_(j);
        out(i++) = signed_ratio(scene_.u_max(j) - backoff_ - eq.u_bar(j), w);
        out(i++) = signed_ratio(eq.u_bar(j) - scene_.u_min(j) - backoff_, w);
    }
    return out;
}

double TerminalSet::lyapunov_value(const Vec& x, const Vec& r) const {
    const Vec e = x - model_.Gx * r;
    return e.dot(P_ * e);
}

double TerminalSet::delta(const Vec& x, const Vec& r) const {
    if (x.size() != model_.nx()) throw DimensionError("TerminalSet::delta: state has wrong dimension");
    const double V = lyapunov_value(x, r);
    const Vec lambda = thresholds(r);
    double out = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        out = std::max(out, alphas_[static_cast<std::size_t>(i)] * (V - lambda(i)));
    return out;
}

bool TerminalSet::contains(const Vec& x, const Vec& r) const {
    if (x.size() != model_.nx()) throw DimensionError("TerminalSet::contains: state has wrong dimension");
    thread_local Vec x_bar, u_bar, e, pe, pos, d;
    x_bar.noalias() = model_.Gx * r;
    u_bar.noalias() = model_.Gu * r;
    e = x - x_bar;
    pe.noalias() = P_ * e;
    const double V = e.dot(pe);
    // With positive alphas, delta <= 0 iff V <= Lambda_i for every row.
    const auto fits = [V](double margin, double weight) {
        if (margin < 0.0) return false;
        return V * weight <= margin * margin;
    };
    const Eigen::Index nx = model_.nx();
    for (Eigen::Index j = 0; j < nx; ++j) {
        const double w = P_inv_(j, j);
        if (!fits(scene_.x_max(j) - backoff_ - x_bar(j), w) || !fits(x_bar(j) - scene_.x_min(j) - backoff_, w)) return false;
    }
    for (Eigen::Index j = 0; j < model_.nu(); ++j) {
        const double w = input_inv_(j);
        if (!fits(scene_.u_max(j) - backoff_ - u_bar(j), w) || !fits(u_bar(j) - scene_.u_min(j) - backoff_, w)) return false;
    }
    pos.noalias() = scene_.xi_map * x_bar;
    for (const auto& o : scene_.obstacles) {
        d = o.center - pos;
        const double n = d.norm();
        if (!(n > 0.0)) throw PreconditionError("TerminalSet: reference at an obstacle center");
        const double margin = n - scene_.agent_radius - o.radius - backoff_;
        e.noalias() = pos_inv_ * d;
        if (!fits(margin, d.dot(e) / (n * n))) return false;
    }
    return true;
}

std::pair<Vec, Vec> TerminalSet::step(const Vec& x, const Vec& r) const {
    const Equilibrium eq = equilibrium_for_reference(model_, r);
    Vec u = eq.u_bar - K_ * (x - eq.x_bar);
    Vec x_next = model_.step(x, u);
    return {std::move(x_next), std::move(u)};
}

TerminalSet synthesize_terminal_ingredients(const LtiModel& model, const Scene& scene, const Mat& Q, const Mat& R) {
    return TerminalSet::synthesize(model, scene, Q, R);
}

}  // namespace pathfg
