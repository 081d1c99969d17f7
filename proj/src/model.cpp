#include "pathfg/model.hpp"

#include <cmath>

namespace pathfg {

std::pair<Mat, Mat> discretize_zoh(const Mat& Ac, const Mat& Bc, double Ts) {
    if (!(Ts > 0.0)) throw PreconditionError("discretize_zoh: Ts must be positive");
    if (Ac.rows() != Ac.cols()) throw DimensionError("discretize_zoh: Ac must be square");
    if (Bc.rows() != Ac.rows()) throw DimensionError("discretize_zoh: Bc row count must match Ac");
    const Eigen::Index n = Ac.rows();
    const Eigen::Index m = Bc.cols();
    Mat aug = Mat::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = Ac * Ts;
    aug.topRightCorner(n, m) = Bc * Ts;
    const Mat e = numkit::expm(aug);
    return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

LtiModel LtiModel::from_discrete(Mat A, Mat B, double Ts, Mat xi_map, Vec input_trim) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n) throw DimensionError("LtiModel: A must be square and B must have n_x rows");
    if (xi_map.cols() != n) throw DimensionError("LtiModel: xi_map must have n_x columns");
    if (!(Ts > 0.0)) throw PreconditionError("LtiModel: Ts must be positive");

    LtiModel model;
    model.A = std::move(A);
    model.B = std::move(B);
    model.Ts = Ts;
    model.xi_map = std::move(xi_map);
    const Eigen::Index nu = model.B.cols();
    model.input_trim = input_trim.size() == 0 ? Vec::Zero(nu) : std::move(input_trim);
    if (model.input_trim.size() != nu) throw DimensionError("LtiModel: input_trim must have n_u entries");

    Mat Z(n, n + nu);
    Z << model.A - Mat::Identity(n, n), model.B;
    const Mat kernel = numkit::kernel_basis(Z);
    if (kernel.cols() == 0) throw PreconditionError("LtiModel: [A - I, B] has a trivial kernel");

    // Minimum-norm combination of kernel vectors whose position part is the identity.
    const Mat position_part = model.xi_map * kernel.topRows(n);
    const Mat coeffs = position_part.completeOrthogonalDecomposition().pseudoInverse();
    const Mat G = kernel * coeffs;
    if ((model.xi_map * G.topRows(n) - Mat::Identity(model.np(), model.np())).norm() > 1e-9)
        throw PreconditionError("LtiModel: equilibrium manifold cannot be parameterized by position");
    model.Gx = G.topRows(n);
    model.Gu = G.bottomRows(nu);
    // Clean round-off so exact structure (e.g. Gx = xi_map') survives.
    model.Gx = model.Gx.unaryExpr([](double v) { return std::abs(v) < 1e-13 ? 0.0 : v; });
    model.Gu = model.Gu.unaryExpr([](double v) { return std::abs(v) < 1e-13 ? 0.0 : v; });

    // Stabilizability check.
    numkit::solve_dare(model.A, model.B, Mat::Identity(n, n), Mat::Identity(nu, nu));
    return model;
}

void QuadrotorParams::validate() const {
    if (!(mass_kg > 0.0)) throw PreconditionError("QuadrotorParams: mass must be positive");
    if (!(Ts > 0.0)) throw PreconditionError("QuadrotorParams: Ts must be positive");
    if (!std::isfinite(gravity_mps2)) throw PreconditionError("QuadrotorParams: gravity must be finite");
}

double QuadrotorParams::hover_thrust() const { return mass_kg * std::abs(gravity_mps2); }

std::pair<Mat, Mat> quadrotor_continuous(const QuadrotorParams& params) {
    params.validate();
    const double g = params.gravity_mps2;
    Mat Ac = Mat::Zero(9, 9);
    Ac.block(0, 3, 3, 3).setIdentity();
    Mat G = Mat::Zero(3, 3);
    G(0, 1) = g;
    G(1, 0) = -g;
    Ac.block(3, 6, 3, 3) = G;
    Mat Bc = Mat::Zero(9, 4);
    Bc(5, 0) = 1.0 / params.mass_kg;
    Bc.block(6, 1, 3, 3).setIdentity();
    return {Ac, Bc};
}

LtiModel build_quadrotor_model(const QuadrotorParams& params) {
    auto [Ac, Bc] = quadrotor_continuous(params);
    auto [A, B] = discretize_zoh(Ac, Bc, params.Ts);
    Mat xi = Mat::Zero(3, 9);
    xi.leftCols(3).setIdentity();
    Vec trim = Vec::Zero(4);
    trim(0) = params.hover_thrust();
    return LtiModel::from_discrete(std::move(A), std::move(B), params.Ts, std::move(xi), std::move(trim));
}

Equilibrium equilibrium_for_reference(const LtiModel& model, const Vec& r) {
    if (r.size() != model.nr()) throw DimensionError("equilibrium_for_reference: r must have n_r entries");
    return {model.Gx * r, model.Gu * r};
}

double kernel_residual(const LtiModel& model) {
    const Eigen::Index n = model.nx();
    return ((model.A - Mat::Identity(n, n)) * model.Gx + model.B * model.Gu).norm();
}

}  // namespace pathfg
