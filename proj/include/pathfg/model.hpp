#pragma once

#include <utility>

#include "pathfg/numkit.hpp"

namespace pathfg {

using numkit::Mat;
using numkit::Vec;

/// Discrete-time LTI plant x+ = A x + B u together with a parameterization of
/// its equilibrium manifold: every reference r maps to the steady state
/// (Gx r, Gu r). `xi_map` extracts the position from a full state.
struct LtiModel {
    Mat A;
    Mat B;
    double Ts = 0.0;
    Mat Gx;
    Mat Gu;
    Mat xi_map;
    /// Absolute input at the linearization point. The plant works in deviation
    /// coordinates; this is only added back when reporting physical inputs.
    Vec input_trim;

    Eigen::Index nx() const { return A.rows(); }
    Eigen::Index nu() const { return B.cols(); }
    Eigen::Index nr() const { return Gx.cols(); }
    Eigen::Index np() const { return xi_map.rows(); }

    Vec step(const Vec& x, const Vec& u) const { return A * x + B * u; }

    /// Builds a model whose equilibrium basis spans ker [A - I, B], normalized
    /// so that xi_map * Gx = I (references are positions). Throws if the
    /// kernel cannot be normalized or (A, B) is not stabilizable.
    static LtiModel from_discrete(Mat A, Mat B, double Ts, Mat xi_map, Vec input_trim = {});
};

/// Zero-order-hold discretization via the exponential of [[Ac, Bc], [0, 0]] * Ts.
std::pair<Mat, Mat> discretize_zoh(const Mat& Ac, const Mat& Bc, double Ts);

/// Outer-loop quadrotor parameters. `gravity_mps2` keeps the sign used in the
/// attitude coupling block (negative, z up).
struct QuadrotorParams {
    double mass_kg = 0.032;
    double gravity_mps2 = -9.81;
    double Ts = 0.1;

    void validate() const;
    /// Thrust magnitude that balances gravity, m * |g|.
    double hover_thrust() const;
};

/// Continuous-time outer-loop matrices: state (p, v, attitude), input
/// (thrust deviation, body rates).
std::pair<Mat, Mat> quadrotor_continuous(const QuadrotorParams& params);

LtiModel build_quadrotor_model(const QuadrotorParams& params);

struct Equilibrium {
    Vec x_bar;
    Vec u_bar;
};

Equilibrium equilibrium_for_reference(const LtiModel& model, const Vec& r);

/// ||[A - I, B] [Gx; Gu]||_F
double kernel_residual(const LtiModel& model);

}  // namespace pathfg
