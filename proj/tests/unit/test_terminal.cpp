#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pathfg/terminal.hpp"

using namespace pathfg;

namespace {

Mat quad_Q() {
    Vec d(9);
    d << 10, 10, 10, 0.5, 0.5, 0.5, 2.5, 2.5, 2.5;
    return d.asDiagonal();
}

Mat quad_R() { return Mat::Identity(4, 4) * 0.1; }

Scene scalar_scene() {
    Scene s;
    s.x_min = Vec::Constant(1, -10.0);
    s.x_max = Vec::Constant(1, 10.0);
    s.u_min = Vec::Constant(1, -10.0);
    s.u_max = Vec::Constant(1, 10.0);
    s.xi_map = Mat::Identity(1, 1);
    return s;
}

LtiModel scalar_integrator() {
    return LtiModel::from_discrete(Mat::Identity(1, 1), Mat::Identity(1, 1), 1.0, Mat::Identity(1, 1));
}

// Signed Lambda recomputed directly from the row data.
double reference_threshold(const Mat& P, const Halfspace& h, const Vec& x_bar) {
    const double m = h.offset - h.normal.dot(x_bar);
    const double w = h.normal.dot(P.ldlt().solve(h.normal));
    return std::copysign(m * m / w, m);
}

}  // namespace

TEST(LyapunovThreshold, Examples) {
    const Mat I = Mat::Identity(2, 2);
    const Vec c = Eigen::Vector2d(1, 0);
    EXPECT_NEAR(lyapunov_threshold(I, c, 1.0, Vec::Zero(2)), 1.0, 1e-15);
    EXPECT_NEAR(lyapunov_threshold(I, c, 2.0, Vec::Zero(2)), 4.0, 1e-15);
    EXPECT_NEAR(lyapunov_threshold(I, c, 1.0, Vec(Eigen::Vector2d(1, 5))), 0.0, 1e-15);
    EXPECT_LT(lyapunov_threshold(I, c, 1.0, Vec(Eigen::Vector2d(2, 0))), 0.0);
    EXPECT_THROW(lyapunov_threshold(I, Vec::Zero(2), 1.0, Vec::Zero(2)), PreconditionError);
}

TEST(TerminalSetTest, RowCounts) {
    const QuadrotorParams params;
    const LtiModel m = build_quadrotor_model(params);
    Scene s = quadrotor_scene(params);
    const TerminalSet empty = TerminalSet::synthesize(m, s, quad_Q(), quad_R());
    EXPECT_EQ(empty.num_rows(), 26u);
    s.obstacles.push_back({Eigen::Vector3d(1, 1, 1), 0.3});
    const TerminalSet one = TerminalSet::synthesize(m, s, quad_Q(), quad_R());
    EXPECT_EQ(one.num_rows(), 27u);
    EXPECT_EQ(one.constraint_rows(Eigen::Vector3d(2, 2, 1)).size(), 27u);
}

TEST(TerminalSetTest, GoldenRatioScalar) {
    const TerminalSet ts = TerminalSet::synthesize(scalar_integrator(), scalar_scene(), Mat::Identity(1, 1),
                                                   Mat::Identity(1, 1));
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    EXPECT_NEAR(ts.P()(0, 0), phi, 1e-12);
    EXPECT_NEAR(ts.K()(0, 0), phi - 1.0, 1e-12);
    const auto [x_next, u] = ts.step(Vec::Constant(1, 1.0), Vec::Zero(1));
    EXPECT_NEAR(u(0), -0.618033988749895, 1e-12);
    EXPECT_NEAR(x_next(0), 0.381966011250105, 1e-12);
    EXPECT_GE(ts.certificate_min_eigenvalue(), -1e-9);
    EXPECT_LT(ts.contraction(), 1.0);
}

TEST(TerminalSetTest, RejectsIndefiniteWeights) {
    const QuadrotorParams params;
    const LtiModel m = build_quadrotor_model(params);
    const Scene s = quadrotor_scene(params);
    Mat Q = quad_Q();
    Q(0, 0) = -1.0;
    EXPECT_THROW(TerminalSet::synthesize(m, s, Q, quad_R()), PreconditionError);
    EXPECT_THROW(TerminalSet::synthesize(m, s, quad_Q(), Mat::Zero(4, 4)), PreconditionError);
}

TEST(TerminalSetTest, ThresholdsMatchRows) {
    const QuadrotorParams params;
    const LtiModel m = build_quadrotor_model(params);
    Scene s = quadrotor_scene(params);
    s.obstacles = {{Eigen::Vector3d(1.2, 1.3, 0.6), 0.3}, {Eigen::Vector3d(2.0, 2.1, 0.9), 0.25}};
    const TerminalSet ts = TerminalSet::synthesize(m, s, quad_Q(), quad_R());
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 3.5);
    int checked = 0;
    while (checked < 200) {
        const Vec r = Eigen::Vector3d(u(rng), u(rng), u(rng));
        if (!is_reference_strictly_admissible(s, m, r)) {
            EXPECT_THROW(ts.constraint_rows(r), PreconditionError);
            continue;
        }
        const auto rows = ts.constraint_rows(r);
        const Vec lam = ts.thresholds(r);
        const Vec x_bar = equilibrium_for_reference(m, r).x_bar;
        ASSERT_EQ(static_cast<Eigen::Index>(rows.size()), lam.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            EXPECT_NEAR(lam(static_cast<Eigen::Index>(i)), reference_threshold(ts.P(), rows[i], x_bar),
                        1e-9 * std::max(1.0, std::abs(lam(static_cast<Eigen::Index>(i)))));
        EXPECT_LT(ts.delta(x_bar, r), 0.0);
        EXPECT_TRUE(ts.contains(x_bar, r));
        ++checked;
    }
}

TEST(TerminalSetTest, ContainsAgreesWithDelta) {
    const QuadrotorParams params;
    const LtiModel m = build_quadrotor_model(params);
    Scene s = quadrotor_scene(params);
    s.obstacles = {{Eigen::Vector3d(1.0, 1.0, 1.0), 0.3}};
    const TerminalSet ts = TerminalSet::synthesize(m, s, quad_Q(), quad_R());
    std::mt19937_64 rng(9);
    const Vec r = Eigen::Vector3d(1.6, 1.0, 1.0);
    const Vec x_bar = equilibrium_for_reference(m, r).x_bar;
    for (int i = 0; i < 2000; ++i) {
        const Vec x = x_bar + oracle::random_vector(rng, 9, 0.3);
        const double d = ts.delta(x, r);
        if (std::abs(d) < 1e-9) continue;
        EXPECT_EQ(ts.contains(x, r), d <= 0.0);
    }
}

TEST(TerminalSetTest, InvariantUnderTerminalLaw) {
    const QuadrotorParams params;
    const LtiModel m = build_quadrotor_model(params);
    Scene s = quadrotor_scene(params);
    s.obstacles = {{Eigen::Vector3d(1.2, 1.3, 0.6), 0.3}, {Eigen::Vector3d(0.6, 1.6, 0.5), 0.3}};
    const TerminalSet ts = TerminalSet::synthesize(m, s, quad_Q(), quad_R());
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-0.5, 3.0);
    std::normal_distribution<double> n(0.0, 1.0);
    int checked = 0;
    while (checked < 500) {
        const Vec r = Eigen::Vector3d(u(rng), u(rng), u(rng));
        if (!is_reference_strictly_admissible(s, m, r)) continue;
        const Vec x_bar = equilibrium_for_reference(m, r).x_bar;
        const double lam = ts.min_threshold(r);
        // Sample on a random sublevel shell of V inside the set.
        Vec z(9);
        for (int i = 0; i < 9; ++i) z(i) = n(rng);
        const Eigen::LLT<Mat> llt(ts.P());
        Vec e = llt.matrixU().solve(z.normalized());
        e *= std::sqrt(lam) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const Vec x = x_bar + e;
        ASSERT_LE(ts.delta(x, r), 1e-12);
        const auto [x_next, u_applied] = ts.step(x, r);
        EXPECT_LE(ts.delta(x_next, r), 1e-12);
        EXPECT_TRUE(is_state_admissible(s, x_next).admissible);
        EXPECT_TRUE(is_input_admissible(s, u_applied).admissible);
        EXPECT_LE(ts.lyapunov_value(x_next, r), ts.contraction() * ts.lyapunov_value(x, r) + 1e-12);
        ++checked;
    }
}
