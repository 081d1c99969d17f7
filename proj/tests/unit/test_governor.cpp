#include <cmath>

#include <gtest/gtest.h>

#include "pathfg/governor.hpp"

using namespace pathfg;

namespace {

struct Fixture {
    LtiModel model = build_quadrotor_model(QuadrotorParams{});
    TerminalSet ts;
    double reach = 0.0;  // largest position offset along x that stays in the set

    Fixture() : ts(make()) {
        const Vec r = Vec::Zero(3);
        reach = std::sqrt(ts.min_threshold(r) / ts.P()(0, 0));
    }

    TerminalSet make() const {
        Vec d(9);
        d << 10, 10, 10, 0.5, 0.5, 0.5, 2.5, 2.5, 2.5;
        return TerminalSet::synthesize(model, quadrotor_scene(QuadrotorParams{}), d.asDiagonal(),
                                       Mat::Identity(4, 4) * 0.1);
    }

    // Straight path along x on which a state parked at p(c) is a member for s in [c - half, c + half].
    PiecewisePath path(double half) const {
        const double len = reach / half;
        return PiecewisePath({Vec::Zero(3), Vec(Eigen::Vector3d(len, 0, 0))});
    }

    Vec terminal_state(const PiecewisePath& p, double center) const {
        Vec x = Vec::Zero(9);
        x.head(3) = p.eval(center);
        return x;
    }
};

// Largest member of a 1e-4 grid, scanning every grid point above s.
double grid_oracle(const TerminalSet& ts, const PiecewisePath& p, const Vec& xi_N, double s) {
    double best = s;
    for (int j = 0; j <= 10000; ++j) {
        const double g = j * 1e-4;
        if (g > s && ts.delta(xi_N, p.eval(g)) <= 0.0) best = g;
    }
    return best;
}

}  // namespace

TEST(Governor, BudgetValue) {
    EXPECT_EQ(GovernorSettings{}.evaluation_budget(), 107);
    GovernorSettings bad;
    bad.bisect_tol = 0.5;
    EXPECT_THROW(bad.validate(), PreconditionError);
}

TEST(Governor, JumpsToEndWhenGoalAdmissible) {
    const Fixture f;
    const PiecewisePath p = f.path(0.5);
    const Vec xi_N = f.terminal_state(p, 1.0);
    const GovernorResult res = governor_update(f.ts, p, GovernorState{0.9, std::nullopt}, xi_N, GovernorSettings{});
    EXPECT_EQ(res.s, 1.0);
    EXPECT_EQ(res.evaluations, 1);
}

TEST(Governor, MatchesFineGridOracle) {
    const Fixture f;
    const double center = 0.31, half = 0.31;
    const PiecewisePath p = f.path(half);
    const Vec xi_N = f.terminal_state(p, center);
    const GovernorSettings gs;
    const GovernorResult res = governor_update(f.ts, p, GovernorState{0.0, std::nullopt}, xi_N, gs);
    const double oracle = grid_oracle(f.ts, p, xi_N, 0.0);
    EXPECT_NEAR(oracle, 0.62, 2e-4);
    EXPECT_NEAR(res.s, oracle, gs.bisect_tol + 1e-4);
    EXPECT_TRUE(f.ts.contains(xi_N, p.eval(res.s)));
    EXPECT_LE(res.evaluations, gs.evaluation_budget());
}

TEST(Governor, RefinesBelowFirstGridPoint) {
    const Fixture f;
    // Members are s in [0.005, 0.305]; no grid point above s = 0.3 is a member.
    const double center = 0.155, half = 0.15;
    const PiecewisePath p = f.path(half);
    const Vec xi_N = f.terminal_state(p, center);
    const GovernorSettings gs;
    const GovernorResult res = governor_update(f.ts, p, GovernorState{0.3, std::nullopt}, xi_N, gs);
    const double oracle = grid_oracle(f.ts, p, xi_N, 0.3);
    EXPECT_GT(res.s, 0.3);
    EXPECT_NEAR(res.s, oracle, gs.bisect_tol + 1e-4);
    EXPECT_TRUE(f.ts.contains(xi_N, p.eval(res.s)));
    EXPECT_LE(res.evaluations, gs.evaluation_budget());
}

TEST(Governor, NeverDecreasesAndStaysWithinBudget) {
    const Fixture f;
    const PiecewisePath p = f.path(0.2);
    const GovernorSettings gs;
    for (int i = 0; i <= 100; ++i) {
        const double c = i / 100.0;
        const Vec xi_N = f.terminal_state(p, c);
        for (double s : {std::max(0.0, c - 0.15), c, std::min(1.0, c + 0.15)}) {
            if (!f.ts.contains(xi_N, p.eval(s))) continue;
            const GovernorResult res = governor_update(f.ts, p, GovernorState{s, std::nullopt}, xi_N, gs);
            EXPECT_GE(res.s, s);
            EXPECT_LE(res.evaluations, gs.evaluation_budget());
            EXPECT_TRUE(f.ts.contains(xi_N, p.eval(res.s)));
        }
    }
}

TEST(Governor, ThrowsWhenCurrentParameterNotAdmissible) {
    const Fixture f;
    const PiecewisePath p = f.path(0.1);
    const Vec xi_N = f.terminal_state(p, 0.9);
    EXPECT_THROW(governor_update(f.ts, p, GovernorState{0.1, std::nullopt}, xi_N, GovernorSettings{}),
                 PreconditionError);
    EXPECT_THROW(governor_update(f.ts, p, GovernorState{1.5, std::nullopt}, xi_N, GovernorSettings{}),
                 PreconditionError);
}
