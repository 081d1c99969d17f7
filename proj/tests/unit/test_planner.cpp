#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "pathfg/sim.hpp"

using namespace pathfg;

namespace {

SimConfig case_study_config() { return load_config(std::string(PATHFG_SCENE_DIR) + "/paper_quadrotor.json"); }

Vec hover_at(const Vec& p) {
    Vec x = Vec::Zero(9);
    x.head(3) = p;
    return x;
}

OcpSpec spec_for(const SimConfig& cfg) {
    return OcpSpec(TerminalSet::synthesize(cfg.build_model(), cfg.scene(), cfg.Q(), cfg.R()), cfg.horizon, cfg.ocp);
}

}  // namespace

TEST(Path, EvalExamples) {
    const PiecewisePath p({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 1, 0)});
    EXPECT_NEAR(p.length(), 2.0, 1e-15);
    EXPECT_LE((path_eval(p, 0.0) - Eigen::Vector3d(0, 0, 0)).norm(), 1e-15);
    EXPECT_LE((path_eval(p, 0.25) - Eigen::Vector3d(0.5, 0, 0)).norm(), 1e-15);
    EXPECT_LE((path_eval(p, 0.5) - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
    EXPECT_LE((path_eval(p, 0.75) - Eigen::Vector3d(1, 0.5, 0)).norm(), 1e-15);
    EXPECT_LE((path_eval(p, 1.0) - Eigen::Vector3d(1, 1, 0)).norm(), 1e-15);
    EXPECT_THROW(path_eval(p, 1.5), PreconditionError);
    EXPECT_THROW(path_eval(p, -0.1), PreconditionError);
}

TEST(Path, SinglePointAndDuplicates) {
    const PiecewisePath single({Eigen::Vector3d(1, 2, 3)});
    EXPECT_LE((single.eval(0.3) - Eigen::Vector3d(1, 2, 3)).norm(), 0.0);
    const PiecewisePath dup({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 0, 2)});
    EXPECT_EQ(dup.waypoints().size(), 2u);
    EXPECT_LE((dup.eval(0.5) - Eigen::Vector3d(0, 0, 1)).norm(), 1e-15);
    EXPECT_THROW(PiecewisePath(std::vector<Vec>{}), PreconditionError);
}

TEST(Path, LipschitzInParameter) {
    const PiecewisePath p({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 1, 0)});
    for (int i = 0; i < 1000; ++i) {
        const double a = i / 1000.0, b = (i + 1) / 1000.0;
        EXPECT_LE((p.eval(b) - p.eval(a)).norm(), p.length() * (b - a) + 1e-12);
    }
}

TEST(PlannerKindTest, Parsing) {
    EXPECT_EQ(planner_kind_from_string("rrt_star"), PlannerKind::rrt_star);
    EXPECT_EQ(planner_kind_from_string("potential_field"), PlannerKind::potential_field);
    EXPECT_THROW(planner_kind_from_string("astar"), ConfigError);
}

TEST(Rrt, DeterministicForSeed) {
    const SimConfig cfg = case_study_config();
    const LtiModel m = cfg.build_model();
    const Scene s = cfg.scene();
    const Vec start = cfg.start_state.head(3);
    const auto a = rrt_star(s, m, start, cfg.goal, cfg.planner);
    const auto b = rrt_star(s, m, start, cfg.goal, cfg.planner);
    ASSERT_EQ(a.waypoints.size(), b.waypoints.size());
    for (std::size_t i = 0; i < a.waypoints.size(); ++i) EXPECT_EQ(a.waypoints[i], b.waypoints[i]);
    EXPECT_EQ(a.cost, b.cost);
}

TEST(Rrt, CostNonincreasingInBudget) {
    const SimConfig cfg = case_study_config();
    const LtiModel m = cfg.build_model();
    const Scene s = cfg.scene();
    const Vec start = cfg.start_state.head(3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double prev = std::numeric_limits<double>::infinity();
        for (int iters : {1000, 2000, 4000}) {
            PlannerConfig pc = cfg.planner;
            pc.seed = seed;
            pc.rrt.max_iters = iters;
            const auto res = rrt_star(s, m, start, cfg.goal, pc);
            EXPECT_LE(res.cost, prev + 1e-12) << "seed " << seed << " iters " << iters;
            double len = 0.0;
            for (std::size_t i = 1; i < res.waypoints.size(); ++i) len += (res.waypoints[i] - res.waypoints[i - 1]).norm();
            EXPECT_NEAR(len, res.cost, 1e-9);
            prev = res.cost;
        }
    }
}

TEST(Plan, BothPlannersOnCaseStudyScene) {
    SimConfig cfg = case_study_config();
    const OcpSpec spec = spec_for(cfg);
    for (PlannerKind kind : {PlannerKind::rrt_star, PlannerKind::potential_field}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            cfg.planner.kind = kind;
            cfg.planner.seed = seed;
            const PiecewisePath p = plan(cfg.scene(), cfg.build_model(), cfg.start_state.head(3), cfg.goal, cfg.planner);
            const PathReport rep = validate_path(p, spec, cfg.start_state, cfg.goal);
            EXPECT_TRUE(rep.passed()) << to_string(kind) << " seed " << seed << " worst margin " << rep.worst_dense_margin;
            for (std::size_t i = 1; i < p.waypoints().size(); ++i)
                EXPECT_LE((p.waypoints()[i] - p.waypoints()[i - 1]).norm(), cfg.planner.max_segment + 1e-12);
        }
    }
}

TEST(Plan, StraightLineInEmptyScene) {
    SimConfig cfg = case_study_config();
    cfg.obstacles.clear();
    const PiecewisePath p = plan(cfg.scene(), cfg.build_model(), cfg.start_state.head(3), cfg.goal, cfg.planner);
    const Vec a = p.waypoints().front(), b = p.waypoints().back();
    EXPECT_LE((b - cfg.goal).norm(), 0.0);
    for (const Vec& w : p.waypoints()) EXPECT_LE(segment_point_distance(a, b, w), 1e-12);
}

TEST(Plan, GoalInsideObstacleThrows) {
    SimConfig cfg = case_study_config();
    const Vec goal = cfg.obstacles.front().center;
    EXPECT_THROW(plan(cfg.scene(), cfg.build_model(), cfg.start_state.head(3), goal, cfg.planner), PreconditionError);
}

TEST(PotentialField, TerminatesOnSymmetricTrap) {
    SimConfig cfg = case_study_config();
    cfg.obstacles = {{Eigen::Vector3d(1.0, 0.0, 1.0), 0.4}};
    const Vec start = Eigen::Vector3d(0.0, 0.0, 1.0);
    const Vec goal = Eigen::Vector3d(2.0, 0.0, 1.0);
    PlannerConfig pc = cfg.planner;
    pc.kind = PlannerKind::potential_field;
    try {
        const auto pts = potential_field(cfg.scene(), cfg.build_model(), start, goal, pc);
        ASSERT_FALSE(pts.empty());
        EXPECT_LE((pts.back() - goal).norm(), 1e-12);
        EXPECT_LE(static_cast<int>(pts.size()), pc.pf.max_steps + 2);
    } catch (const PlanningError&) {
        SUCCEED();
    }
}

TEST(ValidatePath, DetectsFailures) {
    const SimConfig cfg = case_study_config();
    const OcpSpec spec = spec_for(cfg);
    const Vec start = cfg.start_state.head(3);
    const SphereObstacle& o = cfg.obstacles.front();

    // Straight through an obstacle: waypoints fine, dense check fails.
    const Vec before = o.center - Eigen::Vector3d(0, 0, 0.6);
    const Vec after = o.center + Eigen::Vector3d(0, 0, 0.6);
    const PathReport through = validate_path(PiecewisePath({before, after}), spec, hover_at(before));
    EXPECT_TRUE(through.waypoints_ok);
    EXPECT_FALSE(through.dense_ok);
    EXPECT_FALSE(through.passed());

    // A waypoint inside an obstacle.
    const PathReport bad = validate_path(PiecewisePath({start, o.center}), spec, cfg.start_state);
    EXPECT_FALSE(bad.waypoints_ok);
    ASSERT_FALSE(bad.bad_waypoints.empty());
    EXPECT_EQ(bad.bad_waypoints.front(), 1u);

    // Wrong endpoint.
    const PathReport wrong = validate_path(PiecewisePath({start}), spec, cfg.start_state, cfg.goal);
    EXPECT_FALSE(wrong.ends_at_goal);
}
