#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "pathfg/sim.hpp"

using namespace pathfg;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("pathfg_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string message_of(const std::string& json_text) {
    try {
        parse_config(json_text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

const char* kMinimal = R"({"scene": {"obstacles": []}, "start_position_m": [0.1, 0.1, 0.3], "goal_m": [0.6, 0.4, 0.5]})";

}  // namespace

TEST(Config, LoadsCaseStudyScene) {
    const SimConfig cfg = load_config(std::string(PATHFG_SCENE_DIR) + "/paper_quadrotor.json");
    EXPECT_EQ(cfg.obstacles.size(), 6u);
    EXPECT_EQ(cfg.horizon, 5);
    EXPECT_EQ(cfg.start_state.size(), 9);
    EXPECT_NEAR(cfg.goal(0), 2.5, 0.0);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, MinimalDefaults) {
    const SimConfig cfg = parse_config(kMinimal);
    EXPECT_TRUE(cfg.obstacles.empty());
    EXPECT_EQ(cfg.planner.kind, PlannerKind::rrt_star);
    EXPECT_EQ(cfg.max_steps, 1000);
    EXPECT_TRUE(cfg.governed);
}

TEST(Config, MissingObstaclesNamesKey) {
    const std::string msg = message_of(R"({"scene": {}, "start_position_m": [0, 0, 0], "goal_m": [1, 1, 1]})");
    EXPECT_NE(msg.find("scene.obstacles"), std::string::npos) << msg;
}

TEST(Config, NegativeRadiusRejected) {
    const std::string msg = message_of(
        R"({"scene": {"obstacles": [{"center_m": [1, 1, 1], "radius_m": -0.3}]}, "start_position_m": [0, 0, 0], "goal_m": [2, 2, 2]})");
    EXPECT_NE(msg.find("radius"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyRejected) {
    const std::string msg = message_of(
        R"({"scene": {"obstacles": []}, "start_position_m": [0, 0, 0], "goal_m": [1, 1, 1], "mpc": {"horizn": 5}})");
    EXPECT_NE(msg.find("mpc.horizn"), std::string::npos) << msg;
}

TEST(Config, MalformedValuesRejected) {
    EXPECT_FALSE(message_of("{not json").empty());
    EXPECT_FALSE(message_of(R"({"scene": {"obstacles": []}, "goal_m": [1, 1, 1]})").empty());
    EXPECT_FALSE(
        message_of(R"({"scene": {"obstacles": []}, "start_position_m": [0, 0], "goal_m": [1, 1, 1]})").empty());
    EXPECT_FALSE(message_of(
                     R"({"scene": {"obstacles": []}, "start_position_m": [0, 0, 0], "goal_m": [1, 1, 1], "mpc": {"horizon": 0}})")
                     .empty());
    EXPECT_FALSE(message_of(
                     R"({"scene": {"obstacles": []}, "start_position_m": [0, 0, 0], "goal_m": [1, 1, 1], "planner": {"kind": "astar"}})")
                     .empty());
}

TEST(ClosedLoop, StartAtGoalConvergesImmediately) {
    SimConfig cfg = parse_config(kMinimal);
    cfg.start_state.head(3) = cfg.goal;
    const SimResult res = run_closed_loop(cfg);
    EXPECT_EQ(res.verdict, Verdict::converged);
    ASSERT_TRUE(res.converged_step.has_value());
    EXPECT_LE(*res.converged_step, 1);
    EXPECT_EQ(static_cast<int>(res.records.size()), res.steps + 1);
}

TEST(ClosedLoop, EmptySceneGovernedAndLongHorizonUngoverned) {
    SimConfig cfg = parse_config(kMinimal);
    const SimResult gov = run_closed_loop(cfg);
    EXPECT_EQ(gov.verdict, Verdict::converged) << gov.message;
    EXPECT_EQ(gov.violations(cfg.scene()).total(), 0);
    double prev = 0.0;
    for (const auto& rec : gov.records) {
        EXPECT_GE(rec.s, prev);
        prev = rec.s;
    }
    EXPECT_EQ(gov.records.back().s, 1.0);

    cfg.governed = false;
    cfg.horizon = 50;
    const SimResult direct = run_closed_loop(cfg);
    EXPECT_EQ(direct.verdict, Verdict::converged) << direct.message;
    EXPECT_EQ(direct.violations(cfg.scene()).total(), 0);
    for (const auto& rec : direct.records) EXPECT_EQ(rec.s, 1.0);
}

TEST(ClosedLoop, ShortHorizonUngovernedIsInfeasibleFarFromGoal) {
    SimConfig cfg = parse_config(kMinimal);
    cfg.goal = Eigen::Vector3d(3.0, 3.0, 2.0);
    cfg.governed = false;
    const SimResult res = run_closed_loop(cfg);
    EXPECT_EQ(res.verdict, Verdict::infeasible);
}

TEST(Outputs, FilesAndRowCounts) {
    const SimConfig cfg = parse_config(kMinimal);
    const SimResult res = run_closed_loop(cfg);
    const auto dir = temp_dir("outputs");
    write_outputs(res, cfg, dir);
    const std::string traj = read_file(dir / "trajectory.csv");
    EXPECT_EQ(traj.substr(0, traj.find('\n')), trajectory_header());
    EXPECT_EQ(trajectory_header(),
              "k,t,px,py,pz,vx,vy,vz,roll,pitch,yaw,thrust,wx,wy,wz,s,ref_x,ref_y,ref_z,err,cost,solve_time,gov_time,"
              "clearance,feasible");
    EXPECT_EQ(count_lines(traj), res.steps + 2);
    const std::string path = read_file(dir / "path.csv");
    EXPECT_EQ(count_lines(path), static_cast<int>(res.path.waypoints().size()) + 1);
    const std::string summary = read_file(dir / "summary.json");
    EXPECT_NE(summary.find("\"verdict\": \"converged\""), std::string::npos) << summary;
    EXPECT_TRUE(std::filesystem::exists(dir / "timing.csv"));
}

TEST(Outputs, TrajectoryIsDeterministic) {
    const SimConfig cfg = parse_config(kMinimal);
    const auto a = temp_dir("det_a"), b = temp_dir("det_b");
    write_outputs(run_closed_loop(cfg), cfg, a);
    write_outputs(run_closed_loop(cfg), cfg, b);
    EXPECT_EQ(read_file(a / "trajectory.csv"), read_file(b / "trajectory.csv"));
    EXPECT_EQ(read_file(a / "path.csv"), read_file(b / "path.csv"));
}
