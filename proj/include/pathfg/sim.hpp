#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pathfg/governor.hpp"

namespace pathfg {

struct SimConfig {
    std::string name = "scenario";
    QuadrotorParams model;

    double position_max_m = 10.0;
    double velocity_max_mps = 1.0;
    double attitude_max_rad = 0.2 * 3.14159265358979323846;
    double thrust_min_N = 0.0;
    double thrust_max_N = 0.59;
    double angular_rate_max_radps = 0.5 * 3.14159265358979323846;

    double agent_radius_m = 0.08;
    double epsilon_m = 0.02;
    std::vector<SphereObstacle> obstacles;

    Vec start_state;
    Vec goal;

    int horizon = 5;
    double q_position = 10.0;
    double q_velocity = 0.5;
    double q_attitude = 2.5;
    double r_scale = 0.1;
    OcpOptions ocp;

    PlannerConfig planner;
    GovernorSettings governor;

    int max_steps = 1000;
    double convergence_tol = 1e-2;
    /// When false the MPC tracks the goal directly (no path, no governor).
    bool governed = true;
    std::uint64_t seed = 1;

    /// Throws ConfigError describing the first invalid field.
    void validate() const;
    Scene scene() const;
    LtiModel build_model() const;
    Mat Q() const;
    Mat R() const;
};

/// Parses a JSON scenario. Unknown keys are rejected and errors name the field path.
SimConfig parse_config(const std::string& json_text);
SimConfig load_config(const std::filesystem::path& path);

enum class Verdict { converged, budget_exhausted, infeasible, no_path };
std::string to_string(Verdict verdict);

struct StepRecord {
    int k = 0;
    double t = 0.0;
    Vec x;
    /// Deviation input applied by the controller.
    Vec u;
    double s = 0.0;
    Vec ref;
    double err = 0.0;
    double cost = 0.0;
    double solve_time = 0.0;
    double gov_time = 0.0;
    int gov_evaluations = 0;
    int backoffs = 0;
    double clearance = 0.0;
    bool feasible = false;
};

struct ViolationCounts {
    int state_box = 0;
    int clearance = 0;
    int input_box = 0;
    int infeasible_solves = 0;
    int s_decreases = 0;

    int total() const { return state_box + clearance + input_box + infeasible_solves + s_decreases; }
};

struct SimResult {
    Verdict verdict = Verdict::no_path;
    std::string message;
    std::vector<StepRecord> records;
    PiecewisePath path;
    /// Plant transitions simulated; records.size() == steps + 1 when records exist.
    int steps = 0;
    std::optional<int> converged_step;
    /// Absolute input trim added to reported thrust.
    Vec input_trim;
    bool governed = true;
    int horizon = 0;
    std::uint64_t seed = 0;
    std::string planner;

    ViolationCounts violations(const Scene& scene) const;
    int total_backoffs() const;
    int max_gov_evaluations() const;
    double mean_solve_time() const;
    double max_solve_time() const;
    double mean_gov_time() const;
    double max_gov_time() const;
};

SimResult run_closed_loop(const SimConfig& cfg);

struct OutputOptions {
    /// Write wall-clock timings into trajectory.csv (otherwise zeros there,
    /// with the real values in timing.csv and summary.json).
    bool timings_in_trajectory = false;
};

void write_outputs(const SimResult& result, const SimConfig& cfg, const std::filesystem::path& out_dir,
                   const OutputOptions& options = {});

/// The exact trajectory.csv header.
const std::string& trajectory_header();

struct StudyRun {
    int horizon = 0;
    bool governed = true;
    Verdict verdict = Verdict::no_path;
    int steps = 0;
    std::optional<int> converged_step;
    std::optional<int> first_infeasible_step;
    double convergence_time = 0.0;
    double mean_solve_time = 0.0;
    double max_solve_time = 0.0;
    double mean_gov_time = 0.0;
    int max_gov_evaluations = 0;
    int violations = 0;
    std::string message;
};

struct HorizonStudyReport {
    std::vector<StudyRun> runs;
};

HorizonStudyReport run_horizon_study(const SimConfig& cfg, const std::vector<int>& governed_Ns,
                                     const std::vector<int>& ungoverned_Ns,
                                     const std::optional<std::filesystem::path>& out_dir = std::nullopt);

void write_study(const HorizonStudyReport& report, const std::filesystem::path& out_dir);

}  // namespace pathfg
