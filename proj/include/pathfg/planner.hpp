#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathfg/mpc.hpp"

namespace pathfg {

/// Continuous path p : [0, 1] -> references, linear between waypoints and
/// parameterized by normalized arc length.
class PiecewisePath {
public:
    PiecewisePath() = default;
    /// Consecutive duplicate waypoints are dropped. Needs at least one waypoint.
    explicit PiecewisePath(std::vector<Vec> waypoints);

    const std::vector<Vec>& waypoints() const { return waypoints_; }
    /// Normalized cumulative arc length of each waypoint (0 ... 1).
    const std::vector<double>& cumulative_lengths() const { return cumulative_; }
    double length() const { return length_; }
    bool empty() const { return waypoints_.empty(); }

    Vec eval(double s) const;

private:
    std::vector<Vec> waypoints_;
    std::vector<double> cumulative_;
    double length_ = 0.0;
};

Vec path_eval(const PiecewisePath& path, double s);

enum class PlannerKind { rrt_star, potential_field };
std::string to_string(PlannerKind kind);
PlannerKind planner_kind_from_string(const std::string& name);

struct RrtConfig {
    int max_iters = 4000;
    double step_size = 0.25;
    double goal_bias = 0.1;
    double rewire_radius = 0.6;
};

struct PotentialFieldConfig {
    double attractive_gain = 1.0;
    double repulsive_gain = 0.05;
    double influence_distance = 0.4;
    double step_size = 0.02;
    int max_steps = 5000;
    /// Steps over which the distance to the goal must shrink by at least one step size.
    int stall_window = 200;
};

struct PlannerConfig {
    PlannerKind kind = PlannerKind::rrt_star;
    std::uint64_t seed = 1;
    /// Extra clearance (beyond the strict margin epsilon) required of planned segments.
    double clearance = 0.05;
    /// Max segment length after resampling.
    double max_segment = 0.2;
    /// Sampling box for RRT*; empty means the padded bounding box of start, goal and obstacles.
    std::optional<Vec> bounds_min;
    std::optional<Vec> bounds_max;
    RrtConfig rrt;
    PotentialFieldConfig pf;

    void validate() const;
};

/// Raised when a planner exhausts its budget or gets stuck.
class PlanningError : public Error {
public:
    using Error::Error;
};

struct RrtResult {
    std::vector<Vec> waypoints;
    /// Tree cost (path length) of the returned raw path.
    double cost = 0.0;
    int nodes = 0;
};

/// RRT* in position space; returns the raw tree path. Throws PlanningError
/// when no goal connection exists after max_iters.
RrtResult rrt_star(const Scene& scene, const LtiModel& model, const Vec& start, const Vec& goal, const PlannerConfig& cfg);

/// Normalized-gradient descent on an attractive/repulsive potential. Throws
/// PlanningError on a local minimum or when max_steps is exhausted.
std::vector<Vec> potential_field(const Scene& scene, const LtiModel& model, const Vec& start, const Vec& goal,
                                 const PlannerConfig& cfg);

/// True iff every point of segment [a, b] keeps `margin` from each inflated
/// obstacle and stays inside the position box shrunk by `margin`.
bool segment_is_free(const Scene& scene, const LtiModel& model, const Vec& a, const Vec& b, double margin);

/// Strictly admissible reference nearest to `position` (itself when admissible).
Vec admissible_anchor(const Scene& scene, const LtiModel& model, const Vec& position, double extra_margin);

/// Runs the configured planner, shortcuts and resamples the result. The first
/// waypoint is the admissible anchor of `start_pos`, the last one `goal_ref`.
PiecewisePath plan(const Scene& scene, const LtiModel& model, const Vec& start_pos, const Vec& goal_ref,
                   const PlannerConfig& cfg);

struct PathReport {
    bool waypoints_ok = true;
    std::vector<std::size_t> bad_waypoints;
    bool dense_ok = true;
    double worst_dense_margin = 0.0;
    double worst_dense_s = 0.0;
    bool start_feasible = false;
    bool ends_at_goal = true;

    bool passed() const { return waypoints_ok && dense_ok && start_feasible && ends_at_goal; }
};

/// Checks waypoint strict admissibility, p(s) on a 1e-3 grid, and
/// feasibility of (x0, p(0)). `goal` is optional; when given, p(1) must equal it.
PathReport validate_path(const PiecewisePath& path, const OcpSpec& spec, const Vec& x0,
                         const std::optional<Vec>& goal = std::nullopt);

}  // namespace pathfg
