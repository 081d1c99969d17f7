#pragma once

#include <vector>

#include "pathfg/model.hpp"

namespace pathfg {

/// Sphere obstacle, already inflated by its own safety margin. The keep-out
/// radius seen by the agent is radius + agent_radius.
struct SphereObstacle {
    Vec center;
    double radius = 0.0;
};

/// Closed half-space {x : normal' x <= offset}.
struct Halfspace {
    Vec normal;
    double offset = 0.0;

    double slack(const Vec& x) const { return offset - normal.dot(x); }
};

struct Scene {
    Vec x_min;
    Vec x_max;
    Vec u_min;
    Vec u_max;
    std::vector<SphereObstacle> obstacles;
    double agent_radius = 0.0;
    double epsilon = 0.02;
    Mat xi_map;

    /// Throws PreconditionError / DimensionError when the scene is malformed.
    void validate() const;
    Eigen::Index nx() const { return x_min.size(); }
    Eigen::Index nu() const { return u_min.size(); }
};

/// Box state and input bounds of the quadrotor case study, in deviation
/// coordinates for the thrust. Obstacles are left empty.
Scene quadrotor_scene(const QuadrotorParams& params, double agent_radius = 0.08, double epsilon = 0.02);

/// Nearest point of the inflated sphere surface to `x_pos`.
Vec project_onto_obstacle(const SphereObstacle& obs, double agent_radius, const Vec& x_pos);

/// Supporting half-space of the inflated obstacle at the projection of the
/// position of full state `x`.
Halfspace halfspace_approximation(const SphereObstacle& obs, double agent_radius, const Mat& xi_map, const Vec& x);

/// Signed clearance ||p - o|| - (r_o + r_a).
double obstacle_clearance(const SphereObstacle& obs, double agent_radius, const Vec& position);

/// Minimum clearance over all obstacles (+inf for an empty scene).
double min_clearance(const Scene& scene, const Vec& position);

struct Admissibility {
    bool admissible = false;
    /// Smallest constraint slack; negative values measure the worst violation.
    double margin = 0.0;
};

Admissibility is_state_admissible(const Scene& scene, const Vec& x);
Admissibility is_input_admissible(const Scene& scene, const Vec& u);

/// True iff the equilibrium pair of r satisfies every constraint with margin >= epsilon.
bool is_reference_strictly_admissible(const Scene& scene, const LtiModel& model, const Vec& r);

/// Smallest margin of the equilibrium of r over state box, obstacles and input box.
double reference_margin(const Scene& scene, const LtiModel& model, const Vec& r);

/// Shortest distance between segment [a, b] and point c.
double segment_point_distance(const Vec& a, const Vec& b, const Vec& c);

}  // namespace pathfg
