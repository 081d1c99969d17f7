#include "pathfg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pathfg {

void Scene::validate() const {
    const Eigen::Index n = x_min.size();
    if (x_max.size() != n) throw DimensionError("Scene: x_min and x_max sizes differ");
    if (u_max.size() != u_min.size()) throw DimensionError("Scene: u_min and u_max sizes differ");
    if (xi_map.cols() != n) throw DimensionError("Scene: xi_map must have n_x columns");
    if (!(x_min.array() < x_max.array()).all()) throw PreconditionError("Scene: x_min must be below x_max");
    if (!(u_min.array() < u_max.array()).all()) throw PreconditionError("Scene: u_min must be below u_max");
    if (!(epsilon > 0.0)) throw PreconditionError("Scene: epsilon must be positive");
    if (!(agent_radius >= 0.0)) throw PreconditionError("Scene: agent_radius must be nonnegative");
    for (const auto& o : obstacles) {
        if (o.center.size() != xi_map.rows()) throw DimensionError("Scene: obstacle center has wrong dimension");
        if (!(o.radius > 0.0)) throw PreconditionError("Scene: obstacle radius must be positive");
    }
}

Scene quadrotor_scene(const QuadrotorParams& params, double agent_radius, double epsilon) {
    params.validate();
    Scene s;
    const double att = 0.2 * std::numbers::pi;
    s.x_max.resize(9);
    s.x_max << 10, 10, 10, 1, 1, 1, att, att, att;
    s.x_min = -s.x_max;
    const double hover = params.hover_thrust();
    const double rate = 0.5 * std::numbers::pi;
    s.u_min.resize(4);
    s.u_max.resize(4);
    s.u_min << 0.0 - hover, -rate, -rate, -rate;
    s.u_max << 0.59 - hover, rate, rate, rate;
    s.agent_radius = agent_radius;
    s.epsilon = epsilon;
    s.xi_map = Mat::Zero(3, 9);
    s.xi_map.leftCols(3).setIdentity();
    return s;
}

Vec project_onto_obstacle(const SphereObstacle& obs, double agent_radius, const Vec& x_pos) {
    if (x_pos.size() != obs.center.size()) throw DimensionError("project_onto_obstacle: dimension mismatch");
    const Vec d = x_pos - obs.center;
    const double n = d.norm();
    if (!(n > 0.0)) throw PreconditionError("project_onto_obstacle: degenerate projection (point at obstacle center)");
    return obs.center + d * ((obs.radius + agent_radius) / n);
}

Halfspace halfspace_approximation(const SphereObstacle& obs, double agent_radius, const Mat& xi_map, const Vec& x) {
    if (xi_map.cols() != x.size() || xi_map.rows() != obs.center.size())
        throw DimensionError("halfspace_approximation: dimension mismatch");
    const Vec d = obs.center - xi_map * x;
    const double n = d.norm();
    if (!(n > 0.0)) throw PreconditionError("halfspace_approximation: degenerate projection (point at obstacle center)");
    const Vec unit = d / n;
    return {xi_map.transpose() * unit, unit.dot(obs.center) - agent_radius - obs.radius};
}

double obstacle_clearance(const SphereObstacle& obs, double agent_radius, const Vec& position) {
    return (position - obs.center).norm() - (obs.radius + agent_radius);
}

double min_clearance(const Scene& scene, const Vec& position) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& o : scene.obstacles) m = std::min(m, obstacle_clearance(o, scene.agent_radius, position));
    return m;
}

Admissibility is_state_admissible(const Scene& scene, const Vec& x) {
    if (x.size() != scene.nx()) throw DimensionError("is_state_admissible: state has wrong dimension");
    const double box = std::min((scene.x_max - x).minCoeff(), (x - scene.x_min).minCoeff());
    const double margin = std::min(box, min_clearance(scene, scene.xi_map * x));
    return {margin >= 0.0, margin};
}

Admissibility is_input_admissible(const Scene& scene, const Vec& u) {
    if (u.size() != scene.nu()) throw DimensionError("is_input_admissible: input has wrong dimension");
    const double margin = std::min((scene.u_max - u).minCoeff(), (u - scene.u_min).minCoeff());
    return {margin >= 0.0, margin};
}

double reference_margin(const Scene& scene, const LtiModel& model, const Vec& r) {
    const Equilibrium eq = equilibrium_for_reference(model, r);
    return std::min(is_state_admissible(scene, eq.x_bar).margin, is_input_admissible(scene, eq.u_bar).margin);
}

bool is_reference_strictly_admissible(const Scene& scene, const LtiModel& model, const Vec& r) {
    if (r.size() != model.nr()) return false;
    return reference_margin(scene, model, r) >= scene.epsilon;
}

double segment_point_distance(const Vec& a, const Vec& b, const Vec& c) {
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (c - a).norm();
    const double t = std::clamp((c - a).dot(ab) / len2, 0.0, 1.0);
    return (a + t * ab - c).norm();
}

}  // namespace pathfg
