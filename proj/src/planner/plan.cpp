#include <algorithm>
#include <cmath>
#include <limits>

#include "pathfg/planner.hpp"

namespace pathfg {

std::string to_string(PlannerKind kind) { return kind == PlannerKind::rrt_star ? "rrt_star" : "potential_field"; }

PlannerKind planner_kind_from_string(const std::string& name) {
    if (name == "rrt_star") return PlannerKind::rrt_star;
    if (name == "potential_field") return PlannerKind::potential_field;
    throw ConfigError("unknown planner kind '" + name + "' (expected rrt_star or potential_field)");
}

void PlannerConfig::validate() const {
    if (!(clearance >= 0.0)) throw PreconditionError("PlannerConfig: clearance must be nonnegative");
    if (!(max_segment > 0.0)) throw PreconditionError("PlannerConfig: max_segment must be positive");
    if (rrt.max_iters < 1) throw PreconditionError("PlannerConfig: rrt.max_iters must be at least 1");
    if (!(rrt.step_size > 0.0)) throw PreconditionError("PlannerConfig: rrt.step_size must be positive");
    if (!(rrt.goal_bias >= 0.0 && rrt.goal_bias <= 1.0)) throw PreconditionError("PlannerConfig: rrt.goal_bias must lie in [0, 1]");
    if (!(rrt.rewire_radius > 0.0)) throw PreconditionError("PlannerConfig: rrt.rewire_radius must be positive");
    if (!(pf.attractive_gain > 0.0)) throw PreconditionError("PlannerConfig: pf.attractive_gain must be positive");
    if (!(pf.repulsive_gain > 0.0)) throw PreconditionError("PlannerConfig: pf.repulsive_gain must be positive");
    if (!(pf.influence_distance > 0.0)) throw PreconditionError("PlannerConfig: pf.influence_distance must be positive");
    if (!(pf.step_size > 0.0)) throw PreconditionError("PlannerConfig: pf.step_size must be positive");
    if (pf.max_steps < 1) throw PreconditionError("PlannerConfig: pf.max_steps must be at least 1");
    if (pf.stall_window < 1) throw PreconditionError("PlannerConfig: pf.stall_window must be at least 1");
    if (bounds_min.has_value() != bounds_max.has_value())
        throw PreconditionError("PlannerConfig: bounds_min and bounds_max must be given together");
    if (bounds_min && !(bounds_min->array() < bounds_max->array()).all())
        throw PreconditionError("PlannerConfig: bounds_min must be below bounds_max");
}

bool segment_is_free(const Scene& scene, const LtiModel& model, const Vec& a, const Vec& b, double margin) {
    const Vec lo = (model.xi_map * scene.x_min).array() + margin;
    const Vec hi = (model.xi_map * scene.x_max).array() - margin;
    for (const Vec* p : {&a, &b})
        if ((p->array() < lo.array()).any() || (p->array() > hi.array()).any()) return false;
    for (const auto& o : scene.obstacles)
        if (segment_point_distance(a, b, o.center) - o.radius - scene.agent_radius < margin) return false;
    return true;
}

Vec admissible_anchor(const Scene& scene, const LtiModel& model, const Vec& position, double extra_margin) {
    if (is_reference_strictly_admissible(scene, model, position)) return position;
    const double target = scene.epsilon + extra_margin;
    const Vec lo = (model.xi_map * scene.x_min).array() + target;
    const Vec hi = (model.xi_map * scene.x_max).array() - target;
    Vec p = position;
    for (int pass = 0; pass < 50; ++pass) {
        p = p.cwiseMax(lo).cwiseMin(hi);
        bool moved = false;
        for (const auto& o : scene.obstacles) {
            const double need = o.radius + scene.agent_radius + target;
            if ((p - o.center).norm() < need) {
                p = project_onto_obstacle({o.center, need - scene.agent_radius}, scene.agent_radius, p);
                moved = true;
            }
        }
        if (!moved && is_reference_strictly_admissible(scene, model, p)) return p;
    }
    throw PlanningError("admissible_anchor: no strictly admissible reference found near the start");
}

namespace {

std::vector<Vec> shortcut(const Scene& scene, const LtiModel& model, const std::vector<Vec>& pts, double margin) {
    std::vector<Vec> out{pts.front()};
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
        std::size_t j = pts.size() - 1;
        while (j > i + 1 && !segment_is_free(scene, model, pts[i], pts[j], margin)) --j;
        out.push_back(pts[j]);
        i = j;
    }
    return out;
}

std::vector<Vec> resample(const std::vector<Vec>& pts, double max_segment) {
    std::vector<Vec> out{pts.front()};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double len = (pts[i] - pts[i - 1]).norm();
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_segment)));
        for (int k = 1; k < pieces; ++k)
            out.push_back(pts[i - 1] + (pts[i] - pts[i - 1]) * (static_cast<double>(k) / pieces));
        out.push_back(pts[i]);
    }
    return out;
}

}  // namespace

PiecewisePath plan(const Scene& scene, const LtiModel& model, const Vec& start_pos, const Vec& goal_ref,
                   const PlannerConfig& cfg) {
    cfg.validate();
    scene.validate();
    if (start_pos.size() != model.np() || goal_ref.size() != model.np()) throw DimensionError("plan: position dimension mismatch");
    if (!is_reference_strictly_admissible(scene, model, goal_ref))
        throw PreconditionError("plan: goal reference is not strictly admissible");
    const Vec lo = model.xi_map * scene.x_min;
    const Vec hi = model.xi_map * scene.x_max;
    if ((start_pos.array() < lo.array()).any() || (start_pos.array() > hi.array()).any())
        throw PreconditionError("plan: start position is outside the state box");

    const Vec anchor = admissible_anchor(scene, model, start_pos, 0.0);

    // Segments keep epsilon plus the configured clearance, reduced when an
    // endpoint itself sits closer to the constraints than that.
    PlannerConfig local = cfg;
    const double endpoint_margin = std::min(reference_margin(scene, model, anchor), reference_margin(scene, model, goal_ref));
    local.clearance = std::clamp(endpoint_margin - scene.epsilon - 1e-9, 0.0, cfg.clearance);
    const double margin = scene.epsilon + local.clearance;

    std::vector<Vec> raw;
    if (segment_is_free(scene, model, anchor, goal_ref, margin)) {
        raw = {anchor, goal_ref};
    } else if (cfg.kind == PlannerKind::rrt_star) {
        raw = rrt_star(scene, model, anchor, goal_ref, local).waypoints;
    } else {
        raw = potential_field(scene, model, anchor, goal_ref, local);
    }
    std::vector<Vec> pts = resample(shortcut(scene, model, raw, margin), cfg.max_segment);
    pts.front() = anchor;
    pts.back() = goal_ref;
    return PiecewisePath(std::move(pts));
}

PathReport validate_path(const PiecewisePath& path, const OcpSpec& spec, const Vec& x0, const std::optional<Vec>& goal) {
    PathReport report;
    const Scene& scene = spec.scene();
    const LtiModel& model = spec.model();
    if (path.empty()) {
        report.waypoints_ok = report.dense_ok = report.ends_at_goal = false;
        return report;
    }
    const auto& w = path.waypoints();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!is_reference_strictly_admissible(scene, model, w[i])) {
            report.waypoints_ok = false;
            report.bad_waypoints.push_back(i);
        }
    }
    report.worst_dense_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 1000; ++k) {
        const double s = k / 1000.0;
        const Vec p = path.eval(s);
        const double m = p.size() == model.nr() ? reference_margin(scene, model, p) : -std::numeric_limits<double>::infinity();
        if (m < report.worst_dense_margin) {
            report.worst_dense_margin = m;
            report.worst_dense_s = s;
        }
    }
    report.dense_ok = report.worst_dense_margin >= scene.epsilon - 1e-9;
    if (goal) report.ends_at_goal = goal->size() == w.back().size() && (*goal - w.back()).norm() == 0.0;
    report.start_feasible = report.waypoints_ok && is_feasible(spec, x0, path.eval(0.0));
    return report;
}

}  // namespace pathfg
