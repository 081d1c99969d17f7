#include <cmath>
#include <limits>

#include "pathfg/planner.hpp"

namespace pathfg {

std::vector<Vec> potential_field(const Scene& scene, const LtiModel& model, const Vec& start, const Vec& goal,
                                 const PlannerConfig& cfg) {
    cfg.validate();
    if (goal.size() != start.size() || start.size() != model.np())
        throw DimensionError("potential_field: start/goal dimension mismatch");
    const auto& pf = cfg.pf;
    const double margin = scene.epsilon + cfg.clearance;

    std::vector<Vec> out{start};
    Vec pos = start;
    double best = (goal - pos).norm();
    int best_step = 0;
    for (int step = 0; step < pf.max_steps; ++step) {
        const double to_goal = (goal - pos).norm();
        if (to_goal <= pf.step_size) {
            if (!segment_is_free(scene, model, pos, goal, margin))
                throw PlanningError("potential_field: final approach to the goal is blocked");
            out.push_back(goal);
            return out;
        }
        if (to_goal < best - pf.step_size) {
            best = to_goal;
            best_step = step;
        } else if (step - best_step > pf.stall_window) {
            throw PlanningError("potential_field: stuck in a local minimum");
        }

        // Descent direction of the conic attractive potential plus the
        // classic repulsive potential 0.5 k (1/d - 1/d0)^2 around each obstacle,
        // where d is the distance to the margin-inflated surface.
        Vec dir = pf.attractive_gain * (goal - pos) / to_goal;
        for (const auto& o : scene.obstacles) {
            const Vec away = pos - o.center;
            const double n = away.norm();
            const double d = n - o.radius - scene.agent_radius - margin;
            if (d <= 0.0) throw PlanningError("potential_field: entered an obstacle margin");
            if (d < pf.influence_distance)
                dir += pf.repulsive_gain * (1.0 / d - 1.0 / pf.influence_distance) / (d * d) * (away / n);
        }
        const double norm = dir.norm();
        if (!(norm > 1e-12)) throw PlanningError("potential_field: stuck in a local minimum");
        const Vec next = pos + dir * (pf.step_size / norm);
        if (!segment_is_free(scene, model, pos, next, margin))
            throw PlanningError("potential_field: step would enter an obstacle margin");
        pos = next;
        out.push_back(pos);
    }
    throw PlanningError("potential_field: step budget exhausted before reaching the goal");
}

}  // namespace pathfg
