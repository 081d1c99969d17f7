#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pathfg/planner.hpp"

namespace pathfg {

namespace {

struct Node {
    Vec pos;
    int parent = -1;
    double cost = 0.0;
    std::vector<int> children;
};

void propagate_cost(std::vector<Node>& nodes, int root) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int c : nodes[static_cast<std::size_t>(i)].children) {
            auto& child = nodes[static_cast<std::size_t>(c)];
            child.cost = nodes[static_cast<std::size_t>(i)].cost + (child.pos - nodes[static_cast<std::size_t>(i)].pos).norm();
            stack.push_back(c);
        }
    }
}

void reparent(std::vector<Node>& nodes, int node, int parent) {
    auto& n = nodes[static_cast<std::size_t>(node)];
    if (n.parent >= 0) {
        auto& siblings = nodes[static_cast<std::size_t>(n.parent)].children;
        siblings.erase(std::remove(siblings.begin(), siblings.end(), node), siblings.end());
    }
    n.parent = parent;
    nodes[static_cast<std::size_t>(parent)].children.push_back(node);
}

}  // namespace

RrtResult rrt_star(const Scene& scene, const LtiModel& model, const Vec& start, const Vec& goal, const PlannerConfig& cfg) {
    cfg.validate();
    const Eigen::Index dim = start.size();
    if (goal.size() != dim || dim != model.np()) throw DimensionError("rrt_star: start/goal dimension mismatch");
    const double margin = scene.epsilon + cfg.clearance;

    Vec lo = (model.xi_map * scene.x_min).array() + margin;
    Vec hi = (model.xi_map * scene.x_max).array() - margin;
    if (cfg.bounds_min && cfg.bounds_max) {
        lo = lo.cwiseMax(*cfg.bounds_min);
        hi = hi.cwiseMin(*cfg.bounds_max);
    } else {
        Vec bmin = start.cwiseMin(goal);
        Vec bmax = start.cwiseMax(goal);
        for (const auto& o : scene.obstacles) {
            const double reach = o.radius + scene.agent_radius;
            bmin = bmin.cwiseMin(Vec(o.center.array() - reach));
            bmax = bmax.cwiseMax(Vec(o.center.array() + reach));
        }
        lo = lo.cwiseMax(Vec(bmin.array() - 1.0));
        hi = hi.cwiseMin(Vec(bmax.array() + 1.0));
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(cfg.rrt.max_iters) + 1);
    nodes.push_back({start, -1, 0.0, {}});

    Vec sample(dim);
    for (int it = 0; it < cfg.rrt.max_iters; ++it) {
        if (unit(rng) < cfg.rrt.goal_bias) {
            sample = goal;
        } else {
            for (Eigen::Index d = 0; d < dim; ++d) sample(d) = lo(d) + unit(rng) * (hi(d) - lo(d));
        }

        int nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double d = (nodes[i].pos - sample).squaredNorm();
            if (d < best) {
                best = d;
                nearest = static_cast<int>(i);
            }
        }
        const Vec& from = nodes[static_cast<std::size_t>(nearest)].pos;
        const double dist = std::sqrt(best);
        if (dist == 0.0) continue;
        const Vec next = dist <= cfg.rrt.step_size ? Vec(sample) : Vec(from + (sample - from) * (cfg.rrt.step_size / dist));
        if (!segment_is_free(scene, model, from, next, margin)) continue;

        std::vector<int> near;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if ((nodes[i].pos - next).norm() <= cfg.rrt.rewire_radius) near.push_back(static_cast<int>(i));

        int parent = nearest;
        double parent_cost = nodes[static_cast<std::size_t>(nearest)].cost + (next - from).norm();
        for (int i : near) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            const double c = n.cost + (next - n.pos).norm();
            if (c < parent_cost && segment_is_free(scene, model, n.pos, next, margin)) {
                parent = i;
                parent_cost = c;
            }
        }
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({next, -1, parent_cost, {}});
        reparent(nodes, id, parent);

        for (int i : near) {
            if (i == parent) continue;
            const double c = parent_cost + (nodes[static_cast<std::size_t>(i)].pos - next).norm();
            if (c < nodes[static_cast<std::size_t>(i)].cost &&
                segment_is_free(scene, model, next, nodes[static_cast<std::size_t>(i)].pos, margin)) {
                reparent(nodes, i, id);
                nodes[static_cast<std::size_t>(i)].cost = c;
                propagate_cost(nodes, i);
            }
        }
    }

    // Best goal connection over the whole tree; costs only shrink and the
    // node set only grows with more iterations, so this is monotone in budget.
    int best_node = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double c = nodes[i].cost + (goal - nodes[i].pos).norm();
        if (c < best_cost && segment_is_free(scene, model, nodes[i].pos, goal, margin)) {
            best_cost = c;
            best_node = static_cast<int>(i);
        }
    }
    if (best_node < 0) throw PlanningError("rrt_star: no path found within the iteration budget");

    RrtResult out;
    out.cost = best_cost;
    out.nodes = static_cast<int>(nodes.size());
    out.waypoints.push_back(goal);
    for (int i = best_node; i >= 0; i = nodes[static_cast<std::size_t>(i)].parent)
        out.waypoints.push_back(nodes[static_cast<std::size_t>(i)].pos);
    std::reverse(out.waypoints.begin(), out.waypoints.end());
    return out;
}

}  // namespace pathfg
