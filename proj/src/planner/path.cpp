#include <algorithm>
#include <cmath>

#include "pathfg/planner.hpp"

namespace pathfg {

PiecewisePath::PiecewisePath(std::vector<Vec> waypoints) {
    if (waypoints.empty()) throw PreconditionError("PiecewisePath: at least one waypoint is required");
    const Eigen::Index dim = waypoints.front().size();
    for (auto& w : waypoints) {
        if (w.size() != dim) throw DimensionError("PiecewisePath: waypoints have different dimensions");
        if (!waypoints_.empty() && (w - waypoints_.back()).norm() == 0.0) continue;
        waypoints_.push_back(std::move(w));
    }
    cumulative_.assign(waypoints_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
        acc += (waypoints_[i] - waypoints_[i - 1]).norm();
        cumulative_[i] = acc;
    }
    length_ = acc;
    if (acc > 0.0)
        for (auto& c : cumulative_) c /= acc;
    if (waypoints_.size() > 1) cumulative_.back() = 1.0;
}

Vec PiecewisePath::eval(double s) const {
    if (waypoints_.empty()) throw PreconditionError("PiecewisePath::eval: empty path");
    if (!(s >= 0.0 && s <= 1.0)) throw PreconditionError("PiecewisePath::eval: s must lie in [0, 1]");
    if (waypoints_.size() == 1 || s == 0.0) return waypoints_.front();
    if (s == 1.0) return waypoints_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const std::size_t hi = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    const std::size_t lo = hi - 1;
    const double span = cumulative_[hi] - cumulative_[lo];
    const double t = span > 0.0 ? (s - cumulative_[lo]) / span : 0.0;
    return waypoints_[lo] + t * (waypoints_[hi] - waypoints_[lo]);
}

Vec path_eval(const PiecewisePath& path, double s) { return path.eval(s); }

}  // namespace pathfg
