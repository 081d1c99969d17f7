#include "pathfg/governor.hpp"

#include <cmath>

namespace pathfg {

void GovernorSettings::validate() const {
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw PreconditionError("GovernorSettings: grid_step must lie in (0, 1]");
    if (!(bisect_tol > 0.0 && bisect_tol <= grid_step))
        throw PreconditionError("GovernorSettings: bisect_tol must lie in (0, grid_step]");
}

int GovernorSettings::evaluation_budget() const {
    return static_cast<int>(std::ceil(1.0 / grid_step - 1e-9)) +
           static_cast<int>(std::ceil(std::log2(grid_step / bisect_tol) - 1e-9));
}

bool membership(const TerminalSet& ts, const PiecewisePath& path, const Vec& xi_N, double s) {
    return ts.contains(xi_N, path.eval(s));
}

GovernorResult governor_update(const TerminalSet& ts, const PiecewisePath& path, const GovernorState& state,
                               const Vec& xi_N, const GovernorSettings& settings) {
    settings.validate();
    if (!(state.s >= 0.0 && state.s <= 1.0)) throw PreconditionError("governor_update: s must lie in [0, 1]");
    if (!membership(ts, path, xi_N, state.s)) throw PreconditionError("governor invariant broken");

    GovernorResult out;
    out.s = state.s;
    const auto member = [&](double s) {
        ++out.evaluations;
        return membership(ts, path, xi_N, s);
    };

    // Grid points 1 - j h strictly above the current parameter, scanned downward.
    const int points = static_cast<int>(std::ceil(1.0 / settings.grid_step - 1e-9));
    double lo = state.s;
    double hi = state.s;
    bool found = false;
    double lowest_grid = 1.0;
    for (int j = 0; j < points; ++j) {
        const double g = 1.0 - j * settings.grid_step;
        if (g <= state.s) break;
        lowest_grid = g;
        if (member(g)) {
            if (j == 0) {
                out.s = 1.0;
                return out;
            }
            lo = g;
            hi = std::min(1.0, g + settings.grid_step);
            found = true;
            break;
        }
    }
    if (!found) {
        // Nothing feasible on the grid: refine between s and the lowest grid point.
        if (lowest_grid <= state.s) return out;
        lo = state.s;
        hi = lowest_grid;
    }
    // Invariant: lo is a member, hi is not.
    while (hi - lo > settings.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        if (member(mid)) lo = mid;
        else hi = mid;
    }
    out.s = lo;
    return out;
}

}  // namespace pathfg
