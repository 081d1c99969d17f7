#pragma once

#include <optional>

#include "pathfg/planner.hpp"

namespace pathfg {

struct GovernorSettings {
    double grid_step = 1e-2;
    double bisect_tol = 1e-4;

    void validate() const;
    /// Upper bound on membership evaluations of one update:
    /// ceil(1 / grid_step) + ceil(log2(grid_step / bisect_tol)).
    int evaluation_budget() const;
};

struct GovernorState {
    double s = 0.0;
    std::optional<Vec> last_xi_N;
};

struct GovernorResult {
    double s = 0.0;
    /// Membership evaluations spent on the search (the precondition check is not counted).
    int evaluations = 0;
};

/// (xi_N, p(s)) in the terminal set.
bool membership(const TerminalSet& ts, const PiecewisePath& path, const Vec& xi_N, double s);

/// Largest s' >= state.s on the topmost feasible component found by a grid
/// scan from 1 downward, refined by bisection. Returns exactly 1 when p(1) is
/// admissible for xi_N. Throws PreconditionError("governor invariant broken")
/// when (xi_N, p(state.s)) is not in the terminal set.
GovernorResult governor_update(const TerminalSet& ts, const PiecewisePath& path, const GovernorState& state,
                               const Vec& xi_N, const GovernorSettings& settings = {});

}  // namespace pathfg
