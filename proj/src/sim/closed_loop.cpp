#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "pathfg/sim.hpp"

namespace pathfg {

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::converged: return "converged";
        case Verdict::budget_exhausted: return "budget_exhausted";
        case Verdict::infeasible: return "infeasible";
        case Verdict::no_path: return "no_path";
    }
    return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

SimResult run_closed_loop(const SimConfig& cfg) {
    cfg.validate();
    const LtiModel model = cfg.build_model();
    const Scene scene = cfg.scene();
    TerminalOptions topts;
    topts.backoff = cfg.ocp.constraint_backoff;
    const OcpSpec spec(TerminalSet::synthesize(model, scene, cfg.Q(), cfg.R(), topts), cfg.horizon, cfg.ocp);
    PlannerConfig planner = cfg.planner;
    planner.seed = cfg.seed;

    SimResult result;
    result.input_trim = model.input_trim;
    result.governed = cfg.governed;
    result.horizon = cfg.horizon;
    result.seed = cfg.seed;
    result.planner = cfg.governed ? to_string(planner.kind) : "none";

    if (!is_reference_strictly_admissible(scene, model, cfg.goal)) {
        result.verdict = Verdict::no_path;
        result.message = "goal reference is not strictly admissible";
        return result;
    }
    const Vec goal_state = model.Gx * cfg.goal;

    if (cfg.governed) {
        try {
            result.path = plan(scene, model, model.xi_map * cfg.start_state, cfg.goal, planner);
        } catch (const PlanningError& e) {
            result.verdict = Verdict::no_path;
            result.message = e.what();
            return result;
        }
        const PathReport report = validate_path(result.path, spec, cfg.start_state, cfg.goal);
        if (!report.passed()) {
            result.verdict = Verdict::no_path;
            result.message = !report.start_feasible ? "planned path fails the initial feasibility check"
                                                    : "planned path fails admissibility validation";
            return result;
        }
    } else {
        result.path = PiecewisePath({cfg.goal});
    }

    const int N = cfg.horizon;
    GovernorState gov;
    gov.s = cfg.governed ? 0.0 : 1.0;
    Vec x = cfg.start_state;
    std::optional<OcpSolution> prev;

    for (int k = 0;; ++k) {
        StepRecord rec;
        rec.k = k;
        rec.t = k * model.Ts;
        rec.x = x;

        if (cfg.governed && prev) {
            const auto t0 = Clock::now();
            const GovernorResult g = governor_update(spec.terminal(), result.path, gov, prev->xi.row(N).transpose(),
                                                     cfg.governor);
            rec.gov_time = seconds_since(t0);
            rec.gov_evaluations = g.evaluations;
            gov.s = g.s;
        }
        const Vec r = result.path.eval(gov.s);
        rec.s = gov.s;
        rec.ref = r;

        OcpSolution sol;
        if (!prev) {
            sol = solve_ocp_bootstrap(spec, x, r);
        } else {
            const StagePolytopes polys = linearize_constraints(spec, &*prev, x);
            sol = solve_ocp(spec, x, r, polys, shifted_warm_start(spec, *prev, r));
        }
        rec.solve_time = sol.solve_time;
        rec.cost = sol.cost;
        rec.backoffs = sol.backoffs;
        rec.feasible = sol.feasible();
        rec.err = (x - model.Gx * r).norm();
        rec.clearance = min_clearance(scene, model.xi_map * x);

        if (!sol.feasible()) {
            rec.u = Vec::Zero(model.nu());
            result.records.push_back(std::move(rec));
            result.verdict = Verdict::infeasible;
            result.message = "OCP infeasible at step " + std::to_string(k) + ": " + sol.message;
            result.steps = k;
            return result;
        }
        rec.u = mpc_feedback(sol);
        gov.last_xi_N = sol.xi.row(N).transpose();

        const bool at_goal = gov.s == 1.0 && (x - goal_state).norm() <= cfg.convergence_tol;
        result.records.push_back(rec);
        if (at_goal) {
            result.verdict = Verdict::converged;
            result.steps = k;
            result.converged_step = k;
            return result;
        }
        if (k >= cfg.max_steps) {
            result.verdict = Verdict::budget_exhausted;
            result.steps = k;
            result.message = "step budget exhausted";
            return result;
        }
        x = model.step(x, rec.u);
        prev = std::move(sol);
    }
}

ViolationCounts SimResult::violations(const Scene& scene) const {
    ViolationCounts v;
    double last_s = -1.0;
    for (const auto& r : records) {
        const Vec lo_gap = r.x - scene.x_min;
        const Vec hi_gap = scene.x_max - r.x;
        if (lo_gap.minCoeff() < 0.0 || hi_gap.minCoeff() < 0.0) ++v.state_box;
        if (r.clearance < 0.0) ++v.clearance;
        if (!r.feasible) ++v.infeasible_solves;
        else if (!is_input_admissible(scene, r.u).admissible) ++v.input_box;
        if (r.s < last_s) ++v.s_decreases;
        last_s = r.s;
    }
    return v;
}

int SimResult::total_backoffs() const {
    int n = 0;
    for (const auto& r : records) n += r.backoffs;
    return n;
}

int SimResult::max_gov_evaluations() const {
    int n = 0;
    for (const auto& r : records) n = std::max(n, r.gov_evaluations);
    return n;
}

double SimResult::mean_solve_time() const {
    if (records.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& r : records) acc += r.solve_time;
    return acc / static_cast<double>(records.size());
}

double SimResult::max_solve_time() const {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.solve_time);
    return m;
}

double SimResult::mean_gov_time() const {
    // The first step has no governor update.
    if (records.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < records.size(); ++i) acc += records[i].gov_time;
    return acc / static_cast<double>(records.size() - 1);
}

double SimResult::max_gov_time() const {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.gov_time);
    return m;
}

}  // namespace pathfg
