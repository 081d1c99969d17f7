#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pathfg/pathfg.hpp"

namespace {

std::vector<int> parse_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 1) throw pathfg::ConfigError("invalid horizon '" + item + "'");
        out.push_back(v);
    }
    return out;
}

int simulate(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed, bool timings) {
    pathfg::SimConfig cfg = pathfg::load_config(config);
    if (seed) cfg.seed = *seed;
    const pathfg::SimResult result = pathfg::run_closed_loop(cfg);
    pathfg::OutputOptions opts;
    opts.timings_in_trajectory = timings;
    pathfg::write_outputs(result, cfg, out, opts);
    std::cout << "verdict: " << pathfg::to_string(result.verdict) << "\n"
              << "steps: " << result.steps << "\n"
              << "violations: " << result.violations(cfg.scene()).total() << "\n";
    if (!result.message.empty()) std::cout << "message: " << result.message << "\n";
    return result.verdict == pathfg::Verdict::converged ? 0 : 1;
}

int horizon_study(const std::string& config, const std::string& governed, const std::string& ungoverned,
                  const std::string& out, std::optional<std::uint64_t> seed) {
    pathfg::SimConfig cfg = pathfg::load_config(config);
    if (seed) cfg.seed = *seed;
    const auto report = pathfg::run_horizon_study(cfg, parse_list(governed), parse_list(ungoverned), std::filesystem::path(out));
    pathfg::write_study(report, out);
    for (const auto& r : report.runs)
        std::cout << (r.governed ? "governed" : "ungoverned") << " N=" << r.horizon << ": " << pathfg::to_string(r.verdict)
                  << " (steps " << r.steps << ")\n";
    return 0;
}

int validate_scene(const std::string& config) {
    const pathfg::SimConfig cfg = pathfg::load_config(config);
    const pathfg::LtiModel model = cfg.build_model();
    const pathfg::Scene scene = cfg.scene();
    scene.validate();
    std::cout << "config: ok (" << scene.obstacles.size() << " obstacles, N=" << cfg.horizon << ", Ts=" << cfg.model.Ts
              << ")\n";
    const auto start_check = pathfg::is_state_admissible(scene, cfg.start_state);
    std::cout << "start state admissible: " << (start_check.admissible ? "yes" : "no") << " (margin "
              << start_check.margin << ")\n";
    const bool goal_ok = pathfg::is_reference_strictly_admissible(scene, model, cfg.goal);
    std::cout << "goal strictly admissible: " << (goal_ok ? "yes" : "no") << "\n";
    if (!start_check.admissible || !goal_ok) return 1;

    pathfg::TerminalOptions topts;
    topts.backoff = cfg.ocp.constraint_backoff;
    const pathfg::OcpSpec spec(pathfg::TerminalSet::synthesize(model, scene, cfg.Q(), cfg.R(), topts), cfg.horizon,
                               cfg.ocp);
    pathfg::PlannerConfig planner = cfg.planner;
    planner.seed = cfg.seed;
    try {
        const auto path = pathfg::plan(scene, model, model.xi_map * cfg.start_state, cfg.goal, planner);
        const auto report = pathfg::validate_path(path, spec, cfg.start_state, cfg.goal);
        std::cout << "path (" << pathfg::to_string(planner.kind) << "): " << path.waypoints().size()
                  << " waypoints, length " << path.length() << " m\n"
                  << "waypoints admissible: " << (report.waypoints_ok ? "yes" : "no") << "\n"
                  << "dense margin: " << report.worst_dense_margin << " m at s=" << report.worst_dense_s << "\n"
                  << "initial pair feasible: " << (report.start_feasible ? "yes" : "no") << "\n";
        return report.passed() ? 0 : 1;
    } catch (const pathfg::PlanningError& e) {
        std::cout << "path: none (" << e.what() << ")\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path feasibility governor simulator"};
    app.require_subcommand(1);

    std::string config, out, governed = "5,15", ungoverned = "5,20,50";
    std::optional<std::uint64_t> seed;
    bool timings = false;

    auto* sim = app.add_subcommand("simulate", "Run one closed-loop simulation");
    sim->add_option("--config", config, "Scenario JSON file")->required();
    sim->add_option("--out", out, "Output directory")->required();
    sim->add_option("--seed", seed, "Planner seed (overrides the config)");
    sim->add_flag("--timings-in-trajectory", timings, "Write wall-clock timings into trajectory.csv");

    auto* study = app.add_subcommand("horizon-study", "Compare governed and ungoverned MPC across horizons");
    study->add_option("--config", config, "Scenario JSON file")->required();
    study->add_option("--governed", governed, "Comma-separated governed horizons");
    study->add_option("--ungoverned", ungoverned, "Comma-separated ungoverned horizons");
    study->add_option("--out", out, "Output directory")->required();
    study->add_option("--seed", seed, "Planner seed (overrides the config)");

    auto* validate = app.add_subcommand("validate-scene", "Check a scenario file and its planned path");
    validate->add_option("--config", config, "Scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sim) return simulate(config, out, seed, timings);
        if (*study) return horizon_study(config, governed, ungoverned, out, seed);
        if (*validate) return validate_scene(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
