#include <fstream>

#include <json.hpp>

#include "pathfg/sim.hpp"

namespace pathfg {

HorizonStudyReport run_horizon_study(const SimConfig& cfg, const std::vector<int>& governed_Ns,
                                     const std::vector<int>& ungoverned_Ns,
                                     const std::optional<std::filesystem::path>& out_dir) {
    HorizonStudyReport report;
    const Scene scene = cfg.scene();
    const auto run_one = [&](int N, bool governed) {
        SimConfig c = cfg;
        c.horizon = N;
        c.governed = governed;
        const SimResult r = run_closed_loop(c);
        if (out_dir) write_outputs(r, c, *out_dir / ((governed ? "governed_N" : "ungoverned_N") + std::to_string(N)));

        StudyRun run;
        run.horizon = N;
        run.governed = governed;
        run.verdict = r.verdict;
        run.steps = r.steps;
        run.converged_step = r.converged_step;
        if (r.converged_step) run.convergence_time = *r.converged_step * cfg.model.Ts;
        for (const auto& rec : r.records) {
            if (!rec.feasible) {
                run.first_infeasible_step = rec.k;
                break;
            }
        }
        run.mean_solve_time = r.mean_solve_time();
        run.max_solve_time = r.max_solve_time();
        run.mean_gov_time = r.mean_gov_time();
        run.max_gov_evaluations = r.max_gov_evaluations();
        // Infeasible solves are the verdict of an ungoverned run, not a safety violation.
        const ViolationCounts v = r.violations(scene);
        run.violations = v.state_box + v.clearance + v.input_box + v.s_decreases;
        run.message = r.message;
        report.runs.push_back(std::move(run));
    };
    for (int N : governed_Ns) run_one(N, true);
    for (int N : ungoverned_Ns) run_one(N, false);
    return report;
}

void write_study(const HorizonStudyReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    std::ofstream csv(out_dir / "study.csv", std::ios::binary);
    if (!csv) throw Error("cannot write " + (out_dir / "study.csv").string());
    csv << "mode,N,verdict,steps,converged_step,first_infeasible_step,convergence_time,mean_solve_time,max_solve_time,"
           "mean_gov_time,max_gov_evaluations,violations\n";
    for (const auto& r : report.runs) {
        nlohmann::ordered_json j;
        j["mode"] = r.governed ? "governed" : "ungoverned";
        j["horizon"] = r.horizon;
        j["verdict"] = to_string(r.verdict);
        j["steps"] = r.steps;
        j["converged_step"] = r.converged_step ? nlohmann::ordered_json(*r.converged_step) : nlohmann::ordered_json(nullptr);
        j["first_infeasible_step"] =
            r.first_infeasible_step ? nlohmann::ordered_json(*r.first_infeasible_step) : nlohmann::ordered_json(nullptr);
        j["convergence_time_s"] = r.convergence_time;
        j["solve_time_mean_s"] = r.mean_solve_time;
        j["solve_time_max_s"] = r.max_solve_time;
        j["gov_time_mean_s"] = r.mean_gov_time;
        j["governor_max_evaluations"] = r.max_gov_evaluations;
        j["violation_count"] = r.violations;
        j["message"] = r.message;
        runs.push_back(j);
        csv << (r.governed ? "governed" : "ungoverned") << ',' << r.horizon << ',' << to_string(r.verdict) << ','
            << r.steps << ',' << (r.converged_step ? std::to_string(*r.converged_step) : "") << ','
            << (r.first_infeasible_step ? std::to_string(*r.first_infeasible_step) : "") << ',' << r.convergence_time
            << ',' << r.mean_solve_time << ',' << r.max_solve_time << ',' << r.mean_gov_time << ','
            << r.max_gov_evaluations << ',' << r.violations << '\n';
    }
    std::ofstream out(out_dir / "study.json", std::ios::binary);
    if (!out) throw Error("cannot write " + (out_dir / "study.json").string());
    nlohmann::ordered_json j;
    j["runs"] = runs;
    out << j.dump(2) << '\n';
}

}  // namespace pathfg
