#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "pathfg/sim.hpp"

namespace pathfg {

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

const std::string& trajectory_header() {
    static const std::string header =
        "k,t,px,py,pz,vx,vy,vz,roll,pitch,yaw,thrust,wx,wy,wz,s,ref_x,ref_y,ref_z,err,cost,solve_time,gov_time,clearance,"
        "feasible";
    return header;
}

void write_outputs(const SimResult& result, const SimConfig& cfg, const std::filesystem::path& out_dir,
                   const OutputOptions& options) {
    std::filesystem::create_directories(out_dir);

    {
        auto out = open_out(out_dir / "trajectory.csv");
        out << trajectory_header() << '\n';
        for (const auto& r : result.records) {
            out << r.k << ',' << num(r.t);
            for (Eigen::Index i = 0; i < r.x.size(); ++i) out << ',' << num(r.x(i));
            // Thrust is reported in absolute terms; rates are already absolute.
            const Vec u = r.u + result.input_trim;
            for (Eigen::Index i = 0; i < u.size(); ++i) out << ',' << num(u(i));
            out << ',' << num(r.s);
            for (Eigen::Index i = 0; i < r.ref.size(); ++i) out << ',' << num(r.ref(i));
            out << ',' << num(r.err) << ',' << num(r.cost);
            if (options.timings_in_trajectory) out << ',' << num(r.solve_time) << ',' << num(r.gov_time);
            else out << ",0,0";
            out << ',' << num(r.clearance) << ',' << (r.feasible ? 1 : 0) << '\n';
        }
    }
    {
        auto out = open_out(out_dir / "timing.csv");
        out << "k,solve_time,gov_time,gov_evaluations,backoffs\n";
        for (const auto& r : result.records)
            out << r.k << ',' << num(r.solve_time) << ',' << num(r.gov_time) << ',' << r.gov_evaluations << ','
                << r.backoffs << '\n';
    }
    {
        auto out = open_out(out_dir / "path.csv");
        out << "i,s,x,y,z\n";
        const auto& w = result.path.waypoints();
        const auto& c = result.path.cumulative_lengths();
        for (std::size_t i = 0; i < w.size(); ++i)
            out << i << ',' << num(c[i]) << ',' << num(w[i](0)) << ',' << num(w[i](1)) << ',' << num(w[i](2)) << '\n';
    }
    {
        const Scene scene = cfg.scene();
        const ViolationCounts v = result.violations(scene);
        nlohmann::ordered_json j;
        j["name"] = cfg.name;
        j["verdict"] = to_string(result.verdict);
        j["message"] = result.message;
        j["governed"] = result.governed;
        j["planner"] = result.planner;
        j["horizon"] = result.horizon;
        j["seed"] = result.seed;
        j["steps"] = result.steps;
        j["records"] = result.records.size();
        if (result.converged_step) {
            j["converged_step"] = *result.converged_step;
            j["convergence_time_s"] = *result.converged_step * cfg.model.Ts;
        } else {
            j["converged_step"] = nullptr;
            j["convergence_time_s"] = nullptr;
        }
        if (!result.records.empty()) {
            j["final_error"] = result.records.back().err;
            j["final_s"] = result.records.back().s;
            double min_clear = std::numeric_limits<double>::infinity();
            for (const auto& r : result.records) min_clear = std::min(min_clear, r.clearance);
            j["min_clearance_m"] = finite_or_null(min_clear);
        }
        j["timing"] = {{"solve_time_mean_s", result.mean_solve_time()},
                       {"solve_time_max_s", result.max_solve_time()},
                       {"gov_time_mean_s", result.mean_gov_time()},
                       {"gov_time_max_s", result.max_gov_time()}};
        j["governor_max_evaluations"] = result.max_gov_evaluations();
        j["terminal_backoffs"] = result.total_backoffs();
        j["violations"] = {{"state_box", v.state_box},
                           {"clearance", v.clearance},
                           {"input_box", v.input_box},
                           {"infeasible_solves", v.infeasible_solves},
                           {"s_decreases", v.s_decreases}};
        j["violation_count"] = v.total();
        auto out = open_out(out_dir / "summary.json");
        out << j.dump(2) << '\n';
    }
}

}  // namespace pathfg
