#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pathfg/pathfg.hpp"

namespace py = pybind11;
using namespace pathfg;

namespace {

Mat stack_rows(const std::vector<Vec>& rows, Eigen::Index cols) {
    Mat out(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return out;
}

py::dict qp_result(const numkit::QpSolution& sol) {
    py::dict d;
    d["status"] = numkit::to_string(sol.status);
    d["x"] = sol.primal;
    d["objective"] = sol.objective;
    d["iterations"] = sol.iterations;
    return d;
}

py::dict study_run(const StudyRun& r) {
    py::dict d;
    d["horizon"] = r.horizon;
    d["governed"] = r.governed;
    d["verdict"] = to_string(r.verdict);
    d["steps"] = r.steps;
    d["converged_step"] = r.converged_step;
    d["first_infeasible_step"] = r.first_infeasible_step;
    d["convergence_time"] = r.convergence_time;
    d["mean_solve_time"] = r.mean_solve_time;
    d["mean_gov_time"] = r.mean_gov_time;
    d["max_gov_evaluations"] = r.max_gov_evaluations;
    d["violations"] = r.violations;
    d["message"] = r.message;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Path-following MPC with a reference governor";

    // Translators are tried newest first, so the base class goes in first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PlanningError>(m, "PlanningError", PyExc_RuntimeError);

    m.def("solve_qp",
          [](const Mat& H, const Vec& q, const Mat& G, const Vec& h, double tol, int max_iter) {
              numkit::QpProblem p;
              p.hessian = H;
              p.linear_term = q;
              p.ineq_rows = G;
              p.ineq_rhs = h;
              p.eq_rows = Mat::Zero(0, q.size());
              p.eq_rhs = Vec::Zero(0);
              return qp_result(numkit::solve_qp(p, tol, max_iter));
          },
          py::arg("H"), py::arg("q"), py::arg("G"), py::arg("h"), py::arg("tol") = 1e-8, py::arg("max_iter") = 20000,
          "min 0.5 x'Hx + q'x subject to Gx <= h.");

    m.def("solve_dare",
          [](const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
              const auto res = numkit::solve_dare(A, B, Q, R);
              return py::make_tuple(res.P, res.K);
          },
          py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"), "Stabilizing DARE solution (P, K).");

    m.def("discretize_zoh", &discretize_zoh, py::arg("Ac"), py::arg("Bc"), py::arg("Ts"));

    py::class_<SimConfig>(m, "SimConfig")
        .def_readwrite("name", &SimConfig::name)
        .def_readwrite("horizon", &SimConfig::horizon)
        .def_readwrite("governed", &SimConfig::governed)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("max_steps", &SimConfig::max_steps)
        .def_readwrite("start_state", &SimConfig::start_state)
        .def_readwrite("goal", &SimConfig::goal)
        .def_property(
            "planner",
            [](const SimConfig& c) { return to_string(c.planner.kind); },
            [](SimConfig& c, const std::string& k) { c.planner.kind = planner_kind_from_string(k); })
        .def_property(
            "planner_seed", [](const SimConfig& c) { return c.planner.seed; },
            [](SimConfig& c, std::uint64_t s) { c.planner.seed = s; })
        .def_property_readonly("obstacles",
                               [](const SimConfig& c) {
                                   py::list out;
                                   for (const auto& o : c.obstacles) out.append(py::make_tuple(o.center, o.radius));
                                   return out;
                               })
        .def("validate", &SimConfig::validate);

    m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));
    m.def("parse_config", &parse_config, py::arg("json_text"));

    py::class_<SimResult>(m, "SimResult")
        .def_property_readonly("verdict", [](const SimResult& r) { return to_string(r.verdict); })
        .def_readonly("message", &SimResult::message)
        .def_readonly("steps", &SimResult::steps)
        .def_readonly("converged_step", &SimResult::converged_step)
        .def_property_readonly("states",
                               [](const SimResult& r) {
                                   std::vector<Vec> rows;
                                   for (const auto& rec : r.records) rows.push_back(rec.x);
                                   return stack_rows(rows, 9);
                               })
        .def_property_readonly("inputs",
                               [](const SimResult& r) {
                                   std::vector<Vec> rows;
                                   for (const auto& rec : r.records) rows.push_back(rec.u);
                                   return stack_rows(rows, r.input_trim.size());
                               })
        .def_property_readonly("s",
                               [](const SimResult& r) {
                                   Vec s(static_cast<Eigen::Index>(r.records.size()));
                                   for (std::size_t i = 0; i < r.records.size(); ++i)
                                       s(static_cast<Eigen::Index>(i)) = r.records[i].s;
                                   return s;
                               })
        .def_property_readonly("path",
                               [](const SimResult& r) {
                                   return r.path.empty() ? Mat(0, 3) : stack_rows(r.path.waypoints(), 3);
                               })
        .def("violation_count", [](const SimResult& r, const SimConfig& cfg) { return r.violations(cfg.scene()).total(); })
        .def_property_readonly("max_gov_evaluations", &SimResult::max_gov_evaluations);

    m.def("run_closed_loop", &run_closed_loop, py::arg("config"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "write_outputs",
        [](const SimResult& r, const SimConfig& cfg, const std::filesystem::path& out, bool timings) {
            write_outputs(r, cfg, out, OutputOptions{timings});
        },
        py::arg("result"), py::arg("config"), py::arg("out_dir"), py::arg("timings_in_trajectory") = false);

    m.def(
        "run_horizon_study",
        [](const SimConfig& cfg, const std::vector<int>& governed, const std::vector<int>& ungoverned,
           const std::optional<std::filesystem::path>& out) {
            const HorizonStudyReport rep = run_horizon_study(cfg, governed, ungoverned, out);
            py::list runs;
            for (const auto& r : rep.runs) runs.append(study_run(r));
            return runs;
        },
        py::arg("config"), py::arg("governed") = std::vector<int>{5, 15},
        py::arg("ungoverned") = std::vector<int>{5, 20, 50}, py::arg("out_dir") = std::nullopt);

    m.def(
        "plan",
        [](const SimConfig& cfg) {
            const PiecewisePath p =
                plan(cfg.scene(), cfg.build_model(), cfg.start_state.head(3), cfg.goal, cfg.planner);
            return stack_rows(p.waypoints(), 3);
        },
        py::arg("config"), "Planned reference waypoints for the configured scene.");

    m.def("trajectory_header", &trajectory_header);
}
