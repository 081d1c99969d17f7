#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pathfg/sim.hpp"

namespace pathfg {

namespace {

using json = nlohmann::json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& require(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(where(key) + ": missing required key");
        return j_.at(key);
    }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        return j_.contains(key) ? as_number(j_.at(key), where(key)) : fallback;
    }

    double number(const std::string& key) { return as_number(require(key), where(key)); }

    long long integer(const std::string& key, long long fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string& key, bool fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ConfigError(where(key) + ": expected true or false");
        return j_.at(key).get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        if (!j_.at(key).is_string()) throw ConfigError(where(key) + ": expected a string");
        return j_.at(key).get<std::string>();
    }

    Vec vector(const std::string& key, Eigen::Index size) { return as_vector(require(key), where(key), size); }

    std::optional<Fields> object(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) return std::nullopt;
        return Fields(j_.at(key), where(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }

    std::string where(const std::string& key = {}) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
        return d;
    }

    static Vec as_vector(const json& v, const std::string& where, Eigen::Index size) {
        if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != size) {
            std::ostringstream msg;
            msg << where << ": expected an array of " << size << " numbers";
            throw ConfigError(msg.str());
        }
        Vec out(size);
        for (Eigen::Index i = 0; i < size; ++i)
            out(i) = as_number(v.at(static_cast<std::size_t>(i)), where + "[" + std::to_string(i) + "]");
        return out;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void positive(double v, const std::string& field) {
    if (!(v > 0.0)) throw ConfigError(field + ": must be positive");
}

}  // namespace

void SimConfig::validate() const {
    positive(model.mass_kg, "model.mass_kg");
    positive(model.Ts, "model.sample_time_s");
    if (!std::isfinite(model.gravity_mps2) || model.gravity_mps2 == 0.0) throw ConfigError("model.gravity_mps2: must be finite and nonzero");
    positive(position_max_m, "constraints.position_max_m");
    positive(velocity_max_mps, "constraints.velocity_max_mps");
    positive(attitude_max_rad, "constraints.attitude_max_rad");
    positive(angular_rate_max_radps, "constraints.angular_rate_max_radps");
    if (!(thrust_min_N < thrust_max_N)) throw ConfigError("constraints.thrust_min_N: must be below thrust_max_N");
    const double hover = model.hover_thrust();
    if (!(thrust_min_N < hover && hover < thrust_max_N))
        throw ConfigError("constraints: hover thrust m*|g| must lie strictly inside [thrust_min_N, thrust_max_N]");
    if (!(agent_radius_m >= 0.0)) throw ConfigError("scene.agent_radius_m: must be nonnegative");
    positive(epsilon_m, "scene.epsilon_m");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const std::string f = "scene.obstacles[" + std::to_string(i) + "]";
        if (obstacles[i].center.size() != 3) throw ConfigError(f + ".center_m: expected 3 numbers");
        positive(obstacles[i].radius, f + ".radius_m");
    }
    if (start_state.size() != 9) throw ConfigError("start_state: expected 9 numbers");
    if (goal.size() != 3) throw ConfigError("goal_m: expected 3 numbers");
    if (horizon < 1) throw ConfigError("mpc.horizon: must be at least 1");
    positive(q_position, "mpc.q_position");
    positive(q_velocity, "mpc.q_velocity");
    positive(q_attitude, "mpc.q_attitude");
    positive(r_scale, "mpc.r_scale");
    positive(ocp.qp_tol, "mpc.qp_tol");
    if (ocp.qp_max_iter < 1) throw ConfigError("mpc.qp_max_iter: must be at least 1");
    if (!(ocp.constraint_backoff >= 0.0)) throw ConfigError("mpc.constraint_backoff: must be nonnegative");
    if (max_steps < 1) throw ConfigError("sim.max_steps: must be at least 1");
    positive(convergence_tol, "sim.convergence_tol");
    try {
        planner.validate();
        governor.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
}

Scene SimConfig::scene() const {
    Scene s;
    s.x_max.resize(9);
    s.x_max << position_max_m, position_max_m, position_max_m, velocity_max_mps, velocity_max_mps, velocity_max_mps,
        attitude_max_rad, attitude_max_rad, attitude_max_rad;
    s.x_min = -s.x_max;
    const double hover = model.hover_thrust();
    s.u_min.resize(4);
    s.u_max.resize(4);
    s.u_min << thrust_min_N - hover, -angular_rate_max_radps, -angular_rate_max_radps, -angular_rate_max_radps;
    s.u_max << thrust_max_N - hover, angular_rate_max_radps, angular_rate_max_radps, angular_rate_max_radps;
    s.obstacles = obstacles;
    s.agent_radius = agent_radius_m;
    s.epsilon = epsilon_m;
    s.xi_map = Mat::Zero(3, 9);
    s.xi_map.leftCols(3).setIdentity();
    return s;
}

LtiModel SimConfig::build_model() const { return build_quadrotor_model(model); }

Mat SimConfig::Q() const {
    Vec d(9);
    d << q_position, q_position, q_position, q_velocity, q_velocity, q_velocity, q_attitude, q_attitude, q_attitude;
    return d.asDiagonal();
}

Mat SimConfig::R() const { return Mat::Identity(4, 4) * r_scale; }

SimConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    SimConfig cfg;
    Fields top(root, "");
    cfg.name = top.string("name", cfg.name);
    cfg.seed = static_cast<std::uint64_t>(top.integer("seed", static_cast<long long>(cfg.seed)));

    if (auto m = top.object("model")) {
        cfg.model.mass_kg = m->number("mass_kg", cfg.model.mass_kg);
        cfg.model.gravity_mps2 = m->number("gravity_mps2", cfg.model.gravity_mps2);
        cfg.model.Ts = m->number("sample_time_s", cfg.model.Ts);
        m->finish();
    }
    if (auto c = top.object("constraints")) {
        cfg.position_max_m = c->number("position_max_m", cfg.position_max_m);
        cfg.velocity_max_mps = c->number("velocity_max_mps", cfg.velocity_max_mps);
        cfg.attitude_max_rad = c->number("attitude_max_rad", cfg.attitude_max_rad);
        cfg.thrust_min_N = c->number("thrust_min_N", cfg.thrust_min_N);
        cfg.thrust_max_N = c->number("thrust_max_N", cfg.thrust_max_N);
        cfg.angular_rate_max_radps = c->number("angular_rate_max_radps", cfg.angular_rate_max_radps);
        c->finish();
    }

    Fields scene(top.require("scene"), "scene");
    cfg.agent_radius_m = scene.number("agent_radius_m", cfg.agent_radius_m);
    cfg.epsilon_m = scene.number("epsilon_m", cfg.epsilon_m);
    const json& obstacles = scene.require("obstacles");
    if (!obstacles.is_array()) throw ConfigError("scene.obstacles: expected an array");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        Fields o(obstacles[i], "scene.obstacles[" + std::to_string(i) + "]");
        SphereObstacle obs;
        obs.center = o.vector("center_m", 3);
        obs.radius = o.number("radius_m");
        if (!(obs.radius > 0.0)) throw ConfigError(o.where("radius_m") + ": must be positive");
        o.finish();
        cfg.obstacles.push_back(std::move(obs));
    }
    scene.finish();

    const bool has_pos = top.has("start_position_m");
    const bool has_state = top.has("start_state");
    if (has_pos == has_state) throw ConfigError("start_position_m: exactly one of start_position_m or start_state is required");
    if (has_pos) {
        cfg.start_state = Vec::Zero(9);
        cfg.start_state.head(3) = top.vector("start_position_m", 3);
    } else {
        cfg.start_state = top.vector("start_state", 9);
    }
    cfg.goal = top.vector("goal_m", 3);

    if (auto m = top.object("mpc")) {
        cfg.horizon = static_cast<int>(m->integer("horizon", cfg.horizon));
        cfg.q_position = m->number("q_position", cfg.q_position);
        cfg.q_velocity = m->number("q_velocity", cfg.q_velocity);
        cfg.q_attitude = m->number("q_attitude", cfg.q_attitude);
        cfg.r_scale = m->number("r_scale", cfg.r_scale);
        cfg.ocp.qp_tol = m->number("qp_tol", cfg.ocp.qp_tol);
        cfg.ocp.qp_max_iter = static_cast<int>(m->integer("qp_max_iter", cfg.ocp.qp_max_iter));
        cfg.ocp.constraint_backoff = m->number("constraint_backoff", cfg.ocp.constraint_backoff);
        m->finish();
    }
    if (auto p = top.object("planner")) {
        cfg.planner.kind = planner_kind_from_string(p->string("kind", to_string(cfg.planner.kind)));
        cfg.planner.clearance = p->number("clearance_m", cfg.planner.clearance);
        cfg.planner.max_segment = p->number("max_segment_m", cfg.planner.max_segment);
        if (p->has("bounds_min_m") || p->has("bounds_max_m")) {
            cfg.planner.bounds_min = p->vector("bounds_min_m", 3);
            cfg.planner.bounds_max = p->vector("bounds_max_m", 3);
        }
        if (auto r = p->object("rrt")) {
            cfg.planner.rrt.max_iters = static_cast<int>(r->integer("max_iters", cfg.planner.rrt.max_iters));
            cfg.planner.rrt.step_size = r->number("step_size_m", cfg.planner.rrt.step_size);
            cfg.planner.rrt.goal_bias = r->number("goal_bias", cfg.planner.rrt.goal_bias);
            cfg.planner.rrt.rewire_radius = r->number("rewire_radius_m", cfg.planner.rrt.rewire_radius);
            r->finish();
        }
        if (auto f = p->object("potential_field")) {
            auto& pf = cfg.planner.pf;
            pf.attractive_gain = f->number("attractive_gain", pf.attractive_gain);
            pf.repulsive_gain = f->number("repulsive_gain", pf.repulsive_gain);
            pf.influence_distance = f->number("influence_distance_m", pf.influence_distance);
            pf.step_size = f->number("step_size_m", pf.step_size);
            pf.max_steps = static_cast<int>(f->integer("max_steps", pf.max_steps));
            pf.stall_window = static_cast<int>(f->integer("stall_window", pf.stall_window));
            f->finish();
        }
        p->finish();
    }
    if (auto g = top.object("governor")) {
        cfg.governor.grid_step = g->number("grid_step", cfg.governor.grid_step);
        cfg.governor.bisect_tol = g->number("bisect_tol", cfg.governor.bisect_tol);
        g->finish();
    }
    if (auto s = top.object("sim")) {
        cfg.max_steps = static_cast<int>(s->integer("max_steps", cfg.max_steps));
        cfg.convergence_tol = s->number("convergence_tol_m", cfg.convergence_tol);
        cfg.governed = s->boolean("governed", cfg.governed);
        s->finish();
    }
    top.finish();
    cfg.planner.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace pathfg
