#include "advgen/scenario.hpp"

#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "advgen/common.hpp"

namespace advgen {

using nlohmann::json;

namespace {
constexpr int kScenarioSchemaVersion = 1;
}

std::string role_name(AgentRole role) {
    switch (role) {
        case AgentRole::ego: return "ego";
        case AgentRole::adversary: return "adversary";
        case AgentRole::background: return "background";
    }
    return "background";
}

AgentRole role_from_name(const std::string& name) {
    if (name == "ego") return AgentRole::ego;
    if (name == "adversary") return AgentRole::adversary;
    if (name == "background") return AgentRole::background;
    throw std::runtime_error("unknown agent role: " + name);
}

const AgentRecord& Scenario::ego() const {
    for (const auto& a : agents)
        if (a.role == AgentRole::ego) return a;
    throw std::runtime_error("scenario " + id + ": missing ego");
}

const AgentRecord& Scenario::adversary() const {
    for (const auto& a : agents)
        if (a.role == AgentRole::adversary) return a;
    throw std::runtime_error("scenario " + id + ": missing adversary");
}

std::vector<const AgentRecord*> Scenario::background() const {
    std::vector<const AgentRecord*> out;
    for (const auto& a : agents)
        if (a.role == AgentRole::background) out.push_back(&a);
    return out;
}

Trajectory Scenario::future_of(const AgentRecord& agent) const {
    Trajectory t;
    t.dt = dt;
    int start = current_index();
    int end = int(agent.logged.poses.size());
    t.poses.assign(agent.logged.poses.begin() + start, agent.logged.poses.begin() + end);
    t.speeds.assign(agent.logged.speeds.begin() + start, agent.logged.speeds.begin() + end);
    return t;
}

void Scenario::validate() const {
    int n_ego = 0, n_adv = 0;
    for (const auto& a : agents) {
        if (a.role == AgentRole::ego) ++n_ego;
        if (a.role == AgentRole::adversary) ++n_adv;
        if (!(a.length > 0.0 && a.width > 0.0))
            throw std::runtime_error("scenario " + id + ": agent " + std::to_string(a.id) +
                                     " has non-positive size");
        if (int(a.logged.poses.size()) != horizon_samples())
            throw std::runtime_error("scenario " + id + ": agent " + std::to_string(a.id) +
                                     " logged length != horizon");
        if (a.logged.speeds.size() != a.logged.poses.size())
            throw std::runtime_error("scenario " + id + ": agent " + std::to_string(a.id) +
                                     " speeds/poses length mismatch");
    }
    if (n_ego != 1) throw std::runtime_error("scenario " + id + ": missing ego");
    if (n_adv != 1) throw std::runtime_error("scenario " + id + ": missing adversary");
    if (!(dt > 0.0)) throw std::runtime_error("scenario " + id + ": dt must be positive");
    if (map.polylines.empty()) throw std::runtime_error("scenario " + id + ": empty map");
}

void save_scenario(const Scenario& s, const std::string& path) {
    json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["id"] = s.id;
    j["dt"] = s.dt;
    j["history_steps"] = s.history_steps;
    j["future_steps"] = s.future_steps;
    j["lane_width"] = s.map.lane_width;
    json lines = json::array();
    for (const auto& pl : s.map.polylines) {
        json line;
        line["impassable"] = pl.impassable;
        json pts = json::array();
        for (const auto& p : pl.points) pts.push_back(json::array({p.x, p.y}));
        line["points"] = std::move(pts);
        lines.push_back(std::move(line));
    }
    j["map_polylines"] = std::move(lines);
    json agents = json::array();
    for (const auto& a : s.agents) {
        json ja;
        ja["id"] = a.id;
        ja["role"] = role_name(a.role);
        ja["length"] = a.length;
        ja["width"] = a.width;
        json logged = json::array();
        for (size_t i = 0; i < a.logged.poses.size(); ++i) {
            const Pose2& p = a.logged.poses[i];
            logged.push_back(json::array({p.x, p.y, p.heading, a.logged.speeds[i]}));
        }
        ja["logged"] = std::move(logged);
        agents.push_back(std::move(ja));
    }
    j["agents"] = std::move(agents);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("scenario parse error in " + path + ": " + e.what());
    }
    try {
        int version = j.at("schema_version").get<int>();
        if (version != kScenarioSchemaVersion)
            throw std::runtime_error("unsupported scenario schema version " +
                                     std::to_string(version));
        Scenario s;
        s.id = j.at("id").get<std::string>();
        s.dt = j.at("dt").get<double>();
        s.history_steps = j.at("history_steps").get<int>();
        s.future_steps = j.at("future_steps").get<int>();
        s.map.lane_width = j.at("lane_width").get<double>();
        for (const auto& line : j.at("map_polylines")) {
            Polyline pl;
            pl.impassable = line.at("impassable").get<bool>();
            for (const auto& pt : line.at("points"))
                pl.points.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
            if (pl.points.size() < 2)
                throw std::runtime_error("polyline with fewer than 2 points");
            s.map.polylines.push_back(std::move(pl));
        }
        for (const auto& ja : j.at("agents")) {
            AgentRecord a;
            a.id = ja.at("id").get<int>();
            a.role = role_from_name(ja.at("role").get<std::string>());
            a.length = ja.at("length").get<double>();
            a.width = ja.at("width").get<double>();
            a.logged.dt = s.dt;
            for (const auto& row : ja.at("logged")) {
                a.logged.poses.push_back(
                    {row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>()});
                a.logged.speeds.push_back(row.at(3).get<double>());
            }
            s.agents.push_back(std::move(a));
        }
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw std::runtime_error("scenario parse error in " + path + ": " + e.what());
    }
}

std::vector<double> context_features(const Scenario& s, const FeatureConfig& cfg) {
    int cur = s.current_index();
    if (cur + 1 < cfg.history_window)
        throw std::invalid_argument("context_features: insufficient history");
    const AgentRecord& adv = s.adversary();
    const AgentRecord& ego = s.ego();
    const Pose2& frame = adv.logged.poses[cur];

    std::vector<double> out;
    out.reserve(cfg.context_dim());
    auto push_agent = [&](const AgentRecord& agent) {
        for (int k = cfg.history_window - 1; k >= 0; --k) {
            int idx = cur - k;
            const Pose2& p = agent.logged.poses[idx];
            Vec2 rel = to_body_frame(p.position(), frame);
            out.push_back(rel.x / cfg.pos_scale);
            out.push_back(rel.y / cfg.pos_scale);
            out.push_back(wrap_angle(p.heading - frame.heading));
            out.push_back(agent.logged.speeds[idx] / cfg.speed_scale);
        }
    };
    push_agent(adv);
    push_agent(ego);
    return out;
}

std::vector<double> goal_features(const Scenario& s, Vec2 goal_body, const FeatureConfig& cfg) {
    const AgentRecord& adv = s.adversary();
    const Pose2& frame = adv.logged.poses[s.current_index()];
    Vec2 goal_world = to_world_frame(goal_body, frame);

    double range = goal_body.norm();
    double bearing = (range > 1e-9) ? std::atan2(goal_body.y, goal_body.x) : 0.0;

    double d_center = std::numeric_limits<double>::infinity();
    double d_impass = std::numeric_limits<double>::infinity();
    for (const auto& pl : s.map.polylines) {
        double d = point_polyline_distance(goal_world, pl);
        if (pl.impassable)
            d_impass = std::min(d_impass, d);
        else
            d_center = std::min(d_center, d);
    }
    if (!std::isfinite(d_center)) d_center = 0.0;
    if (!std::isfinite(d_impass)) d_impass = cfg.pos_scale;

    return {goal_body.x / cfg.pos_scale, goal_body.y / cfg.pos_scale,
            range / cfg.pos_scale,       bearing,
            d_center / s.map.lane_width, d_impass / s.map.lane_width};
}

}  // namespace advgen
