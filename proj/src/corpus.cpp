#include "advgen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "advgen/common.hpp"

namespace advgen {

using nlohmann::json;

namespace {

// One lane-parallel curve family: straight roads and constant-radius arcs.
// Lateral offsets are positive to the left of the driving direction.
struct RoadGeometry {
    bool curved = false;
    int turn_sign = 1;       // +1 left, -1 right
    double radius = 0.0;     // reference-line radius for curved roads
    double length = 200.0;   // reference-line length
    int lanes = 2;
    double lane_width = 3.5;
    double rotation = 0.0;   // global placement
    Vec2 shift;

    double lane_offset(int lane) const {
        return (double(lane) - 0.5 * double(lanes - 1)) * lane_width;
    }

    double half_width() const { return 0.5 * double(lanes) * lane_width; }

    // pose on the curve at lateral offset d and own-path arc length s
    Pose2 pose_at(double d, double s) const {
        Pose2 local;
        if (!curved) {
            local = {s, d, 0.0};
        } else {
            double rk = radius - double(turn_sign) * d;
            double phi = s / rk;
            local = {rk * std::sin(phi), double(turn_sign) * (radius - rk * std::cos(phi)),
                     double(turn_sign) * phi};
        }
        return transform_pose(local, rotation, shift);
    }

    Polyline sample_line(double d, bool impassable) const {
        Polyline pl;
        pl.impassable = impassable;
        double own_length = length;
        if (curved) own_length = length * (radius - double(turn_sign) * d) / radius;
        int n = std::max(2, int(std::ceil(own_length / 2.0)) + 1);
        for (int i = 0; i < n; ++i) {
            double s = own_length * double(i) / double(n - 1);
            Pose2 p = pose_at(d, s);
            pl.points.push_back({p.x, p.y});
        }
        return pl;
    }
};

struct SimAgent {
    int lane = 0;
    double s = 0.0;  // own-path arc length
    double v = 0.0;
    double v_desired = 10.0;
    int leader = -1;  // index into the agent list, same lane only
    // optional scripted maneuver, keeps logs multimodal
    int maneuver = 0;          // 0 none, 1 lane change, 2 slow down, 3 speed up
    int maneuver_start = 0;    // step index
    int target_lane = 0;
    double target_speed_scale = 1.0;
};

double idm_accel(double v, double v_desired, double gap, double dv) {
    const double a_max = 1.5, b_comf = 2.0, headway = 1.5, s0 = 2.0;
    double free_term = 1.0 - std::pow(v / std::max(v_desired, 0.1), 4.0);
    if (gap <= 0.0) return -b_comf * 2.0;
    double s_star = s0 + std::max(0.0, v * headway + v * dv / (2.0 * std::sqrt(a_max * b_comf)));
    return a_max * (free_term - (s_star / gap) * (s_star / gap));
}

bool boxes_clear(const OrientedBox& a, const OrientedBox& b, double margin) {
    OrientedBox ia{a.center, a.length + 2.0 * margin, a.width + 2.0 * margin};
    return !obb_intersects(ia, b);
}

Scenario build_one(uint64_t scenario_seed, int index, const CorpusConfig& cfg) {
    Rng rng(scenario_seed);

    RoadGeometry road;
    road.lanes = int(rng.below(uint64_t(cfg.max_lanes - cfg.min_lanes + 1))) + cfg.min_lanes;
    road.lane_width = cfg.lane_width;
    road.curved = rng.uniform() < cfg.arc_fraction;
    road.turn_sign = rng.uniform() < 0.5 ? 1 : -1;
    road.radius = rng.uniform(cfg.min_radius, cfg.max_radius);
    road.length = 220.0;
    road.rotation = rng.uniform(-M_PI, M_PI);
    road.shift = {rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0)};

    Scenario s;
    s.id = "scn-" + std::to_string(index);
    s.dt = cfg.dt;
    s.history_steps = cfg.history_steps;
    s.future_steps = cfg.future_steps;
    s.map.lane_width = cfg.lane_width;
    for (int k = 0; k < road.lanes; ++k)
        s.map.polylines.push_back(road.sample_line(road.lane_offset(k), false));
    s.map.polylines.push_back(road.sample_line(road.half_width(), true));
    s.map.polylines.push_back(road.sample_line(-road.half_width(), true));

    int steps = s.horizon_samples();

    // ego + adversary, same lane (follower) or adjacent lanes (side-by-side)
    std::vector<SimAgent> sims(2);
    SimAgent& ego = sims[0];
    SimAgent& adv = sims[1];
    ego.lane = int(rng.below(uint64_t(road.lanes)));
    ego.s = 30.0;
    ego.v = rng.uniform(cfg.min_speed, cfg.max_speed);
    ego.v_desired = ego.v;

    bool same_lane = (rng.uniform() < 0.4);
    if (same_lane) {
        // adversary leads, ego follows; attacking means braking in its path
        adv.lane = ego.lane;
        adv.s = ego.s + rng.uniform(12.0, 20.0);
        ego.leader = 1;
    } else {
        int side = (ego.lane == 0) ? 1 : (ego.lane == road.lanes - 1 ? -1 : (rng.uniform() < 0.5 ? 1 : -1));
        adv.lane = ego.lane + side;
        adv.s = ego.s + rng.uniform(-10.0, 10.0);
    }
    adv.v = rng.uniform(cfg.min_speed, cfg.max_speed);
    adv.v_desired = adv.v;

    const int change_steps = 30;  // 3 s lane transition
    auto simulate = [&](std::vector<SimAgent> agents, Rng noise_rng) {
        std::vector<std::vector<Pose2>> poses(agents.size());
        std::vector<std::vector<double>> speeds(agents.size());
        for (int t = 0; t < steps; ++t) {
            for (size_t i = 0; i < agents.size(); ++i) {
                SimAgent& a = agents[i];
                double d = road.lane_offset(a.lane);
                double tilt = 0.0;
                if (a.maneuver == 1) {
                    double u = std::clamp(double(t - a.maneuver_start) / double(change_steps),
                                          0.0, 1.0);
                    double f = u * u * (3.0 - 2.0 * u);
                    double d1 = road.lane_offset(a.target_lane);
                    double lat_rate = (d1 - d) * 6.0 * u * (1.0 - u) /
                                      (double(change_steps) * cfg.dt);
                    d = d + (d1 - d) * f;
                    tilt = std::atan2(lat_rate, std::max(a.v, 0.5));
                }
                Pose2 p = road.pose_at(d, a.s);
                p.heading += tilt;
                poses[i].push_back(p);
                speeds[i].push_back(a.v);
            }
            for (size_t i = 0; i < agents.size(); ++i) {
                SimAgent& a = agents[i];
                double v_des = a.v_desired;
                if ((a.maneuver == 2 || a.maneuver == 3) && t >= a.maneuver_start)
                    v_des *= a.target_speed_scale;
                double accel;
                if (a.leader >= 0) {
                    const SimAgent& lead = agents[a.leader];
                    double gap = lead.s - a.s - 4.8;
                    accel = idm_accel(a.v, v_des, gap, a.v - lead.v);
                } else {
                    accel = idm_accel(a.v, v_des, 1e9, 0.0);
                }
                accel += noise_rng.normal(0.0, cfg.accel_noise);
                accel = std::clamp(accel, -4.0, 2.5);
                a.v = std::clamp(a.v + accel * cfg.dt, 0.0, cfg.max_speed + 3.0);
                a.s += a.v * cfg.dt;
            }
        }
        // logged speeds follow the realized displacements (lane changes add
        // a lateral component)
        for (size_t i = 0; i < agents.size(); ++i) {
            for (int t = 1; t < steps; ++t) {
                speeds[i][t] =
                    (poses[i][t].position() - poses[i][t - 1].position()).norm() / cfg.dt;
            }
            if (steps > 1) speeds[i][0] = speeds[i][1];
        }
        return std::make_pair(poses, speeds);
    };

    auto assign_maneuver = [&](SimAgent& a, double prob) {
        if (rng.uniform() >= prob) return;
        int kind = 1 + int(rng.below(3));
        if (kind == 1) {
            std::vector<int> options;
            if (a.lane > 0) options.push_back(a.lane - 1);
            if (a.lane + 1 < road.lanes) options.push_back(a.lane + 1);
            if (options.empty()) return;
            a.maneuver = 1;
            a.target_lane = options[rng.below(options.size())];
        } else {
            a.maneuver = kind;
            a.target_speed_scale = (kind == 2) ? rng.uniform(0.4, 0.7) : rng.uniform(1.15, 1.3);
        }
        a.maneuver_start = cfg.history_steps + 5 + int(rng.below(31));
    };
    assign_maneuver(adv, 0.45);
    assign_maneuver(ego, 0.30);

    auto [poses, speeds] = simulate(sims, Rng(rng.next_u64()));

    AgentRecord ego_rec;
    ego_rec.id = 0;
    ego_rec.role = AgentRole::ego;
    ego_rec.logged = {poses[0], speeds[0], cfg.dt};
    AgentRecord adv_rec;
    adv_rec.id = 1;
    adv_rec.role = AgentRole::adversary;
    adv_rec.logged = {poses[1], speeds[1], cfg.dt};
    s.agents.push_back(ego_rec);
    s.agents.push_back(adv_rec);

    // static background vehicles, kept clear of both logged corridors
    int want_bg = int(rng.below(uint64_t(cfg.max_background + 1)));
    int next_id = 2;
    for (int b = 0; b < want_bg; ++b) {
        for (int attempt = 0; attempt < 30; ++attempt) {
            int lane = int(rng.below(uint64_t(road.lanes)));
            double pos = rng.uniform(10.0, road.length - 30.0);
            Pose2 pose = road.pose_at(road.lane_offset(lane), pos);
            OrientedBox box{pose, 4.8, 2.0};
            bool ok = true;
            for (const auto& agent : s.agents) {
                for (const auto& p : agent.logged.poses) {
                    if (!boxes_clear(box, {p, agent.length, agent.width}, 1.5)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (ok) {
                for (const auto& pl : s.map.polylines) {
                    if (pl.impassable && obb_polyline_intersects(box, pl)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) continue;
            AgentRecord bg;
            bg.id = next_id++;
            bg.role = AgentRole::background;
            bg.logged.dt = cfg.dt;
            bg.logged.poses.assign(steps, pose);
            bg.logged.speeds.assign(steps, 0.0);
            s.agents.push_back(std::move(bg));
            break;
        }
    }
    return s;
}

bool log_is_feasible(const Scenario& s, const RewardConfig& rcfg) {
    // both driven agents stay on the road and clear of everything else
    for (const AgentRecord* agent : {&s.ego(), &s.adversary()}) {
        for (int t = 0; t < s.horizon_samples(); ++t) {
            OrientedBox box = agent->box_at(t);
            for (const auto& pl : s.map.polylines)
                if (pl.impassable && obb_polyline_intersects(box, pl)) return false;
            for (const auto& other : s.agents) {
                if (other.id == agent->id) continue;
                if (obb_intersects(box, other.box_at(t))) return false;
            }
        }
    }
    Trajectory adv_future = s.future_of(s.adversary());
    return feasibility(adv_future, s, rcfg) == 1;
}

}  // namespace

std::vector<Scenario> generate_corpus(uint64_t seed, int n, const CorpusConfig& cfg) {
    if (n < 1) throw std::invalid_argument("generate_corpus: n must be >= 1");
    if (cfg.min_lanes < 1 || cfg.max_lanes < cfg.min_lanes)
        throw std::invalid_argument("generate_corpus: bad lane counts");
    RewardConfig rcfg;
    rcfg.dt = cfg.dt;
    std::vector<Scenario> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Scenario s;
        for (int attempt = 0;; ++attempt) {
            s = build_one(seed_for(seed, "corpus-scenario", uint64_t(i) * 1000 + attempt), i, cfg);
            if (log_is_feasible(s, rcfg)) break;
            if (attempt > 50)
                throw std::runtime_error("generate_corpus: could not build feasible scenario");
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

void save_corpus(const std::vector<Scenario>& corpus, uint64_t seed, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["kind"] = "corpus_manifest";
    manifest["seed"] = seed;
    manifest["count"] = corpus.size();
    json list = json::array();
    for (const auto& s : corpus) {
        std::string file = s.id + ".json";
        save_scenario(s, dir + "/" + file);
        json row;
        row["id"] = s.id;
        row["file"] = file;
        list.push_back(std::move(row));
    }
    manifest["scenarios"] = std::move(list);
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus manifest in " + dir);
    out << manifest.dump(1) << '\n';
}

std::vector<Scenario> load_corpus(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus manifest: " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("corpus manifest parse error: " + std::string(e.what()));
    }
    std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    std::vector<Scenario> out;
    for (const auto& row : manifest.at("scenarios")) {
        out.push_back(load_scenario((base / row.at("file").get<std::string>()).string()));
    }
    return out;
}

}  // namespace advgen
