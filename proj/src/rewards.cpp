#include "advgen/rewards.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "advgen/common.hpp"

namespace advgen {

double softplus_penalty(double x, double thresh) { return log1p_exp(std::fabs(x) - thresh); }

int first_collision_step(const Trajectory& adv, const Trajectory& ego, AgentSize adv_size,
                         AgentSize ego_size) {
    if (adv.poses.size() != ego.poses.size())
        throw std::invalid_argument("first_collision_step: trajectory length mismatch");
    int T = adv.steps();
    for (int t = 1; t <= T; ++t) {
        OrientedBox a{adv.poses[t], adv_size.length, adv_size.width};
        OrientedBox b{ego.poses[t], ego_size.length, ego_size.width};
        if (obb_intersects(a, b)) return t;
    }
    return 0;
}

double adversarial_reward(const Trajectory& adv, const Trajectory& ego, AgentSize adv_size,
                          AgentSize ego_size, const RewardConfig& cfg) {
    if (adv.poses.size() != ego.poses.size())
        throw std::invalid_argument("adversarial_reward: trajectory length mismatch");
    int T = adv.steps();
    if (T < 1) throw std::invalid_argument("adversarial_reward: need at least one step");
    int t_coll = first_collision_step(adv, ego, adv_size, ego_size);
    if (t_coll > 0) return cfg.c_coll * (1.0 - double(t_coll) / double(T));
    double d_min = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= T; ++t) {
        d_min = std::min(d_min, (adv.poses[t].position() - ego.poses[t].position()).norm());
    }
    return cfg.c_prox * std::exp(-cfg.lambda_prox * d_min);
}

RealismPenalty realism_penalty(const Trajectory& traj, const RewardConfig& cfg) {
    if (traj.poses.size() < 3)
        throw std::invalid_argument("realism_penalty: trajectory too short");
    KinematicProfile prof = kinematic_profile(traj);
    size_t T = prof.speeds.size();

    RealismPenalty out;
    double kin = 0.0, stop_turn = 0.0;
    for (size_t t = 0; t < T; ++t) {
        kin += cfg.w_a * (softplus_penalty(prof.long_accels[t], cfg.a_max) +
                          softplus_penalty(prof.lat_accels[t], cfg.a_lat_max)) +
               cfg.w_omega * softplus_penalty(prof.ang_vels[t], cfg.omega_max);
        stop_turn += std::fabs(prof.ang_vels[t]) / (prof.speeds[t] + cfg.eps);
    }
    out.kin = kin / double(T);

    std::vector<double> headings(traj.poses.size());
    for (size_t i = 0; i < traj.poses.size(); ++i) headings[i] = traj.poses[i].heading;
    std::vector<double> unwrapped = unwrap_headings(headings);
    double dpsi_total = std::fabs(unwrapped.back() - unwrapped.front());
    out.beh = cfg.w_turn * softplus_penalty(dpsi_total, cfg.dpsi_max) +
              cfg.w_stop_turn / double(T) * stop_turn;
    return out;
}

namespace {

// trajectory step t corresponds to absolute log index current + t
int step_violates(const Trajectory& traj, const Scenario& s, int t, AgentSize size) {
    OrientedBox box{traj.poses[t], size.length, size.width};
    for (const auto& pl : s.map.polylines) {
        if (pl.impassable && obb_polyline_intersects(box, pl)) return 1;
    }
    // outside the lane corridor entirely (never touched an edge line; e.g.
    // the trajectory starts beyond the boundary)
    double d_center = std::numeric_limits<double>::infinity();
    bool has_centerline = false;
    for (const auto& pl : s.map.polylines) {
        if (pl.impassable) continue;
        has_centerline = true;
        d_center = std::min(d_center, point_polyline_distance(box.center.position(), pl));
    }
    if (has_centerline && d_center > 0.5 * s.map.lane_width + 0.25) return 1;

    int abs_index = s.current_index() + t;
    for (const AgentRecord* bg : s.background()) {
        if (obb_intersects(box, bg->box_at(abs_index))) return 2;
    }
    return 0;
}

}  // namespace

int feasibility(const Trajectory& traj, const Scenario& s, const RewardConfig&) {
    if (int(traj.poses.size()) > s.future_steps + 1)
        throw std::invalid_argument("feasibility: trajectory longer than scenario horizon");
    AgentSize size{s.adversary().length, s.adversary().width};
    for (int t = 0; t < int(traj.poses.size()); ++t) {
        if (step_violates(traj, s, t, size)) return 0;
    }
    return 1;
}

double pref_reward(const Trajectory& traj, const Trajectory& ego, const Scenario& s,
                   PreferenceWeights weights, const RewardConfig& cfg) {
    AgentSize adv_size{s.adversary().length, s.adversary().width};
    AgentSize ego_size{s.ego().length, s.ego().width};
    double adv = adversarial_reward(traj, ego, adv_size, ego_size, cfg);
    RealismPenalty p = realism_penalty(traj, cfg);
    return weights.adv * adv - weights.real * p.total();
}

double user_reward(const Trajectory& traj, const Trajectory& ego, const Scenario& s, double mu,
                   const RewardConfig& cfg) {
    return pref_reward(traj, ego, s, {mu, 1.0 - mu}, cfg);
}

RewardBreakdown reward_breakdown(const Trajectory& traj, const Trajectory& ego, const Scenario& s,
                                 PreferenceWeights weights, const RewardConfig& cfg) {
    AgentSize adv_size{s.adversary().length, s.adversary().width};
    AgentSize ego_size{s.ego().length, s.ego().width};
    RewardBreakdown row;
    row.adv = adversarial_reward(traj, ego, adv_size, ego_size, cfg);
    RealismPenalty p = realism_penalty(traj, cfg);
    row.p_kin = p.kin;
    row.p_beh = p.beh;
    row.feasible = feasibility(traj, s, cfg);
    row.pref = weights.adv * row.adv - weights.real * (row.p_kin + row.p_beh);
    return row;
}

double scalarized_total_diag(const Trajectory& traj, const Trajectory& ego, const Scenario& s,
                             double w_adv, double w_real, double w_map, const RewardConfig& cfg) {
    AgentSize adv_size{s.adversary().length, s.adversary().width};
    AgentSize ego_size{s.ego().length, s.ego().width};
    double adv = adversarial_reward(traj, ego, adv_size, ego_size, cfg);
    RealismPenalty p = realism_penalty(traj, cfg);
    int violations = 0;
    for (int t = 0; t < int(traj.poses.size()); ++t) {
        if (step_violates(traj, s, t, adv_size)) ++violations;
    }
    double p_map = double(violations) / double(traj.poses.size());
    return w_adv * adv - w_real * p.total() - w_map * p_map;
}

}  // namespace advgen
