#pragma once

#include <string>
#include <vector>

#include "advgen/geometry.hpp"
#include "advgen/scenario.hpp"

namespace advgen {

struct RewardConfig {
    double c_coll = 10.0;      // collision reward scale
    double c_prox = 1.0;       // proximity reward scale
    double lambda_prox = 0.2;  // proximity decay, 1/m
    double a_max = 7.0;        // longitudinal acceleration threshold, m/s^2
    double a_lat_max = 6.0;    // lateral acceleration threshold, m/s^2
    double omega_max = 0.8;    // yaw-rate threshold, rad/s
    double dpsi_max = M_PI;    // total-heading-change threshold, rad
    // Weights are calibrated so the penalty's spread across goal-directed
    // maneuvers is commensurate with the reward scale c_coll.
    double w_a = 30.0;
    double w_omega = 40.0;
    double w_turn = 5.0;
    double w_stop_turn = 5.0;
    double eps = 1e-3;  // m/s, stop-turn denominator guard
    double dt = 0.1;
};

struct PreferenceWeights {
    double adv = 0.5;
    double real = 0.5;
};

struct AgentSize {
    double length = 4.8;
    double width = 2.0;
};

// Smooth threshold penalty log(1 + exp(|x| - thresh)); numerically stable
// for arguments far past the threshold.
double softplus_penalty(double x, double thresh);

// Collision-timing reward when the boxes ever overlap, otherwise a
// proximity reward decaying with the minimum center distance. Step 0 of
// both trajectories is the shared current state and is not scored.
double adversarial_reward(const Trajectory& adv, const Trajectory& ego, AgentSize adv_size,
                          AgentSize ego_size, const RewardConfig& cfg);

// First step index in [1, T] where the two boxes overlap, or 0 if none.
int first_collision_step(const Trajectory& adv, const Trajectory& ego, AgentSize adv_size,
                         AgentSize ego_size);

struct RealismPenalty {
    double kin = 0.0;
    double beh = 0.0;
    double total() const { return kin + beh; }
};

RealismPenalty realism_penalty(const Trajectory& traj, const RewardConfig& cfg);

// Hard map-compliance predicate: 0 iff some step's box touches an
// impassable polyline or a background vehicle's box at the same step.
// Background vehicles replay their logged motion.
int feasibility(const Trajectory& traj, const Scenario& s, const RewardConfig& cfg);

// w_adv * R_adv - w_real * (P_kin + P_beh)
double pref_reward(const Trajectory& traj, const Trajectory& ego, const Scenario& s,
                   PreferenceWeights weights, const RewardConfig& cfg);

// pref_reward with weights (mu, 1 - mu)
double user_reward(const Trajectory& traj, const Trajectory& ego, const Scenario& s, double mu,
                   const RewardConfig& cfg);

// Per-trajectory breakdown, one CSV row for the evaluate command.
struct RewardBreakdown {
    double adv = 0.0;
    double p_kin = 0.0;
    double p_beh = 0.0;
    int feasible = 1;
    double pref = 0.0;
};

RewardBreakdown reward_breakdown(const Trajectory& traj, const Trajectory& ego, const Scenario& s,
                                 PreferenceWeights weights, const RewardConfig& cfg);

// Single scalarized objective with a soft map term (violation-step
// fraction). Diagnostic only; training never consumes it.
double scalarized_total_diag(const Trajectory& traj, const Trajectory& ego, const Scenario& s,
                             double w_adv, double w_real, double w_map, const RewardConfig& cfg);

}  // namespace advgen
