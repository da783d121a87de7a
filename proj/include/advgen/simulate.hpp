#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "advgen/common.hpp"
#include "advgen/rewards.hpp"
#include "advgen/scenario.hpp"

namespace advgen {

enum class EgoKind { replay, idm, reactive_pd };

// Reactive controller parameter vector (also the search space for the ego
// improver): [kp, kd, forecast_horizon_s, brake_decel, safety_margin,
// accel_limit, corridor_half_width, speed_floor]
std::vector<double> default_reactive_params();

struct EgoPolicy {
    EgoKind kind = EgoKind::replay;
    std::vector<double> params;  // reactive_pd only

    static EgoPolicy replay() { return {EgoKind::replay, {}}; }
    static EgoPolicy idm() { return {EgoKind::idm, {}}; }
    static EgoPolicy reactive(std::vector<double> p = default_reactive_params()) {
        return {EgoKind::reactive_pd, std::move(p)};
    }
};

struct EpisodeResult {
    bool collision = false;
    bool collision_with_adversary = false;
    int collision_step = -1;
    double completion = 0.0;  // fraction of the logged route reached
    int cost_events = 0;      // crashes + off-road steps
    Trajectory ego;           // realized rollout, poses[0] = current state

    // mirrors the horizon of the inputs; same convention as future_of()
};

// Steps the ego by its policy at dt over the future horizon; the adversary
// replays `adversary` when given, else its log; background agents replay
// their logs. A collision ends the episode. Deterministic.
EpisodeResult run_episode(const Scenario& s, const EgoPolicy& ego,
                          const Trajectory* adversary = nullptr);

// Per-scenario adversary source for evaluation/improvement loops; nullopt
// means a benign (logged) episode.
using AdversaryFn =
    std::function<std::optional<Trajectory>(const Scenario& s, const Trajectory& ego_stage1)>;

struct CemConfig {
    int population = 16;
    int elites = 4;
    double init_sigma = 0.25;        // relative to parameter scale
    double sigma_floor = 0.02;
    double collision_penalty = 1.0;  // score = completion - penalty * collision
};

struct ImproveResult {
    std::vector<double> params;
    double incumbent_score = 0.0;
    double final_score = 0.0;
};

// Cross-entropy search over the reactive controller's parameters. The
// incumbent seeds the population each iteration, so the returned candidate
// never scores worse than the incumbent on the evaluation batch.
ImproveResult improve_ego(const std::vector<double>& theta_ego,
                          const std::vector<Scenario>& corpus, const AdversaryFn& adversary_fn,
                          int budget, const CemConfig& cfg, Rng& rng);

}  // namespace advgen
