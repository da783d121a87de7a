#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advgen/simulate.hpp"
#include "advgen/steering.hpp"

namespace advgen {

struct CurriculumSchedule {
    double lambda_start = 0.1;
    double lambda_end = 1.0;
    double p_start = 0.1;
    double p_end = 0.9;
    int t_total = 200;
    int t_ramp = 100;  // reaches the end value here; defaults to t_total/2
};

// Piecewise-linear ramp, clamped at the end value.
double schedule_lambda(int t, const CurriculumSchedule& sched);
double schedule_padv(int t, const CurriculumSchedule& sched);

struct ClosedLoopConfig {
    CurriculumSchedule sched;
    int improve_every = 25;   // ego improvement cadence, iterations
    int improve_budget = 2;   // CEM iterations per improvement
    int improve_batch = 8;    // scenarios per improvement batch
    CemConfig cem;
    int k_candidates = 8;
    double mu_start = 0.5;    // candidate-ranking weight anneal
    double mu_end = 1.0;
    uint64_t seed = 0;
    int workers = 1;
};

struct IterationRow {
    int iteration = 0;
    double lam = 0.0;
    double p_adv = 0.0;
    int adversarial = 0;
    int collision = 0;
    double completion = 0.0;
};

struct EvalSnapshot {
    double adv_collision_rate = 0.0;
    double adv_completion = 0.0;
    double benign_collision_rate = 0.0;
    double benign_completion = 0.0;
};

struct ClosedLoopResult {
    std::vector<IterationRow> history;
    EvalSnapshot initial;
    EvalSnapshot final_state;
    std::vector<double> ego_params;
    long generator_calls = 0;
};

// Curriculum training loop: per episode the schedules set the mixing
// coefficient and the adversarial-encounter probability; adversaries are
// generated against the current ego's rollout; the ego is periodically
// improved. Held-out evaluation uses a fixed full-intensity challenge set
// generated once against the logged ego.
ClosedLoopResult run_closed_loop(const PolicyModel& model, const ExpertSet& experts,
                                 const EgoPolicy& ego0, const std::vector<Scenario>& train,
                                 const std::vector<Scenario>& heldout,
                                 const ClosedLoopConfig& cfg, const RewardConfig& rcfg);

void save_closed_loop_csv(const ClosedLoopResult& r, const std::string& path);

}  // namespace advgen
