#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advgen/rewards.hpp"
#include "advgen/scenario.hpp"
#include "advgen/simulate.hpp"

namespace advgen {

// 1-Wasserstein distance between empirical distributions via the quantile
// integral; for equal sizes this is the mean absolute difference of the
// sorted samples.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

struct EvalReport {
    double attack_success_rate = 0.0;
    double mean_adv_reward = 0.0;
    double mean_p_beh = 0.0;
    double mean_p_kin = 0.0;
    double crash_obj_rate = 0.0;
    double cross_line_rate = 0.0;
    double map_feasible_rate = 0.0;
    double wd_accel = 0.0;
    double wd_vel = 0.0;
    double wd_yaw = 0.0;
    int n_scenarios = 0;
    int n_skipped = 0;
};

using GeneratorFn =
    std::function<Trajectory(const Scenario& s, const Trajectory& ego_stage1)>;

struct PerScenarioRow {
    std::string scenario_id;
    RewardBreakdown breakdown;
    int attack_success = 0;
    int crash_obj = 0;
    int cross_line = 0;
};

// Two-stage open-loop protocol: record the ego rollout on the unmodified
// scenario, then re-simulate against the generated adversary. Adversarial
// reward is scored against the re-simulated ego. A generator failure skips
// the scenario and is counted.
EvalReport evaluate_generator(const GeneratorFn& generator, const std::vector<Scenario>& corpus,
                              const EgoPolicy& ego, const RewardConfig& cfg, int workers,
                              std::vector<PerScenarioRow>* rows = nullptr);

void save_eval_report_csv(const EvalReport& r, const std::string& path);
void save_eval_rows_csv(const std::vector<PerScenarioRow>& rows, const std::string& path);
// Text table in the usual benchmark column layout.
std::string eval_report_table(const std::string& label, const EvalReport& r);

}  // namespace advgen
