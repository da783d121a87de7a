#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advgen/policy.hpp"
#include "advgen/rewards.hpp"

namespace advgen {

enum class PairRule { feasibility_first, within_feasibility };

struct PreferencePair {
    int winner_goal = 0;
    int loser_goal = 0;
    PairRule rule = PairRule::within_feasibility;
    std::string scenario_id;
};

// How preference pairs are formed from a sampled group.
//   grouped:       feasible-vs-infeasible pairs first, then feasible pairs
//                  ordered by reward gap (the full scheme)
//   single_pair:   one best-vs-worst pair among feasible candidates
//   unconstrained: reward-gap pairs over the whole group, feasibility ignored
//                  (ablation)
enum class PairingMode { grouped, single_pair, unconstrained };

struct TrainConfig {
    int group_size = 32;         // candidates sampled per scenario
    int max_pairs = 8;           // cap per scenario
    double margin = 0.2;         // reward-gap margin for feasible pairs
    double beta = 0.05;          // preference-loss temperature
    int epochs = 200;
    double learning_rate = 1e-5;
    double expert_weight = 0.9;  // opposing-expert mixing weight, in (0.5, 1]
    uint64_t seed = 0;
    PairingMode pairing = PairingMode::grouped;
};

// Per-scenario precomputation: candidates and their rewards never depend on
// the policy parameters, so training touches only logits.
struct ScenarioCache {
    const Scenario* scenario = nullptr;
    std::vector<double> ctx;
    std::vector<std::vector<double>> goal_feats;
    std::vector<Trajectory> candidates;
    Trajectory ego_future;
    std::vector<double> adv_reward;
    std::vector<double> p_real;
    std::vector<int> feasible;

    double pref(int goal, PreferenceWeights w) const {
        return w.adv * adv_reward[goal] - w.real * p_real[goal];
    }
};

ScenarioCache build_scenario_cache(const Scenario& s, const PolicyModel& model,
                                   const Trajectory& ego_future, const RewardConfig& rcfg);

// Pair construction over the distinct goals present in a sampled group.
// Ordering is deterministic: feasibility pairs first, then feasible pairs,
// each block sorted by descending reward gap with (winner, loser) index
// tie-breaks, truncated to max_pairs.
std::vector<PreferencePair> build_pairs_from_group(const ScenarioCache& cache,
                                                   const std::vector<int>& sampled_goals,
                                                   PreferenceWeights weights,
                                                   const TrainConfig& cfg);

// Samples a group from the policy and builds pairs; deterministic in rng.
std::vector<PreferencePair> build_pairs(const PolicyModel& model, const PolicyParams& params,
                                        const Scenario& s, const Trajectory& ego_future,
                                        PreferenceWeights weights, const TrainConfig& cfg,
                                        const RewardConfig& rcfg, Rng& rng);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad;
};

// Pairwise logistic preference loss with reference-policy regularization:
// mean over pairs of -log sigmoid(beta * (log-ratio(winner) - log-ratio(loser))).
// At params == ref_params the loss is exactly log(2).
LossResult preference_loss(const PolicyModel& model, const PolicyParams& params,
                           const PolicyParams& ref_params,
                           const std::vector<PreferencePair>& pairs,
                           const std::vector<const Scenario*>& scenarios, const TrainConfig& cfg);

struct TrainLogRow {
    int epoch = 0;
    double mean_loss = 0.0;
    double feasibility_rate = 0.0;  // of sampled groups
    double mean_adv_reward = 0.0;   // of sampled candidates
    double mean_p_real = 0.0;
};

struct TrainResult {
    PolicyParams params;
    std::vector<TrainLogRow> log;
};

// Fine-tunes from ref_params against the logged ego rollouts, re-sampling
// groups from the latest policy each epoch.
TrainResult train_expert(const PolicyModel& model, const PolicyParams& ref_params,
                         const std::vector<Scenario>& corpus, PreferenceWeights weights,
                         const TrainConfig& cfg, const RewardConfig& rcfg);

struct ExpertPair {
    PolicyParams adv;
    PolicyParams real;
    std::vector<TrainLogRow> adv_log;
    std::vector<TrainLogRow> real_log;
};

// Both experts share the reference initialization and opposing weights
// (w*, 1-w*) / (1-w*, w*).
ExpertPair train_both_experts(const PolicyModel& model, const PolicyParams& ref_params,
                              const std::vector<Scenario>& corpus, const TrainConfig& cfg,
                              const RewardConfig& rcfg);

void save_train_log(const std::vector<TrainLogRow>& log, const std::string& path);

}  // namespace advgen
