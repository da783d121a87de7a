#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "advgen/common.hpp"
#include "advgen/scenario.hpp"

namespace advgen {

// Radial goal fan in the adversary's body frame: per speed scaling, a set
// of (bearing, lateral) cells. Distances scale with the current speed so
// the fan covers braking through acceleration.
struct GoalGridConfig {
    std::vector<double> speed_scalings = {0.3, 0.7, 1.0, 1.3};
    struct Direction {
        double bearing = 0.0;  // rad, relative to current heading
        double lateral = 0.0;  // m, left-positive offset added after the fan
    };
    std::vector<Direction> directions = {
        {0.0, 0.0},  {0.15, 0.0}, {-0.15, 0.0}, {0.35, 0.0},
        {-0.35, 0.0}, {0.0, 1.75}, {0.0, -1.75}, {0.55, 0.0},
    };
    double min_distance = 2.0;  // m, keeps goals defined at standstill

    int size() const { return int(speed_scalings.size() * directions.size()); }
};

// Fixed order: speed-major, direction-minor.
std::vector<Vec2> goal_grid(const Scenario& s, const GoalGridConfig& cfg);

struct PolicyConfig {
    FeatureConfig features;
    GoalGridConfig grid;
    int hidden = 32;

    int input_dim() const { return features.input_dim(); }
};

struct PolicyParams {
    std::vector<double> v;  // flat, layout owned by PolicyModel

    bool operator==(const PolicyParams& o) const { return v == o.v; }
};

struct CandidateSet {
    std::vector<Trajectory> trajectories;  // one per goal, independent of params
    std::vector<double> logits;
    std::vector<double> log_probs;
};

// Two-hidden-layer tanh scorer over [context || goal] features plus a
// deterministic spline decoder. The parameter vector is flat so expert
// weights can be interpolated and extrapolated directly.
class PolicyModel {
public:
    explicit PolicyModel(PolicyConfig cfg);

    const PolicyConfig& config() const { return cfg_; }
    int param_count() const { return param_count_; }

    PolicyParams init_params(Rng& rng, double scale = 0.5) const;

    // Cubic-Hermite path from the current pose to the goal with a linear
    // speed ramp fitted to the path length (clamped at zero for stops).
    Trajectory decode_trajectory(const Scenario& s, Vec2 goal_body) const;

    std::vector<double> score_goals(const PolicyParams& p, const Scenario& s) const;
    std::vector<double> score_from_features(const PolicyParams& p, const std::vector<double>& ctx,
                                            const std::vector<std::vector<double>>& goal_feats) const;

    CandidateSet candidates(const PolicyParams& p, const Scenario& s) const;

    // n categorical draws over the goal distribution
    std::vector<int> sample_goals(const PolicyParams& p, const Scenario& s, int n, Rng& rng) const;
    std::vector<int> sample_from_logits(const std::vector<double>& logits, int n, Rng& rng) const;

    double log_prob(const PolicyParams& p, const Scenario& s, int goal_index) const;
    std::pair<double, std::vector<double>> log_prob_with_grad(const PolicyParams& p,
                                                              const Scenario& s,
                                                              int goal_index) const;

    // d(logit_i)/d(params) for one goal input; grad_out is overwritten
    void logit_grad(const PolicyParams& p, const std::vector<double>& input,
                    std::vector<double>& grad_out) const;

    std::vector<double> assemble_input(const std::vector<double>& ctx,
                                       const std::vector<double>& goal_feat) const;

private:
    double forward(const PolicyParams& p, const std::vector<double>& input,
                   std::vector<double>* h1_out, std::vector<double>* h2_out) const;

    PolicyConfig cfg_;
    int param_count_ = 0;
    // parameter layout offsets
    int w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0, w3_ = 0, b3_ = 0;
};

std::vector<int> topk_indices(const std::vector<double>& scores, int k);

struct PretrainConfig {
    int epochs = 150;
    double learning_rate = 1e-3;
    double init_scale = 0.5;
};

struct PretrainResult {
    PolicyParams params;
    std::vector<double> epoch_loss;     // mean -log p(target)
    double final_mean_log_likelihood = 0.0;
    double top1_accuracy = 0.0;
};

// Imitation over the synthetic logs: target is the goal nearest the logged
// adversary endpoint.
PretrainResult pretrain_imitation(const PolicyModel& model, const std::vector<Scenario>& corpus,
                                  const PretrainConfig& cfg, Rng& rng);

void save_checkpoint(const PolicyModel& model, const PolicyParams& params, const std::string& path);
// Refuses checkpoints whose recorded shapes/grid/features differ from `model`.
PolicyParams load_checkpoint(const PolicyModel& model, const std::string& path);

struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<double> m, v;
    long t = 0;

    void step(std::vector<double>& params, const std::vector<double>& grad);
};

}  // namespace advgen
