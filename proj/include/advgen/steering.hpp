#pragma once

#include <functional>
#include <string>
#include <vector>

#include "advgen/metrics.hpp"
#include "advgen/policy.hpp"

namespace advgen {

// Parameter-space direction learned by one expert: delta = expert - ref.
struct PreferenceVector {
    std::vector<double> delta;
    std::string label;  // "adv" or "real"
};

PreferenceVector preference_vector(const PolicyParams& expert, const PolicyParams& ref,
                                   const std::string& label);

enum class MixMode { weight_interp, weight_extrap, traj_mix, logit_mix };

std::string mix_mode_name(MixMode m);
MixMode mix_mode_from_name(const std::string& name);

struct MixSpec {
    MixMode mode = MixMode::weight_interp;
    double lam = 0.5;       // interpolation coefficient
    double phi_adv = 0.0;   // extrapolation coefficients
    double phi_real = 0.0;
    std::string base = "ref";  // ref | real | adv | interp (uses lam)
};

struct ExpertSet {
    PolicyParams ref;
    PolicyParams adv;
    PolicyParams real;
};

// theta(lam) = (1-lam) * theta_real + lam * theta_adv; lam must be in [0,1]
PolicyParams interpolate(const PolicyParams& theta_real, const PolicyParams& theta_adv,
                         double lam);

// theta_base + sum_i phi_i * delta_i
PolicyParams extrapolate(const PolicyParams& theta_base,
                         const std::vector<std::pair<PreferenceVector, double>>& vectors);

// The mixed parameter vector a MixSpec describes (weight modes only).
PolicyParams resolve_mixed_params(const MixSpec& spec, const ExpertSet& experts);

// Builds the mixed model, decodes its top-k goals and returns the candidate
// maximizing the user reward R_mu. traj_mix / logit_mix dispatch to the
// output-space baselines.
Trajectory generate_steered(const MixSpec& spec, const ExpertSet& experts,
                            const PolicyModel& model, const Scenario& s, const Trajectory& ego,
                            double mu, int k_candidates, const RewardConfig& cfg);

// Output-space baselines.
Trajectory mix_trajectories(const ExpertSet& experts, const PolicyModel& model, const Scenario& s,
                            double lam);
Trajectory mix_logits_decode(const ExpertSet& experts, const PolicyModel& model,
                             const Scenario& s, double lam);

struct SweepCell {
    std::string mode;
    double lam = 0.0;
    EvalReport report;
};

struct SweepReport {
    std::vector<SweepCell> cells;  // emitted in (mode, lambda) grid order
};

struct SweepConfig {
    std::vector<double> lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<MixMode> modes = {MixMode::weight_interp, MixMode::traj_mix, MixMode::logit_mix};
    int k_candidates = 8;
    std::function<double(double)> mu_from_lambda;  // default: identity
    int workers = 1;
};

SweepReport pareto_sweep(const ExpertSet& experts, const PolicyModel& model,
                         const std::vector<Scenario>& corpus, const EgoPolicy& ego,
                         const SweepConfig& cfg, const RewardConfig& rcfg);

void save_sweep_csv(const SweepReport& rep, const std::string& path);

struct LandscapeReport {
    struct Row1d {
        double lam, measured, chord;
    };
    std::vector<Row1d> rows_1d;
    struct Row2d {
        double a, b, reward;  // theta = ref + a*delta_real + b*delta_adv
    };
    std::vector<Row2d> rows_2d;
    struct PcaPoint {
        std::string label;
        double x, y;
    };
    std::vector<PcaPoint> pca;
    double delta_adv_norm = 0.0;
    double delta_real_norm = 0.0;
    double cosine = 0.0;
    double angle_deg = 0.0;
    bool degenerate_plane = false;
};

struct LandscapeConfig {
    std::vector<double> lambdas = {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
    int plane_resolution = 7;  // per axis over [-0.25, 1.25]; 0 skips the plane
    double plane_lo = -0.25;
    double plane_hi = 1.25;
    int workers = 1;
};

// Mean preference reward (equal weights) of each model's top-1 candidate
// across the corpus, along the expert segment and over the (ref, real, adv)
// plane, plus flat-weight diagnostics (norms, cosine, PCA projection).
LandscapeReport lmc_scan(const ExpertSet& experts, const PolicyModel& model,
                         const std::vector<Scenario>& corpus, const LandscapeConfig& cfg,
                         const RewardConfig& rcfg);

void save_landscape_csv(const LandscapeReport& rep, const std::string& path_prefix);

}  // namespace advgen
