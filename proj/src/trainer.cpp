#include "advgen/trainer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "advgen/csv.hpp"

namespace advgen {

ScenarioCache build_scenario_cache(const Scenario& s, const PolicyModel& model,
                                   const Trajectory& ego_future, const RewardConfig& rcfg) {
    ScenarioCache cache;
    cache.scenario = &s;
    cache.ctx = context_features(s, model.config().features);
    std::vector<Vec2> goals = goal_grid(s, model.config().grid);
    cache.goal_feats.reserve(goals.size());
    cache.candidates.reserve(goals.size());
    cache.ego_future = ego_future;
    AgentSize adv_size{s.adversary().length, s.adversary().width};
    AgentSize ego_size{s.ego().length, s.ego().width};
    for (Vec2 g : goals) {
        cache.goal_feats.push_back(goal_features(s, g, model.config().features));
        Trajectory traj = model.decode_trajectory(s, g);
        cache.adv_reward.push_back(
            adversarial_reward(traj, ego_future, adv_size, ego_size, rcfg));
        cache.p_real.push_back(realism_penalty(traj, rcfg).total());
        cache.feasible.push_back(feasibility(traj, s, rcfg));
        cache.candidates.push_back(std::move(traj));
    }
    return cache;
}

std::vector<PreferencePair> build_pairs_from_group(const ScenarioCache& cache,
                                                   const std::vector<int>& sampled_goals,
                                                   PreferenceWeights weights,
                                                   const TrainConfig& cfg) {
    // repeated draws of the same goal carry no extra pairwise information
    std::set<int> distinct(sampled_goals.begin(), sampled_goals.end());
    std::vector<int> feas, infeas;
    for (int g : distinct) {
        if (cfg.pairing == PairingMode::unconstrained || cache.feasible[g])
            feas.push_back(g);
        else
            infeas.push_back(g);
    }

    struct Scored {
        int w, l;
        PairRule rule;
        double gap;
    };
    std::vector<Scored> rule1, rule2;

    if (cfg.pairing == PairingMode::single_pair) {
        // best vs worst among feasible candidates, no margin
        if (feas.size() >= 2) {
            int best = feas[0], worst = feas[0];
            for (int g : feas) {
                if (cache.pref(g, weights) > cache.pref(best, weights)) best = g;
                if (cache.pref(g, weights) < cache.pref(worst, weights)) worst = g;
            }
            if (best != worst &&
                cache.pref(best, weights) > cache.pref(worst, weights)) {
                rule2.push_back({best, worst, PairRule::within_feasibility, 0.0});
            }
        }
    } else {
        if (cfg.pairing == PairingMode::grouped) {
            for (int w : feas)
                for (int l : infeas)
                    rule1.push_back({w, l, PairRule::feasibility_first,
                                     cache.pref(w, weights) - cache.pref(l, weights)});
        }
        for (int w : feas) {
            for (int l : feas) {
                if (w == l) continue;
                double gap = cache.pref(w, weights) - cache.pref(l, weights);
                if (gap > cfg.margin)
                    rule2.push_back({w, l, PairRule::within_feasibility, gap});
            }
        }
    }

    auto order = [](const Scored& a, const Scored& b) {
        if (a.gap != b.gap) return a.gap > b.gap;
        if (a.w != b.w) return a.w < b.w;
        return a.l < b.l;
    };
    std::sort(rule1.begin(), rule1.end(), order);
    std::sort(rule2.begin(), rule2.end(), order);

    std::vector<PreferencePair> out;
    for (const auto& s : rule1) {
        if (int(out.size()) >= cfg.max_pairs) break;
        out.push_back({s.w, s.l, s.rule, cache.scenario->id});
    }
    for (const auto& s : rule2) {
        if (int(out.size()) >= cfg.max_pairs) break;
        out.push_back({s.w, s.l, s.rule, cache.scenario->id});
    }
    return out;
}

std::vector<PreferencePair> build_pairs(const PolicyModel& model, const PolicyParams& params,
                                        const Scenario& s, const Trajectory& ego_future,
                                        PreferenceWeights weights, const TrainConfig& cfg,
                                        const RewardConfig& rcfg, Rng& rng) {
    ScenarioCache cache = build_scenario_cache(s, model, ego_future, rcfg);
    std::vector<int> group = model.sample_goals(params, s, cfg.group_size, rng);
    return build_pairs_from_group(cache, group, weights, cfg);
}

LossResult preference_loss(const PolicyModel& model, const PolicyParams& params,
                           const PolicyParams& ref_params,
                           const std::vector<PreferencePair>& pairs,
                           const std::vector<const Scenario*>& scenarios, const TrainConfig& cfg) {
    if (pairs.empty()) throw std::invalid_argument("preference_loss: empty pair list");
    if (params.v.size() != ref_params.v.size())
        throw std::invalid_argument("preference_loss: parameter dimension mismatch");

    std::map<std::string, const Scenario*> by_id;
    for (const Scenario* s : scenarios) by_id[s->id] = s;

    struct Ctx {
        std::vector<double> ctx;
        std::vector<std::vector<double>> feats;
        std::vector<double> logits;
        std::vector<double> ref_logits;
    };
    std::map<std::string, Ctx> ctxs;
    auto get_ctx = [&](const std::string& id) -> Ctx& {
        auto it = ctxs.find(id);
        if (it != ctxs.end()) return it->second;
        auto sit = by_id.find(id);
        if (sit == by_id.end())
            throw std::invalid_argument("preference_loss: unknown scenario id " + id);
        const Scenario& s = *sit->second;
        Ctx c;
        c.ctx = context_features(s, model.config().features);
        for (Vec2 g : goal_grid(s, model.config().grid))
            c.feats.push_back(goal_features(s, g, model.config().features));
        c.logits = model.score_from_features(params, c.ctx, c.feats);
        c.ref_logits = model.score_from_features(ref_params, c.ctx, c.feats);
        return ctxs.emplace(id, std::move(c)).first->second;
    };

    LossResult out;
    out.grad.assign(params.v.size(), 0.0);
    std::vector<double> gw, gl;
    for (const PreferencePair& pair : pairs) {
        Ctx& c = get_ctx(pair.scenario_id);
        // normalizers cancel in the winner-loser difference
        double margin_now = (c.logits[pair.winner_goal] - c.logits[pair.loser_goal]) -
                            (c.ref_logits[pair.winner_goal] - c.ref_logits[pair.loser_goal]);
        double z = cfg.beta * margin_now;
        out.loss += log1p_exp(-z);
        double coeff = -sigmoid(-z) * cfg.beta / double(pairs.size());
        model.logit_grad(params, model.assemble_input(c.ctx, c.feats[pair.winner_goal]), gw);
        model.logit_grad(params, model.assemble_input(c.ctx, c.feats[pair.loser_goal]), gl);
        for (size_t d = 0; d < out.grad.size(); ++d) out.grad[d] += coeff * (gw[d] - gl[d]);
    }
    out.loss /= double(pairs.size());
    return out;
}

namespace {

struct EpochStats {
    double loss_sum = 0.0;
    int loss_count = 0;
    double feasible_sum = 0.0;
    double adv_sum = 0.0;
    double p_real_sum = 0.0;
    int sample_count = 0;
};

}  // namespace

TrainResult train_expert(const PolicyModel& model, const PolicyParams& ref_params,
                         const std::vector<Scenario>& corpus, PreferenceWeights weights,
                         const TrainConfig& cfg, const RewardConfig& rcfg) {
    if (corpus.empty()) throw std::invalid_argument("train_expert: empty corpus");

    std::vector<ScenarioCache> caches;
    caches.reserve(corpus.size());
    std::vector<std::vector<double>> ref_logits(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        caches.push_back(
            build_scenario_cache(corpus[i], model, corpus[i].future_of(corpus[i].ego()), rcfg));
        ref_logits[i] =
            model.score_from_features(ref_params, caches[i].ctx, caches[i].goal_feats);
    }

    TrainResult result;
    result.params = ref_params;
    Adam opt;
    opt.lr = cfg.learning_rate;
    Rng rng(seed_for(cfg.seed, "train-expert"));

    std::vector<double> grad(model.param_count());
    std::vector<double> gw, gl;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochStats stats;
        for (size_t i = 0; i < corpus.size(); ++i) {
            const ScenarioCache& cache = caches[i];
            std::vector<double> logits =
                model.score_from_features(result.params, cache.ctx, cache.goal_feats);
            std::vector<int> group = model.sample_from_logits(logits, cfg.group_size, rng);
            for (int g : group) {
                stats.feasible_sum += cache.feasible[g];
                stats.adv_sum += cache.adv_reward[g];
                stats.p_real_sum += cache.p_real[g];
            }
            stats.sample_count += int(group.size());

            std::vector<PreferencePair> pairs = build_pairs_from_group(cache, group, weights, cfg);
            if (pairs.empty()) continue;

            double loss = 0.0;
            std::fill(grad.begin(), grad.end(), 0.0);
            for (const PreferencePair& pair : pairs) {
                double margin_now =
                    (logits[pair.winner_goal] - logits[pair.loser_goal]) -
                    (ref_logits[i][pair.winner_goal] - ref_logits[i][pair.loser_goal]);
                double z = cfg.beta * margin_now;
                loss += log1p_exp(-z);
                double coeff = -sigmoid(-z) * cfg.beta / double(pairs.size());
                model.logit_grad(result.params,
                                 model.assemble_input(cache.ctx, cache.goal_feats[pair.winner_goal]),
                                 gw);
                model.logit_grad(result.params,
                                 model.assemble_input(cache.ctx, cache.goal_feats[pair.loser_goal]),
                                 gl);
                for (size_t d = 0; d < grad.size(); ++d) grad[d] += coeff * (gw[d] - gl[d]);
            }
            loss /= double(pairs.size());
            stats.loss_sum += loss;
            stats.loss_count += 1;
            opt.step(result.params.v, grad);
        }
        TrainLogRow row;
        row.epoch = epoch;
        row.mean_loss = stats.loss_count ? stats.loss_sum / stats.loss_count : 0.0;
        row.feasibility_rate =
            stats.sample_count ? stats.feasible_sum / stats.sample_count : 0.0;
        row.mean_adv_reward = stats.sample_count ? stats.adv_sum / stats.sample_count : 0.0;
        row.mean_p_real = stats.sample_count ? stats.p_real_sum / stats.sample_count : 0.0;
        result.log.push_back(row);
    }
    return result;
}

ExpertPair train_both_experts(const PolicyModel& model, const PolicyParams& ref_params,
                              const std::vector<Scenario>& corpus, const TrainConfig& cfg,
                              const RewardConfig& rcfg) {
    double w = cfg.expert_weight;
    ExpertPair out;
    TrainResult adv = train_expert(model, ref_params, corpus, {w, 1.0 - w}, cfg, rcfg);
    TrainResult real = train_expert(model, ref_params, corpus, {1.0 - w, w}, cfg, rcfg);
    out.adv = std::move(adv.params);
    out.real = std::move(real.params);
    out.adv_log = std::move(adv.log);
    out.real_log = std::move(real.log);
    return out;
}

void save_train_log(const std::vector<TrainLogRow>& log, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"epoch", "mean_loss", "feasibility_rate", "mean_adv_reward", "mean_p_real"});
    for (const auto& r : log) {
        csv.row({CsvWriter::cell(r.epoch), CsvWriter::cell(r.mean_loss),
                 CsvWriter::cell(r.feasibility_rate), CsvWriter::cell(r.mean_adv_reward),
                 CsvWriter::cell(r.mean_p_real)});
    }
}

}  // namespace advgen
