#include "advgen/closed_loop.hpp"

#include <algorithm>
#include <stdexcept>

#include "advgen/csv.hpp"

namespace advgen {

namespace {

double ramp(int t, int t_ramp) {
    if (t_ramp <= 0) return 1.0;
    double f = double(t) / double(t_ramp);
    return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

}  // namespace

double schedule_lambda(int t, const CurriculumSchedule& sched) {
    return sched.lambda_start + (sched.lambda_end - sched.lambda_start) * ramp(t, sched.t_ramp);
}

double schedule_padv(int t, const CurriculumSchedule& sched) {
    return sched.p_start + (sched.p_end - sched.p_start) * ramp(t, sched.t_ramp);
}

namespace {

struct HeldoutSet {
    std::vector<Trajectory> adversaries;  // fixed full-intensity challenges
};

EvalSnapshot evaluate_ego(const EgoPolicy& ego, const std::vector<Scenario>& heldout,
                          const HeldoutSet& set) {
    EvalSnapshot snap;
    if (heldout.empty()) return snap;
    for (size_t i = 0; i < heldout.size(); ++i) {
        EpisodeResult adv_ep = run_episode(heldout[i], ego, &set.adversaries[i]);
        snap.adv_collision_rate += adv_ep.collision ? 1.0 : 0.0;
        snap.adv_completion += adv_ep.completion;
        EpisodeResult ben_ep = run_episode(heldout[i], ego, nullptr);
        snap.benign_collision_rate += ben_ep.collision ? 1.0 : 0.0;
        snap.benign_completion += ben_ep.completion;
    }
    double n = double(heldout.size());
    snap.adv_collision_rate /= n;
    snap.adv_completion /= n;
    snap.benign_collision_rate /= n;
    snap.benign_completion /= n;
    return snap;
}

}  // namespace

ClosedLoopResult run_closed_loop(const PolicyModel& model, const ExpertSet& experts,
                                 const EgoPolicy& ego0, const std::vector<Scenario>& train,
                                 const std::vector<Scenario>& heldout,
                                 const ClosedLoopConfig& cfg, const RewardConfig& rcfg) {
    if (train.empty()) throw std::invalid_argument("run_closed_loop: empty training set");
    if (cfg.sched.t_ramp > cfg.sched.t_total)
        throw std::invalid_argument("run_closed_loop: t_ramp exceeds t_total");

    ClosedLoopResult result;
    EgoPolicy ego = ego0;
    if (ego.kind == EgoKind::reactive_pd && ego.params.empty())
        ego.params = default_reactive_params();

    // fixed held-out challenge set at full intensity, targets the logs
    HeldoutSet held;
    for (const Scenario& s : heldout) {
        MixSpec spec;
        spec.mode = MixMode::weight_interp;
        spec.lam = 1.0;
        held.adversaries.push_back(generate_steered(spec, experts, model, s, s.future_of(s.ego()),
                                                    1.0, cfg.k_candidates, rcfg));
    }
    result.initial = evaluate_ego(ego, heldout, held);

    Rng rng(seed_for(cfg.seed, "closed-loop"));
    for (int t = 0; t < cfg.sched.t_total; ++t) {
        double lam = schedule_lambda(t, cfg.sched);
        double p_adv = schedule_padv(t, cfg.sched);
        double mu = cfg.mu_start + (cfg.mu_end - cfg.mu_start) * ramp(t, cfg.sched.t_ramp);
        const Scenario& s = train[size_t(t) % train.size()];

        IterationRow row;
        row.iteration = t;
        row.lam = lam;
        row.p_adv = p_adv;

        bool adversarial = rng.uniform() < p_adv;
        EpisodeResult ep;
        if (adversarial) {
            EpisodeResult stage1 = run_episode(s, ego, nullptr);
            MixSpec spec;
            spec.mode = MixMode::weight_interp;
            spec.lam = lam;
            Trajectory adv = generate_steered(spec, experts, model, s, stage1.ego, mu,
                                              cfg.k_candidates, rcfg);
            result.generator_calls += 1;
            ep = run_episode(s, ego, &adv);
            row.adversarial = 1;
        } else {
            ep = run_episode(s, ego, nullptr);
        }
        row.collision = ep.collision ? 1 : 0;
        row.completion = ep.completion;
        result.history.push_back(row);

        bool improve_now = ego.kind == EgoKind::reactive_pd && cfg.improve_every > 0 &&
                           (t + 1) % cfg.improve_every == 0 && cfg.improve_budget > 0;
        if (improve_now) {
            // rotating batch of training scenarios with the current-schedule
            // adversary mix
            std::vector<Scenario> batch;
            for (int k = 0; k < cfg.improve_batch; ++k)
                batch.push_back(train[size_t(t + k) % train.size()]);
            uint64_t gate_seed = seed_for(cfg.seed, "closed-loop-improve", uint64_t(t));
            AdversaryFn adv_fn = [&, lam, mu, p_adv, gate_seed](
                                     const Scenario& sc,
                                     const Trajectory& ego_stage1) -> std::optional<Trajectory> {
                Rng gate(seed_for(gate_seed, sc.id));
                if (gate.uniform() >= p_adv) return std::nullopt;
                MixSpec spec;
                spec.mode = MixMode::weight_interp;
                spec.lam = lam;
                result.generator_calls += 1;
                return generate_steered(spec, experts, model, sc, ego_stage1, mu,
                                        cfg.k_candidates, rcfg);
            };
            Rng improve_rng(seed_for(cfg.seed, "closed-loop-cem", uint64_t(t)));
            ImproveResult improved =
                improve_ego(ego.params, batch, adv_fn, cfg.improve_budget, cfg.cem, improve_rng);
            ego.params = improved.params;
        }
    }

    result.final_state = evaluate_ego(ego, heldout, held);
    result.ego_params = ego.params;
    return result;
}

void save_closed_loop_csv(const ClosedLoopResult& r, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"iteration", "lambda", "p_adv", "adversarial", "collision", "completion"});
    for (const auto& row : r.history) {
        csv.row({CsvWriter::cell(row.iteration), CsvWriter::cell(row.lam),
                 CsvWriter::cell(row.p_adv), CsvWriter::cell(row.adversarial),
                 CsvWriter::cell(row.collision), CsvWriter::cell(row.completion)});
    }
}

}  // namespace advgen
