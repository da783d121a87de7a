#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "advgen/common.hpp"
#include "advgen/corpus.hpp"
#include "advgen/policy.hpp"
#include "advgen/rewards.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace advgen;

namespace {
PolicyModel make_model() { return PolicyModel(PolicyConfig{}); }
}  // namespace

TEST_CASE("goal grid is deterministic with fixed size and ordering") {
    Scenario s = fixtures::straight_scenario();
    GoalGridConfig gc;
    auto a = goal_grid(s, gc);
    auto b = goal_grid(s, gc);
    REQUIRE(int(a.size()) == gc.size());
    CHECK(gc.size() == 32);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
    }
}

TEST_CASE("score_goals basics") {
    PolicyModel model = make_model();
    Scenario s = fixtures::straight_scenario();

    SUBCASE("all-zero parameters give uniform logits") {
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        auto logits = model.score_goals(zero, s);
        for (double l : logits) CHECK(l == doctest::Approx(logits[0]));
    }
    SUBCASE("adding a constant to the final bias shifts all logits equally") {
        Rng rng(3);
        PolicyParams p = model.init_params(rng);
        auto before = model.score_goals(p, s);
        PolicyParams shifted = p;
        shifted.v.back() += 2.5;  // final bias is the last parameter
        auto after = model.score_goals(shifted, s);
        for (size_t i = 0; i < before.size(); ++i)
            CHECK(after[i] - before[i] == doctest::Approx(2.5).epsilon(1e-12));

        CandidateSet c1 = model.candidates(p, s);
        CandidateSet c2 = model.candidates(shifted, s);
        for (size_t i = 0; i < c1.log_probs.size(); ++i)
            CHECK(c1.log_probs[i] == doctest::Approx(c2.log_probs[i]).epsilon(1e-9));
    }
    SUBCASE("policy evaluation is invariant under rigid transforms") {
        Rng rng(4);
        PolicyParams p = model.init_params(rng);
        auto base = model.score_goals(p, s);
        Scenario moved = fixtures::transform_scenario(s, 1.2, {-40.0, 9.0});
        auto rotated = model.score_goals(p, moved);
        for (size_t i = 0; i < base.size(); ++i)
            CHECK(rotated[i] == doctest::Approx(base[i]).epsilon(1e-9));
    }
    SUBCASE("wrong parameter dimension throws") {
        PolicyParams bad;
        bad.v.assign(model.param_count() - 1, 0.0);
        CHECK_THROWS_AS(model.score_goals(bad, s), std::invalid_argument);
    }
}

TEST_CASE("candidate set normalization") {
    PolicyModel model = make_model();
    Scenario s = fixtures::straight_scenario();
    Rng rng(9);
    for (int i = 0; i < 5; ++i) {
        PolicyParams p = model.init_params(rng, 1.0);
        CandidateSet set = model.candidates(p, s);
        CHECK(std::fabs(logsumexp(set.log_probs)) < 1e-9);
        double prob_sum = 0.0;
        for (double lp : set.log_probs) prob_sum += std::exp(lp);
        CHECK(prob_sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("decode_trajectory properties") {
    PolicyModel model = make_model();
    Scenario s = fixtures::straight_scenario();
    const AgentRecord& adv = s.adversary();
    Pose2 start = adv.logged.poses[s.current_index()];
    double v0 = adv.logged.speeds[s.current_index()];
    RewardConfig rcfg;

    SUBCASE("starts exactly at the current pose and is deterministic") {
        Vec2 goal{35.0, 3.0};
        Trajectory a = model.decode_trajectory(s, goal);
        Trajectory b = model.decode_trajectory(s, goal);
        CHECK(a.poses[0].x == start.x);
        CHECK(a.poses[0].y == start.y);
        CHECK(a.poses[0].heading == start.heading);
        REQUIRE(a.poses.size() == size_t(s.future_steps + 1));
        for (size_t i = 0; i < a.poses.size(); ++i) {
            CHECK(a.poses[i].x == b.poses[i].x);
            CHECK(a.poses[i].y == b.poses[i].y);
        }
    }
    SUBCASE("straight goal at cruise distance keeps speed nearly constant") {
        double horizon = double(s.future_steps) * s.dt;
        Trajectory t = model.decode_trajectory(s, {v0 * horizon, 0.0});
        Trajectory baseline = fixtures::straight_trajectory(start, v0, s.future_steps, s.dt);
        double p_kin = realism_penalty(t, rcfg).kin;
        double p_base = realism_penalty(baseline, rcfg).kin;
        CHECK(p_kin <= p_base + 1e-6);
        for (double sp : t.speeds) CHECK(sp == doctest::Approx(v0).epsilon(1e-3));
    }
    SUBCASE("goal at the current position stops the vehicle") {
        Trajectory t = model.decode_trajectory(s, {0.0, 0.0});
        CHECK(t.speeds.back() == doctest::Approx(0.0).epsilon(1e-6));
        Vec2 last = t.poses.back().position();
        CHECK((last - start.position()).norm() < 1e-6);
    }
}

TEST_CASE("sampling statistics") {
    PolicyModel model = make_model();
    Scenario s = fixtures::straight_scenario();
    int m = model.config().grid.size();

    SUBCASE("uniform logits: frequencies within 3 sigma of 1/M") {
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        Rng rng(1001);
        int n = 100000;
        std::vector<int> counts(m, 0);
        for (int idx : model.sample_goals(zero, s, n, rng)) counts[idx]++;
        double p = 1.0 / double(m);
        double sigma = std::sqrt(double(n) * p * (1.0 - p));
        double chi2 = 0.0;
        for (int c : counts) {
            CHECK(std::fabs(double(c) - double(n) * p) <= 3.0 * sigma);
            double diff = double(c) - double(n) * p;
            chi2 += diff * diff / (double(n) * p);
        }
        // chi-square with 31 dof: 0.01 critical value is 52.19
        CHECK(chi2 < 52.19);
    }
    SUBCASE("a +50 logit saturates sampling") {
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        auto logits = model.score_goals(zero, s);
        logits[5] += 50.0;
        Rng rng(7);
        auto draws = model.sample_from_logits(logits, 20000, rng);
        int hits = 0;
        for (int d : draws) hits += (d == 5);
        CHECK(double(hits) / 20000.0 >= 0.9999);
    }
    SUBCASE("same seed gives the identical sequence") {
        Rng a(42), b(42);
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        CHECK(model.sample_goals(zero, s, 500, a) == model.sample_goals(zero, s, 500, b));
    }
    SUBCASE("n < 1 throws") {
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        Rng rng(1);
        CHECK_THROWS_AS(model.sample_goals(zero, s, 0, rng), std::invalid_argument);
    }
}

TEST_CASE("log_prob and its gradient") {
    PolicyModel model = make_model();
    Scenario s = fixtures::straight_scenario();
    int m = model.config().grid.size();

    SUBCASE("uniform logits give log(1/M)") {
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        CHECK(model.log_prob(zero, s, 0) == doctest::Approx(std::log(1.0 / 32.0)).epsilon(1e-12));
    }
    SUBCASE("probabilities normalize") {
        Rng rng(12);
        PolicyParams p = model.init_params(rng);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += std::exp(model.log_prob(p, s, i));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("index out of range throws") {
        PolicyParams zero;
        zero.v.assign(model.param_count(), 0.0);
        CHECK_THROWS_AS(model.log_prob(zero, s, m), std::invalid_argument);
        CHECK_THROWS_AS(model.log_prob(zero, s, -1), std::invalid_argument);
    }
    SUBCASE("analytic gradient matches central differences") {
        Rng rng(77);
        double worst = 0.0;
        for (int trial = 0; trial < 12; ++trial) {
            PolicyParams p = model.init_params(rng, 1.0);
            int goal = int(rng.below(uint64_t(m)));
            auto [lp, grad] = model.log_prob_with_grad(p, s, goal);
            CHECK(lp == doctest::Approx(model.log_prob(p, s, goal)).epsilon(1e-12));
            for (int probe = 0; probe < 12; ++probe) {
                size_t d = rng.below(p.v.size());
                double h = 1e-5;
                PolicyParams pp = p, pm = p;
                pp.v[d] += h;
                pm.v[d] -= h;
                double fd = (model.log_prob(pp, s, goal) - model.log_prob(pm, s, goal)) / (2 * h);
                double denom = std::max(std::fabs(fd), 1e-6);
                worst = std::max(worst, std::fabs(grad[d] - fd) / denom);
            }
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("imitation pretraining") {
    PolicyModel model = make_model();
    std::vector<Scenario> corpus = generate_corpus(2024, 24, {});
    PretrainConfig cfg;
    cfg.epochs = 60;

    Rng rng(55);
    PretrainResult r = pretrain_imitation(model, corpus, cfg, rng);
    CHECK(r.final_mean_log_likelihood > std::log(1.0 / 32.0));
    CHECK(r.epoch_loss.front() > r.epoch_loss.back());
    CHECK(r.top1_accuracy >= 0.6);

    SUBCASE("bit-identical across same-seed runs") {
        Rng rng2(55);
        PretrainResult r2 = pretrain_imitation(model, corpus, cfg, rng2);
        CHECK(r.params.v == r2.params.v);
    }
    SUBCASE("empty corpus throws") {
        Rng rng3(1);
        CHECK_THROWS_AS(pretrain_imitation(model, {}, cfg, rng3), std::invalid_argument);
    }
}

TEST_CASE("checkpoint round-trip and metadata checks") {
    PolicyModel model = make_model();
    Rng rng(8);
    PolicyParams p = model.init_params(rng);
    std::string path =
        (std::filesystem::temp_directory_path() / "policy_ckpt_test.json").string();
    save_checkpoint(model, p, path);
    PolicyParams back = load_checkpoint(model, path);
    CHECK(back.v == p.v);  // bit exact

    PolicyConfig other_cfg;
    other_cfg.hidden = 16;
    PolicyModel other(other_cfg);
    CHECK_THROWS_WITH_AS(load_checkpoint(other, path), doctest::Contains("metadata mismatch"),
                         std::runtime_error);
    std::remove(path.c_str());
}
