#include <doctest.h>

#include <cmath>

#include "advgen/common.hpp"
#include "advgen/corpus.hpp"
#include "advgen/rewards.hpp"
#include "helpers.hpp"

using namespace advgen;
using fixtures::straight_scenario;
using fixtures::straight_trajectory;

// high-precision references computed in extended precision
static long double softplus_ref(long double x, long double thresh) {
    long double z = std::fabs((double)x) - thresh;
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

TEST_CASE("softplus_penalty") {
    CHECK(softplus_penalty(7.0, 7.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(softplus_penalty(0.0, 7.0) ==
          doctest::Approx(double(softplus_ref(0.0L, 7.0L))).epsilon(1e-12));
    CHECK(softplus_penalty(0.0, 7.0) == doctest::Approx(0.00091146645377424469).epsilon(1e-10));
    CHECK(softplus_penalty(1007.0, 7.0) == doctest::Approx(1000.0).epsilon(1e-9));
    CHECK(softplus_penalty(-7.0, 7.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // monotone in |x|
    double prev = softplus_penalty(0.0, 3.0);
    for (double x = 0.25; x < 10.0; x += 0.25) {
        double cur = softplus_penalty(x, 3.0);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("adversarial_reward") {
    RewardConfig cfg;
    AgentSize size{4.8, 2.0};

    SUBCASE("collision timing formula") {
        // head-on approach: adversary at x=0 moving +x, ego at x=48.4 moving -x
        // at 5 m/s each; they meet near the middle
        Trajectory adv = straight_trajectory({0, 0, 0}, 5.0, 90);
        Trajectory ego = straight_trajectory({48.4, 0, M_PI}, 5.0, 90);
        int t_coll = first_collision_step(adv, ego, size, size);
        REQUIRE(t_coll == 44);  // gap 43.6 m closes at 1 m per step, boxes span 4.8
        double expected = cfg.c_coll * (1.0 - 44.0 / 90.0);
        CHECK(adversarial_reward(adv, ego, size, size, cfg) == doctest::Approx(expected));
    }
    SUBCASE("t_coll = 45 of T = 90 pays half the collision constant") {
        // adversary starts exactly on the collision boundary at step 45:
        // construct by teleporting the adversary onto the ego path at t=45
        Trajectory ego = straight_trajectory({0, 0, 0}, 0.0, 90);
        Trajectory adv = straight_trajectory({0, 100, 0}, 0.0, 90);
        for (size_t t = 45; t < adv.poses.size(); ++t) adv.poses[t] = ego.poses[t];
        CHECK(first_collision_step(adv, ego, size, size) == 45);
        CHECK(adversarial_reward(adv, ego, size, size, cfg) == doctest::Approx(5.0));
    }
    SUBCASE("proximity branch") {
        // parallel lanes far apart: no collision, d_min = 5
        Trajectory adv = straight_trajectory({0, 0, 0}, 10.0, 80);
        Trajectory ego = straight_trajectory({0, 5.0, 0}, 10.0, 80);
        CHECK(adversarial_reward(adv, ego, size, {1.0, 1.0}, cfg) ==
              doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        // d_min -> 0 boundary: point-like separated boxes, reward -> c_prox
        Trajectory ego2 = straight_trajectory({0, 1e-9, 0}, 10.0, 80);
        AgentSize point{1e-12, 1e-12};
        double r = adversarial_reward(adv, ego2, point, point, cfg);
        CHECK(r == doctest::Approx(cfg.c_prox).epsilon(1e-9));
    }
    SUBCASE("decreasing in collision step and in distance") {
        RewardConfig c;
        for (int t1 = 10; t1 < 80; t1 += 10) {
            double r1 = c.c_coll * (1.0 - double(t1) / 80.0);
            double r2 = c.c_coll * (1.0 - double(t1 + 5) / 80.0);
            CHECK(r1 > r2);
        }
        double prev = 1e9;
        for (double d = 0.0; d < 30.0; d += 1.5) {
            double r = c.c_prox * std::exp(-c.lambda_prox * d);
            CHECK(r < prev);
            prev = r;
        }
    }
    SUBCASE("length mismatch throws") {
        Trajectory adv = straight_trajectory({0, 0, 0}, 5.0, 80);
        Trajectory ego = straight_trajectory({0, 0, 0}, 5.0, 60);
        CHECK_THROWS_AS(adversarial_reward(adv, ego, size, size, cfg), std::invalid_argument);
    }
}

TEST_CASE("realism_penalty") {
    RewardConfig cfg;

    SUBCASE("straight constant-speed baseline") {
        Trajectory t = straight_trajectory({0, 0, 0}, 10.0, 80);
        RealismPenalty p = realism_penalty(t, cfg);
        double expect_kin = cfg.w_a * (softplus_penalty(0, cfg.a_max) +
                                       softplus_penalty(0, cfg.a_lat_max)) +
                            cfg.w_omega * softplus_penalty(0, cfg.omega_max);
        double expect_beh = cfg.w_turn * softplus_penalty(0, cfg.dpsi_max);
        CHECK(p.kin == doctest::Approx(expect_kin).epsilon(1e-9));
        CHECK(p.beh == doctest::Approx(expect_beh).epsilon(1e-9));
    }
    SUBCASE("one hard-acceleration step is averaged into the penalty") {
        // speed doubles from 10 to 11.4 over one step: a_long = 14 m/s^2
        Trajectory t;
        t.dt = 0.1;
        double x = 0.0, v = 10.0;
        for (int i = 0; i <= 40; ++i) {
            t.poses.push_back({x, 0, 0});
            t.speeds.push_back(v);
            if (i == 20) v += 1.4;  // jump
            x += v * t.dt;
        }
        RealismPenalty base = realism_penalty(straight_trajectory({0, 0, 0}, 10.0, 40), cfg);
        RealismPenalty p = realism_penalty(t, cfg);
        int steps = int(t.poses.size()) - 2;
        // exactly one acceleration entry becomes 14 m/s^2
        double delta =
            cfg.w_a * (softplus_penalty(14.0, cfg.a_max) - softplus_penalty(0.0, cfg.a_max)) /
            double(steps);
        CHECK(p.kin - base.kin == doctest::Approx(delta).epsilon(1e-6));
        CHECK(softplus_penalty(14.0, 7.0) == doctest::Approx(7.0009114664537742).epsilon(1e-12));
    }
    SUBCASE("in-place spin dominates the behavioral penalty") {
        Trajectory spin;
        spin.dt = 0.1;
        double h = 0.0;
        for (int i = 0; i <= 40; ++i) {
            spin.poses.push_back({0, 0, h});
            spin.speeds.push_back(0.0);
            h += 0.3;  // 3 rad/s while stationary
        }
        RealismPenalty straight = realism_penalty(straight_trajectory({0, 0, 0}, 10.0, 40), cfg);
        RealismPenalty p = realism_penalty(spin, cfg);
        CHECK(p.beh > 10.0 * straight.beh);
    }
    SUBCASE("invariant under rigid transforms") {
        Rng rng(31);
        Trajectory t;
        t.dt = 0.1;
        double x = 0, y = 0, h = 0.2, v = 8.0;
        for (int i = 0; i <= 50; ++i) {
            t.poses.push_back({x, y, h});
            t.speeds.push_back(v);
            h += rng.uniform(-0.02, 0.02);
            v = std::max(0.0, v + rng.uniform(-0.3, 0.3));
            x += v * t.dt * std::cos(h);
            y += v * t.dt * std::sin(h);
        }
        RealismPenalty base = realism_penalty(t, cfg);
        Trajectory moved = t;
        for (auto& p : moved.poses) p = transform_pose(p, 1.3, {11, -7});
        RealismPenalty after = realism_penalty(moved, cfg);
        CHECK(after.kin == doctest::Approx(base.kin).epsilon(1e-9));
        CHECK(after.beh == doctest::Approx(base.beh).epsilon(1e-9));
    }
    SUBCASE("too short throws") {
        Trajectory t = straight_trajectory({0, 0, 0}, 1.0, 1);
        CHECK_THROWS_AS(realism_penalty(t, cfg), std::invalid_argument);
    }
}

TEST_CASE("feasibility") {
    RewardConfig cfg;
    Scenario s = straight_scenario();

    SUBCASE("logged adversary future is feasible") {
        CHECK(feasibility(s.future_of(s.adversary()), s, cfg) == 1);
    }
    SUBCASE("shifting 20 m off the road is infeasible") {
        Trajectory t = s.future_of(s.adversary());
        for (auto& p : t.poses) p.y -= 20.0;
        CHECK(feasibility(t, s, cfg) == 0);
    }
    SUBCASE("grazing the boundary within half a vehicle width is infeasible") {
        Trajectory t = s.future_of(s.adversary());
        // adversary lane center y=-1.75, boundary y=-3.5, half-width 1.0:
        // center must stay above -2.5; place it slightly below
        for (auto& p : t.poses) p.y = -3.5 + 0.45 * s.adversary().width;
        CHECK(feasibility(t, s, cfg) == 0);
        for (auto& p : t.poses) p.y = -3.5 + 0.75 * s.adversary().width;
        CHECK(feasibility(t, s, cfg) == 1);
    }
    SUBCASE("background replay collisions are infeasible") {
        Scenario with_bg = straight_scenario(10.0, 10.0, 1);
        Trajectory t = with_bg.future_of(with_bg.adversary());
        // steer into the parked background vehicle at (140, 1.75)
        for (size_t i = 0; i < t.poses.size(); ++i) {
            t.poses[i] = {140.0, 1.75, 0.0};
        }
        CHECK(feasibility(t, with_bg, cfg) == 0);
    }
    SUBCASE("invariant under background relabeling") {
        Scenario with_bg = straight_scenario(10.0, 10.0, 3);
        Trajectory t = with_bg.future_of(with_bg.adversary());
        int before = feasibility(t, with_bg, cfg);
        std::swap(with_bg.agents[2], with_bg.agents[4]);
        std::swap(with_bg.agents[2].id, with_bg.agents[4].id);
        CHECK(feasibility(t, with_bg, cfg) == before);
    }
}

TEST_CASE("pref_reward and user_reward are linear in the weights") {
    RewardConfig cfg;
    Scenario s = straight_scenario();
    Trajectory adv = s.future_of(s.adversary());
    Trajectory ego = s.future_of(s.ego());

    double r_adv_only = pref_reward(adv, ego, s, {1.0, 0.0}, cfg);
    double r_real_only = pref_reward(adv, ego, s, {0.0, 1.0}, cfg);
    AgentSize adv_size{s.adversary().length, s.adversary().width};
    AgentSize ego_size{s.ego().length, s.ego().width};
    CHECK(r_adv_only == doctest::Approx(adversarial_reward(adv, ego, adv_size, ego_size, cfg))
                            .epsilon(1e-12));
    CHECK(r_real_only == doctest::Approx(-realism_penalty(adv, cfg).total()).epsilon(1e-12));

    double mid = pref_reward(adv, ego, s, {0.5, 0.5}, cfg);
    CHECK(mid == doctest::Approx(0.5 * (r_adv_only + r_real_only)).epsilon(1e-12));

    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        double w = rng.uniform();
        double expect = w * r_adv_only + (1.0 - w) * r_real_only;
        CHECK(pref_reward(adv, ego, s, {w, 1.0 - w}, cfg) ==
              doctest::Approx(expect).epsilon(1e-12));
        CHECK(user_reward(adv, ego, s, w, cfg) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(user_reward(adv, ego, s, 1.0, cfg) == doctest::Approx(r_adv_only));
    CHECK(user_reward(adv, ego, s, 0.0, cfg) == doctest::Approx(r_real_only));
    CHECK(user_reward(adv, ego, s, 0.5, cfg) ==
          doctest::Approx(pref_reward(adv, ego, s, {0.5, 0.5}, cfg)));

    // purity: identical calls agree bitwise
    CHECK(pref_reward(adv, ego, s, {0.3, 0.7}, cfg) == pref_reward(adv, ego, s, {0.3, 0.7}, cfg));
}
