#include "advgen/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advgen {

std::vector<double> default_reactive_params() {
    return {
        1.2,  // kp, speed tracking
        0.2,  // kd
        0.8,  // forecast horizon, s
        3.5,  // brake decel, m/s^2
        0.3,  // safety margin, m (box inflation)
        2.0,  // accel limit, m/s^2
        2.6,  // corridor half width, m (idm-style leader gating)
        0.0,  // speed floor, m/s
    };
}

namespace {

// Logged ego route as an arc-length parametrized path.
struct RoutePath {
    std::vector<double> arc;      // cumulative, arc[0] = 0
    std::vector<Pose2> poses;     // logged future poses
    std::vector<double> speeds;   // logged speed profile

    double total() const { return arc.back(); }

    Pose2 pose_at(double s) const {
        if (s <= 0.0) return poses.front();
        if (s >= arc.back()) return poses.back();
        size_t k = size_t(std::upper_bound(arc.begin(), arc.end(), s) - arc.begin());
        double seg = arc[k] - arc[k - 1];
        double f = seg > 0.0 ? (s - arc[k - 1]) / seg : 0.0;
        const Pose2& a = poses[k - 1];
        const Pose2& b = poses[k];
        double dh = wrap_angle(b.heading - a.heading);
        return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.heading + f * dh};
    }

    double speed_at(double s) const {
        if (s <= 0.0) return speeds.front();
        if (s >= arc.back()) return speeds.back();
        size_t k = size_t(std::upper_bound(arc.begin(), arc.end(), s) - arc.begin());
        double seg = arc[k] - arc[k - 1];
        double f = seg > 0.0 ? (s - arc[k - 1]) / seg : 0.0;
        return speeds[k - 1] + f * (speeds[k] - speeds[k - 1]);
    }
};

RoutePath route_from_log(const Scenario& s) {
    Trajectory fut = s.future_of(s.ego());
    RoutePath path;
    path.poses = fut.poses;
    path.speeds = fut.speeds;
    path.arc.resize(fut.poses.size(), 0.0);
    for (size_t i = 1; i < fut.poses.size(); ++i) {
        path.arc[i] =
            path.arc[i - 1] + (fut.poses[i].position() - fut.poses[i - 1].position()).norm();
    }
    if (path.arc.back() <= 0.0) path.arc.back() = 1e-9;
    return path;
}

struct Obstacle {
    Pose2 pose;
    double length, width;
    double speed;
    double turn_rate;
};

double idm_accel_sim(double v, double v_desired, double gap, double dv) {
    const double a_max = 1.8, b_comf = 2.5, headway = 1.2, s0 = 2.0;
    double free_term = 1.0 - std::pow(v / std::max(v_desired, 0.1), 4.0);
    if (gap <= 0.1) return -6.0;
    double s_star = s0 + std::max(0.0, v * headway + v * dv / (2.0 * std::sqrt(a_max * b_comf)));
    return a_max * (free_term - (s_star / gap) * (s_star / gap));
}

}  // namespace

EpisodeResult run_episode(const Scenario& s, const EgoPolicy& ego, const Trajectory* adversary) {
    Trajectory adv_traj = adversary ? *adversary : s.future_of(s.adversary());
    if (int(adv_traj.poses.size()) != s.future_steps + 1)
        throw std::invalid_argument("run_episode: adversary trajectory/horizon mismatch");

    const AgentRecord& ego_rec = s.ego();
    const AgentRecord& adv_rec = s.adversary();
    RoutePath path = route_from_log(s);

    std::vector<double> rp =
        ego.kind == EgoKind::reactive_pd
            ? (ego.params.empty() ? default_reactive_params() : ego.params)
            : default_reactive_params();
    if (ego.kind == EgoKind::reactive_pd && rp.size() != default_reactive_params().size())
        throw std::invalid_argument("run_episode: bad reactive parameter count");
    double kp = rp[0], kd = rp[1], horizon_s = std::max(0.0, rp[2]), brake = std::max(0.5, rp[3]);
    double margin = std::max(0.0, rp[4]), accel_limit = std::max(0.2, rp[5]);
    double corridor = std::max(0.5, rp[6]), speed_floor = std::max(0.0, rp[7]);

    EpisodeResult out;
    out.ego.dt = s.dt;

    double arc = 0.0;
    double v = ego_rec.logged.speeds[s.current_index()];
    double prev_err = 0.0;
    int F = s.future_steps;

    for (int t = 0; t <= F; ++t) {
        Pose2 ego_pose = (ego.kind == EgoKind::replay) ? path.poses[t] : path.pose_at(arc);
        double ego_speed = (ego.kind == EgoKind::replay) ? path.speeds[t] : v;
        out.ego.poses.push_back(ego_pose);
        out.ego.speeds.push_back(ego_speed);

        OrientedBox ego_box{ego_pose, ego_rec.length, ego_rec.width};
        OrientedBox adv_box{adv_traj.poses[t], adv_rec.length, adv_rec.width};
        if (t >= 1 && obb_intersects(ego_box, adv_box)) {
            out.collision = true;
            out.collision_with_adversary = true;
            out.collision_step = t;
            out.cost_events += 1;
            break;
        }
        bool hit_bg = false;
        for (const AgentRecord* bg : s.background()) {
            if (t >= 1 && obb_intersects(ego_box, bg->box_at(s.current_index() + t))) {
                hit_bg = true;
                break;
            }
        }
        if (hit_bg) {
            out.collision = true;
            out.collision_step = t;
            out.cost_events += 1;
            break;
        }
        if (t == F) break;

        if (ego.kind == EgoKind::replay) {
            arc = path.arc[t + 1];
            continue;
        }

        // surrounding agents at this step, with crude motion estimates
        std::vector<Obstacle> obstacles;
        {
            Obstacle ob;
            ob.pose = adv_traj.poses[t];
            ob.length = adv_rec.length;
            ob.width = adv_rec.width;
            ob.speed = adv_traj.speeds[t];
            ob.turn_rate = 0.0;
            if (t >= 1) {
                ob.turn_rate = wrap_angle(adv_traj.poses[t].heading - adv_traj.poses[t - 1].heading) / s.dt;
            }
            obstacles.push_back(ob);
        }
        for (const AgentRecord* bg : s.background()) {
            int idx = s.current_index() + t;
            Obstacle ob;
            ob.pose = bg->logged.poses[std::min(idx, int(bg->logged.poses.size()) - 1)];
            ob.length = bg->length;
            ob.width = bg->width;
            ob.speed = bg->logged.speeds[std::min(idx, int(bg->logged.speeds.size()) - 1)];
            ob.turn_rate = 0.0;
            obstacles.push_back(ob);
        }

        double accel = 0.0;
        double v_target = path.speed_at(arc);
        if (ego.kind == EgoKind::idm) {
            double min_gap = 1e9, lead_dv = 0.0;
            for (const Obstacle& ob : obstacles) {
                Vec2 rel = to_body_frame(ob.pose.position(), ego_pose);
                if (rel.x > 0.0 && std::fabs(rel.y) < corridor) {
                    double gap = rel.x - 0.5 * (ego_rec.length + ob.length);
                    if (gap < min_gap) {
                        min_gap = gap;
                        lead_dv = v - ob.speed;
                    }
                }
            }
            accel = idm_accel_sim(v, std::max(v_target, 0.1), min_gap, lead_dv);
            accel = std::clamp(accel, -6.0, 2.0);
        } else {  // reactive_pd
            double err = v_target - v;
            accel = kp * err + kd * (err - prev_err) / s.dt;
            prev_err = err;
            accel = std::clamp(accel, -brake, accel_limit);

            // constant-turn-rate forecast; brake on any predicted overlap
            int steps_ahead = int(std::floor(horizon_s / s.dt));
            bool danger = false;
            for (int k = 1; k <= steps_ahead && !danger; ++k) {
                double fs = std::min(arc + v * s.dt * double(k), path.total());
                Pose2 fpose = path.pose_at(fs);
                OrientedBox fbox{fpose, ego_rec.length + 2.0 * margin, ego_rec.width + 2.0 * margin};
                for (const Obstacle& ob : obstacles) {
                    double h = ob.pose.heading + ob.turn_rate * s.dt * double(k - 1);
                    Pose2 op = ob.pose;
                    // integrate the unicycle forward
                    double hh = ob.pose.heading;
                    for (int j = 0; j < k; ++j) {
                        op.x += ob.speed * s.dt * std::cos(hh);
                        op.y += ob.speed * s.dt * std::sin(hh);
                        hh += ob.turn_rate * s.dt;
                    }
                    op.heading = h;
                    if (obb_intersects(fbox, {op, ob.length, ob.width})) {
                        danger = true;
                        break;
                    }
                }
            }
            if (danger) accel = -brake;
        }
        v = std::max(speed_floor, v + accel * s.dt);
        arc = std::min(arc + v * s.dt, path.total() + 1.0);
    }

    double reached = (ego.kind == EgoKind::replay)
                         ? path.arc[std::min<int>(int(out.ego.poses.size()) - 1, F)]
                         : std::min(arc, path.total());
    out.completion = std::clamp(reached / path.total(), 0.0, 1.0);
    return out;
}

namespace {

double score_batch(const std::vector<double>& params, const std::vector<Scenario>& corpus,
                   const AdversaryFn& adversary_fn, const CemConfig& cfg) {
    double total = 0.0;
    for (const Scenario& s : corpus) {
        std::optional<Trajectory> adv;
        if (adversary_fn) {
            EpisodeResult stage1 = run_episode(s, EgoPolicy::reactive(params), nullptr);
            adv = adversary_fn(s, stage1.ego);
        }
        EpisodeResult r =
            run_episode(s, EgoPolicy::reactive(params), adv ? &*adv : nullptr);
        total += r.completion - cfg.collision_penalty * (r.collision ? 1.0 : 0.0);
    }
    return total / double(corpus.size());
}

}  // namespace

ImproveResult improve_ego(const std::vector<double>& theta_ego,
                          const std::vector<Scenario>& corpus, const AdversaryFn& adversary_fn,
                          int budget, const CemConfig& cfg, Rng& rng) {
    ImproveResult out;
    out.params = theta_ego;
    if (budget <= 0 || corpus.empty()) return out;

    size_t d = theta_ego.size();
    std::vector<double> mean = theta_ego;
    std::vector<double> sigma(d);
    for (size_t i = 0; i < d; ++i)
        sigma[i] = std::max(cfg.sigma_floor, cfg.init_sigma * std::max(0.2, std::fabs(mean[i])));

    double best_score = score_batch(theta_ego, corpus, adversary_fn, cfg);
    out.incumbent_score = best_score;
    std::vector<double> best = theta_ego;

    for (int iter = 0; iter < budget; ++iter) {
        std::vector<std::vector<double>> pop;
        pop.push_back(mean);  // elitist: incumbent mean always participates
        for (int p = 1; p < cfg.population; ++p) {
            std::vector<double> cand(d);
            for (size_t i = 0; i < d; ++i) cand[i] = mean[i] + sigma[i] * rng.normal();
            pop.push_back(std::move(cand));
        }
        std::vector<std::pair<double, int>> scored;
        for (int p = 0; p < int(pop.size()); ++p) {
            scored.push_back({score_batch(pop[p], corpus, adversary_fn, cfg), p});
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        if (scored[0].first > best_score) {
            best_score = scored[0].first;
            best = pop[scored[0].second];
        }
        int n_el = std::min(cfg.elites, int(scored.size()));
        for (size_t i = 0; i < d; ++i) {
            double m = 0.0;
            for (int e = 0; e < n_el; ++e) m += pop[scored[e].second][i];
            m /= double(n_el);
            double var = 0.0;
            for (int e = 0; e < n_el; ++e) {
                double diff = pop[scored[e].second][i] - m;
                var += diff * diff;
            }
            mean[i] = m;
            sigma[i] = std::max(cfg.sigma_floor, std::sqrt(var / std::max(1, n_el)));
        }
    }

    out.params = best;  // never worse than the incumbent on this batch
    out.final_score = best_score;
    return out;
}

}  // namespace advgen
