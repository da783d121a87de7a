#include "advgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "advgen/csv.hpp"
#include "advgen/parallel.hpp"

namespace advgen {

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty input");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    size_t n = sa.size(), m = sb.size();
    if (n == m) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += std::fabs(sa[i] - sb[i]);
        return acc / double(n);
    }
    // integrate |Fa^{-1}(q) - Fb^{-1}(q)| over quantile breakpoints i/n, j/m
    double acc = 0.0;
    size_t i = 0, j = 0;
    double q = 0.0;
    while (i < n && j < m) {
        double qa = double(i + 1) / double(n);
        double qb = double(j + 1) / double(m);
        double next = std::min(qa, qb);
        acc += (next - q) * std::fabs(sa[i] - sb[j]);
        q = next;
        if (qa <= next) ++i;
        if (qb <= next) ++j;
    }
    return acc;
}

namespace {

struct ScenarioEval {
    bool skipped = false;
    PerScenarioRow row;
    std::vector<double> gen_speed, gen_accel, gen_yaw;
    std::vector<double> log_speed, log_accel, log_yaw;
};

ScenarioEval evaluate_one(const GeneratorFn& generator, const Scenario& s, const EgoPolicy& ego,
                          const RewardConfig& cfg) {
    ScenarioEval ev;
    ev.row.scenario_id = s.id;

    // stage 1: ego rollout on the unmodified scenario
    EpisodeResult stage1 = run_episode(s, ego, nullptr);

    Trajectory adv;
    try {
        adv = generator(s, stage1.ego);
        if (int(adv.poses.size()) != s.future_steps + 1)
            throw std::runtime_error("generated trajectory has wrong horizon");
    } catch (...) {
        ev.skipped = true;
        return ev;
    }

    // stage 2: re-simulate with the generated adversary
    EpisodeResult stage2 = run_episode(s, ego, &adv);
    ev.row.attack_success = stage2.collision_with_adversary ? 1 : 0;

    // pad the (possibly collision-shortened) re-simulated ego rollout so the
    // reward horizon matches; the ego holds its last pose after the episode
    Trajectory ego_resim = stage2.ego;
    while (int(ego_resim.poses.size()) < s.future_steps + 1) {
        ego_resim.poses.push_back(ego_resim.poses.back());
        ego_resim.speeds.push_back(0.0);
    }

    AgentSize adv_size{s.adversary().length, s.adversary().width};
    AgentSize ego_size{s.ego().length, s.ego().width};
    ev.row.breakdown.adv = adversarial_reward(adv, ego_resim, adv_size, ego_size, cfg);
    RealismPenalty pen = realism_penalty(adv, cfg);
    ev.row.breakdown.p_kin = pen.kin;
    ev.row.breakdown.p_beh = pen.beh;
    ev.row.breakdown.feasible = feasibility(adv, s, cfg);
    ev.row.breakdown.pref = ev.row.breakdown.adv - pen.total();

    // map-compliance event rates for the generated adversary
    int cross = 0, crash = 0;
    for (int t = 0; t < int(adv.poses.size()); ++t) {
        OrientedBox box{adv.poses[t], adv_size.length, adv_size.width};
        bool line_hit = false, obj_hit = false;
        for (const auto& pl : s.map.polylines) {
            if (pl.impassable && obb_polyline_intersects(box, pl)) {
                line_hit = true;
                break;
            }
        }
        for (const AgentRecord* bg : s.background()) {
            if (obb_intersects(box, bg->box_at(s.current_index() + t))) {
                obj_hit = true;
                break;
            }
        }
        cross |= line_hit;
        crash |= obj_hit;
        if (cross && crash) break;
    }
    ev.row.cross_line = cross;
    ev.row.crash_obj = crash;

    KinematicProfile gen_prof = kinematic_profile(adv);
    Trajectory logged = s.future_of(s.adversary());
    KinematicProfile log_prof = kinematic_profile(logged);
    ev.gen_speed = gen_prof.speeds;
    ev.gen_accel = gen_prof.long_accels;
    ev.gen_yaw = gen_prof.ang_vels;
    ev.log_speed = log_prof.speeds;
    ev.log_accel = log_prof.long_accels;
    ev.log_yaw = log_prof.ang_vels;
    return ev;
}

}  // namespace

EvalReport evaluate_generator(const GeneratorFn& generator, const std::vector<Scenario>& corpus,
                              const EgoPolicy& ego, const RewardConfig& cfg, int workers,
                              std::vector<PerScenarioRow>* rows) {
    if (corpus.empty()) throw std::invalid_argument("evaluate_generator: empty corpus");
    std::vector<ScenarioEval> evals(corpus.size());
    parallel_for(int(corpus.size()), workers,
                 [&](int i) { evals[i] = evaluate_one(generator, corpus[i], ego, cfg); });

    EvalReport rep;
    std::vector<double> gs, ga, gy, ls, la, ly;
    int n_ok = 0;
    for (const auto& ev : evals) {
        if (ev.skipped) {
            rep.n_skipped += 1;
            continue;
        }
        ++n_ok;
        rep.attack_success_rate += ev.row.attack_success;
        rep.mean_adv_reward += ev.row.breakdown.adv;
        rep.mean_p_beh += ev.row.breakdown.p_beh;
        rep.mean_p_kin += ev.row.breakdown.p_kin;
        rep.crash_obj_rate += ev.row.crash_obj;
        rep.cross_line_rate += ev.row.cross_line;
        rep.map_feasible_rate += ev.row.breakdown.feasible;
        gs.insert(gs.end(), ev.gen_speed.begin(), ev.gen_speed.end());
        ga.insert(ga.end(), ev.gen_accel.begin(), ev.gen_accel.end());
        gy.insert(gy.end(), ev.gen_yaw.begin(), ev.gen_yaw.end());
        ls.insert(ls.end(), ev.log_speed.begin(), ev.log_speed.end());
        la.insert(la.end(), ev.log_accel.begin(), ev.log_accel.end());
        ly.insert(ly.end(), ev.log_yaw.begin(), ev.log_yaw.end());
        if (rows) rows->push_back(ev.row);
    }
    rep.n_scenarios = n_ok;
    if (n_ok > 0) {
        rep.attack_success_rate /= n_ok;
        rep.mean_adv_reward /= n_ok;
        rep.mean_p_beh /= n_ok;
        rep.mean_p_kin /= n_ok;
        rep.crash_obj_rate /= n_ok;
        rep.cross_line_rate /= n_ok;
        rep.map_feasible_rate /= n_ok;
        rep.wd_vel = wasserstein_1d(gs, ls);
        rep.wd_accel = wasserstein_1d(ga, la);
        rep.wd_yaw = wasserstein_1d(gy, ly);
    }
    return rep;
}

void save_eval_report_csv(const EvalReport& r, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"attack_success_rate", "mean_adv_reward", "mean_p_beh", "mean_p_kin",
             "crash_obj_rate", "cross_line_rate", "map_feasible_rate", "wd_accel", "wd_vel",
             "wd_yaw", "n_scenarios", "n_skipped"});
    csv.row({CsvWriter::cell(r.attack_success_rate), CsvWriter::cell(r.mean_adv_reward),
             CsvWriter::cell(r.mean_p_beh), CsvWriter::cell(r.mean_p_kin),
             CsvWriter::cell(r.crash_obj_rate), CsvWriter::cell(r.cross_line_rate),
             CsvWriter::cell(r.map_feasible_rate), CsvWriter::cell(r.wd_accel),
             CsvWriter::cell(r.wd_vel), CsvWriter::cell(r.wd_yaw), CsvWriter::cell(r.n_scenarios),
             CsvWriter::cell(r.n_skipped)});
}

void save_eval_rows_csv(const std::vector<PerScenarioRow>& rows, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"scenario_id", "adv", "p_kin", "p_beh", "feasible", "pref", "attack_success",
             "crash_obj", "cross_line"});
    for (const auto& r : rows) {
        csv.row({r.scenario_id, CsvWriter::cell(r.breakdown.adv), CsvWriter::cell(r.breakdown.p_kin),
                 CsvWriter::cell(r.breakdown.p_beh), CsvWriter::cell(r.breakdown.feasible),
                 CsvWriter::cell(r.breakdown.pref), CsvWriter::cell(r.attack_success),
                 CsvWriter::cell(r.crash_obj), CsvWriter::cell(r.cross_line)});
    }
}

std::string eval_report_table(const std::string& label, const EvalReport& r) {
    std::ostringstream os;
    os << "method            succ.rate  adv.reward  p_beh    p_kin    crash.obj cross.line "
          "wd.accel wd.vel  wd.yaw  n   skipped\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%-17s %8.4f %10.4f %8.4f %8.4f %9.4f %10.4f %8.4f %7.4f %7.4f %3d %3d\n",
                  label.c_str(), r.attack_success_rate, r.mean_adv_reward, r.mean_p_beh,
                  r.mean_p_kin, r.crash_obj_rate, r.cross_line_rate, r.wd_accel, r.wd_vel,
                  r.wd_yaw, r.n_scenarios, r.n_skipped);
    os << buf;
    return os.str();
}

}  // namespace advgen
