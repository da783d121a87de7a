#include "advgen/steering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advgen/csv.hpp"
#include "advgen/parallel.hpp"
#include "advgen/trainer.hpp"

namespace advgen {

PreferenceVector preference_vector(const PolicyParams& expert, const PolicyParams& ref,
                                   const std::string& label) {
    if (expert.v.size() != ref.v.size())
        throw std::invalid_argument("preference_vector: dimension mismatch");
    PreferenceVector pv;
    pv.label = label;
    pv.delta.resize(expert.v.size());
    for (size_t i = 0; i < expert.v.size(); ++i) pv.delta[i] = expert.v[i] - ref.v[i];
    return pv;
}

std::string mix_mode_name(MixMode m) {
    switch (m) {
        case MixMode::weight_interp: return "weight_interp";
        case MixMode::weight_extrap: return "weight_extrap";
        case MixMode::traj_mix: return "traj_mix";
        case MixMode::logit_mix: return "logit_mix";
    }
    return "weight_interp";
}

MixMode mix_mode_from_name(const std::string& name) {
    if (name == "weight_interp") return MixMode::weight_interp;
    if (name == "weight_extrap") return MixMode::weight_extrap;
    if (name == "traj_mix") return MixMode::traj_mix;
    if (name == "logit_mix") return MixMode::logit_mix;
    throw std::invalid_argument("unknown mix mode: " + name);
}

PolicyParams interpolate(const PolicyParams& theta_real, const PolicyParams& theta_adv,
                         double lam) {
    if (theta_real.v.size() != theta_adv.v.size())
        throw std::invalid_argument("interpolate: dimension mismatch");
    if (!(lam >= 0.0 && lam <= 1.0))
        throw std::invalid_argument("interpolate: lambda outside [0,1]; use extrapolate");
    if (lam == 0.0) return theta_real;
    if (lam == 1.0) return theta_adv;
    PolicyParams out;
    out.v.resize(theta_real.v.size());
    for (size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = (1.0 - lam) * theta_real.v[i] + lam * theta_adv.v[i];
    return out;
}

PolicyParams extrapolate(const PolicyParams& theta_base,
                         const std::vector<std::pair<PreferenceVector, double>>& vectors) {
    PolicyParams out = theta_base;
    for (const auto& [vec, phi] : vectors) {
        if (vec.delta.size() != out.v.size())
            throw std::invalid_argument("extrapolate: dimension mismatch");
        for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += phi * vec.delta[i];
    }
    return out;
}

PolicyParams resolve_mixed_params(const MixSpec& spec, const ExpertSet& experts) {
    switch (spec.mode) {
        case MixMode::weight_interp:
            return interpolate(experts.real, experts.adv, spec.lam);
        case MixMode::weight_extrap: {
            PolicyParams base;
            if (spec.base == "ref")
                base = experts.ref;
            else if (spec.base == "real")
                base = experts.real;
            else if (spec.base == "adv")
                base = experts.adv;
            else if (spec.base == "interp")
                base = interpolate(experts.real, experts.adv, spec.lam);
            else
                throw std::invalid_argument("unknown extrapolation base: " + spec.base);
            return extrapolate(base, {{preference_vector(experts.adv, experts.ref, "adv"), spec.phi_adv},
                                      {preference_vector(experts.real, experts.ref, "real"), spec.phi_real}});
        }
        default:
            throw std::invalid_argument("resolve_mixed_params: not a weight-space mode");
    }
}

Trajectory generate_steered(const MixSpec& spec, const ExpertSet& experts,
                            const PolicyModel& model, const Scenario& s, const Trajectory& ego,
                            double mu, int k_candidates, const RewardConfig& cfg) {
    if (k_candidates < 1) throw std::invalid_argument("generate_steered: k_candidates < 1");
    if (spec.mode == MixMode::traj_mix || spec.mode == MixMode::logit_mix) {
        if (spec.phi_adv != 0.0 || spec.phi_real != 0.0)
            throw std::invalid_argument(
                "generate_steered: output-space mixing cannot take extrapolation coefficients");
        return spec.mode == MixMode::traj_mix ? mix_trajectories(experts, model, s, spec.lam)
                                              : mix_logits_decode(experts, model, s, spec.lam);
    }
    PolicyParams mixed = resolve_mixed_params(spec, experts);
    std::vector<double> logits = model.score_goals(mixed, s);
    std::vector<int> top = topk_indices(logits, k_candidates);

    Trajectory best;
    double best_reward = -std::numeric_limits<double>::infinity();
    for (int goal : top) {
        Trajectory traj = model.decode_trajectory(s, goal_grid(s, model.config().grid)[goal]);
        double r = user_reward(traj, ego, s, mu, cfg);
        if (r > best_reward) {
            best_reward = r;
            best = std::move(traj);
        }
    }
    return best;
}

namespace {

Trajectory top1_trajectory(const PolicyParams& p, const PolicyModel& model, const Scenario& s) {
    std::vector<double> logits = model.score_goals(p, s);
    int goal = topk_indices(logits, 1)[0];
    return model.decode_trajectory(s, goal_grid(s, model.config().grid)[goal]);
}

}  // namespace

Trajectory mix_trajectories(const ExpertSet& experts, const PolicyModel& model, const Scenario& s,
                            double lam) {
    Trajectory real = top1_trajectory(experts.real, model, s);
    Trajectory adv = top1_trajectory(experts.adv, model, s);
    if (real.poses.size() != adv.poses.size())
        throw std::invalid_argument("mix_trajectories: length mismatch");
    Trajectory out;
    out.dt = real.dt;
    std::vector<Vec2> pts(real.poses.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        pts[i] = real.poses[i].position() * (1.0 - lam) + adv.poses[i].position() * lam;
    }
    std::vector<double> headings = headings_from_displacements(pts);
    out.poses.resize(pts.size());
    out.speeds.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        out.poses[i] = {pts[i].x, pts[i].y, headings[i]};
        out.speeds[i] =
            i == 0 ? real.speeds[0] : (pts[i] - pts[i - 1]).norm() / out.dt;
    }
    return out;
}

Trajectory mix_logits_decode(const ExpertSet& experts, const PolicyModel& model,
                             const Scenario& s, double lam) {
    std::vector<double> g_real = model.score_goals(experts.real, s);
    std::vector<double> g_adv = model.score_goals(experts.adv, s);
    if (g_real.size() != g_adv.size())
        throw std::invalid_argument("mix_logits_decode: grid mismatch");
    std::vector<double> mixed(g_real.size());
    for (size_t i = 0; i < mixed.size(); ++i)
        mixed[i] = (1.0 - lam) * g_real[i] + lam * g_adv[i];
    int goal = topk_indices(mixed, 1)[0];  // ties resolve to the lowest index
    return model.decode_trajectory(s, goal_grid(s, model.config().grid)[goal]);
}

SweepReport pareto_sweep(const ExpertSet& experts, const PolicyModel& model,
                         const std::vector<Scenario>& corpus, const EgoPolicy& ego,
                         const SweepConfig& cfg, const RewardConfig& rcfg) {
    if (corpus.empty()) throw std::invalid_argument("pareto_sweep: empty corpus");
    auto mu_of = cfg.mu_from_lambda ? cfg.mu_from_lambda : [](double l) { return l; };

    SweepReport rep;
    for (MixMode mode : cfg.modes) {
        for (double lam : cfg.lambdas) {
            MixSpec spec;
            spec.mode = mode;
            spec.lam = lam;
            GeneratorFn gen = [&, spec, lam](const Scenario& s, const Trajectory& ego_stage1) {
                return generate_steered(spec, experts, model, s, ego_stage1, mu_of(lam),
                                        cfg.k_candidates, rcfg);
            };
            SweepCell cell;
            cell.mode = mix_mode_name(mode);
            cell.lam = lam;
            cell.report = evaluate_generator(gen, corpus, ego, rcfg, cfg.workers);
            rep.cells.push_back(std::move(cell));
        }
    }
    return rep;
}

void save_sweep_csv(const SweepReport& rep, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"mode", "lambda", "attack_success_rate", "mean_adv_reward", "mean_p_real",
             "mean_p_kin", "mean_p_beh", "map_feasible_rate", "wd_accel", "wd_vel", "wd_yaw",
             "n_scenarios", "n_skipped"});
    for (const auto& c : rep.cells) {
        csv.row({c.mode, CsvWriter::cell(c.lam), CsvWriter::cell(c.report.attack_success_rate),
                 CsvWriter::cell(c.report.mean_adv_reward),
                 CsvWriter::cell(c.report.mean_p_kin + c.report.mean_p_beh),
                 CsvWriter::cell(c.report.mean_p_kin), CsvWriter::cell(c.report.mean_p_beh),
                 CsvWriter::cell(c.report.map_feasible_rate), CsvWriter::cell(c.report.wd_accel),
                 CsvWriter::cell(c.report.wd_vel), CsvWriter::cell(c.report.wd_yaw),
                 CsvWriter::cell(c.report.n_scenarios), CsvWriter::cell(c.report.n_skipped)});
    }
}

namespace {

// mean equal-weight preference reward of the argmax-logit candidate
double measured_reward(const PolicyParams& p, const PolicyModel& model,
                       const std::vector<ScenarioCache>& caches, int workers) {
    std::vector<double> vals(caches.size());
    parallel_for(int(caches.size()), workers, [&](int i) {
        const ScenarioCache& c = caches[i];
        std::vector<double> logits = model.score_from_features(p, c.ctx, c.goal_feats);
        int goal = topk_indices(logits, 1)[0];
        vals[i] = c.pref(goal, {0.5, 0.5});
    });
    double acc = 0.0;
    for (double v : vals) acc += v;
    return acc / double(vals.size());
}

}  // namespace

LandscapeReport lmc_scan(const ExpertSet& experts, const PolicyModel& model,
                         const std::vector<Scenario>& corpus, const LandscapeConfig& cfg,
                         const RewardConfig& rcfg) {
    if (cfg.lambdas.empty()) throw std::invalid_argument("lmc_scan: empty grid");
    std::vector<ScenarioCache> caches;
    caches.reserve(corpus.size());
    for (const Scenario& s : corpus)
        caches.push_back(build_scenario_cache(s, model, s.future_of(s.ego()), rcfg));

    LandscapeReport rep;
    PreferenceVector d_adv = preference_vector(experts.adv, experts.ref, "adv");
    PreferenceVector d_real = preference_vector(experts.real, experts.ref, "real");
    rep.delta_adv_norm = norm2(d_adv.delta);
    rep.delta_real_norm = norm2(d_real.delta);
    double denom = rep.delta_adv_norm * rep.delta_real_norm;
    rep.cosine = denom > 0.0 ? dot(d_adv.delta, d_real.delta) / denom : 1.0;
    rep.angle_deg = std::acos(std::clamp(rep.cosine, -1.0, 1.0)) * 180.0 / M_PI;
    rep.degenerate_plane =
        denom <= 1e-12 || std::fabs(rep.cosine) > 1.0 - 1e-9;

    double m_real = measured_reward(experts.real, model, caches, cfg.workers);
    double m_adv = measured_reward(experts.adv, model, caches, cfg.workers);
    for (double lam : cfg.lambdas) {
        PolicyParams p = interpolate(experts.real, experts.adv, lam);
        LandscapeReport::Row1d row;
        row.lam = lam;
        row.measured = (lam == 0.0) ? m_real : (lam == 1.0 ? m_adv : measured_reward(p, model, caches, cfg.workers));
        row.chord = (1.0 - lam) * m_real + lam * m_adv;
        rep.rows_1d.push_back(row);
    }

    if (cfg.plane_resolution > 1 && !rep.degenerate_plane) {
        for (int ia = 0; ia < cfg.plane_resolution; ++ia) {
            double a = cfg.plane_lo +
                       (cfg.plane_hi - cfg.plane_lo) * double(ia) / double(cfg.plane_resolution - 1);
            for (int ib = 0; ib < cfg.plane_resolution; ++ib) {
                double b = cfg.plane_lo + (cfg.plane_hi - cfg.plane_lo) * double(ib) /
                                              double(cfg.plane_resolution - 1);
                PolicyParams p = experts.ref;
                for (size_t i = 0; i < p.v.size(); ++i)
                    p.v[i] += a * d_real.delta[i] + b * d_adv.delta[i];
                rep.rows_2d.push_back({a, b, measured_reward(p, model, caches, cfg.workers)});
            }
        }
    }

    // PCA of the flat parameter vectors (Gram-matrix route; few points)
    std::vector<std::pair<std::string, const PolicyParams*>> labeled;
    std::vector<PolicyParams> storage;
    storage.reserve(cfg.lambdas.size() + 8);
    labeled.push_back({"ref", &experts.ref});
    labeled.push_back({"real", &experts.real});
    labeled.push_back({"adv", &experts.adv});
    for (double lam : cfg.lambdas) {
        if (lam == 0.0 || lam == 1.0) continue;
        storage.push_back(interpolate(experts.real, experts.adv, lam));
        labeled.push_back({"interp_" + format_double(lam), &storage.back()});
    }
    for (double phi : {1.25, 1.5}) {
        storage.push_back(extrapolate(experts.ref, {{d_adv, phi}}));
        labeled.push_back({"extrap_adv_" + format_double(phi), &storage.back()});
        storage.push_back(extrapolate(experts.ref, {{d_real, phi}}));
        labeled.push_back({"extrap_real_" + format_double(phi), &storage.back()});
    }
    int n = int(labeled.size());
    int dim = int(experts.ref.v.size());
    Eigen::MatrixXd centered(n, dim);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i)
        mean += Eigen::Map<const Eigen::VectorXd>(labeled[i].second->v.data(), dim);
    mean /= double(n);
    for (int i = 0; i < n; ++i)
        centered.row(i) =
            Eigen::Map<const Eigen::VectorXd>(labeled[i].second->v.data(), dim).transpose() -
            mean.transpose();
    Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    // top-2 components from the largest eigenpairs
    for (int i = 0; i < n; ++i) {
        double x = 0.0, y = 0.0;
        if (n >= 2) {
            Eigen::VectorXd u1 = eig.eigenvectors().col(n - 1);
            double l1 = std::max(eig.eigenvalues()(n - 1), 0.0);
            x = std::sqrt(l1) * u1(i);
            if (n >= 3) {
                Eigen::VectorXd u2 = eig.eigenvectors().col(n - 2);
                double l2 = std::max(eig.eigenvalues()(n - 2), 0.0);
                y = std::sqrt(l2) * u2(i);
            }
        }
        rep.pca.push_back({labeled[i].first, x, y});
    }
    return rep;
}

void save_landscape_csv(const LandscapeReport& rep, const std::string& path_prefix) {
    {
        CsvWriter csv(path_prefix + "_1d.csv");
        csv.row({"lambda", "measured", "chord"});
        for (const auto& r : rep.rows_1d)
            csv.row({CsvWriter::cell(r.lam), CsvWriter::cell(r.measured), CsvWriter::cell(r.chord)});
    }
    {
        CsvWriter csv(path_prefix + "_2d.csv");
        csv.row({"a_real", "b_adv", "reward"});
        for (const auto& r : rep.rows_2d)
            csv.row({CsvWriter::cell(r.a), CsvWriter::cell(r.b), CsvWriter::cell(r.reward)});
    }
    {
        CsvWriter csv(path_prefix + "_pca.csv");
        csv.row({"label", "pc1", "pc2"});
        for (const auto& p : rep.pca)
            csv.row({p.label, CsvWriter::cell(p.x), CsvWriter::cell(p.y)});
    }
    {
        CsvWriter csv(path_prefix + "_meta.csv");
        csv.row({"delta_adv_norm", "delta_real_norm", "cosine", "angle_deg", "degenerate_plane"});
        csv.row({CsvWriter::cell(rep.delta_adv_norm), CsvWriter::cell(rep.delta_real_norm),
                 CsvWriter::cell(rep.cosine), CsvWriter::cell(rep.angle_deg),
                 CsvWriter::cell(int(rep.degenerate_plane))});
    }
}

}  // namespace advgen
