#include "advgen/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

namespace advgen {

using nlohmann::json;

std::vector<Vec2> goal_grid(const Scenario& s, const GoalGridConfig& cfg) {
    const AgentRecord& adv = s.adversary();
    int cur = s.current_index();
    double v0 = adv.logged.speeds[cur];
    double horizon = double(s.future_steps) * s.dt;
    std::vector<Vec2> goals;
    goals.reserve(cfg.size());
    for (double scale : cfg.speed_scalings) {
        double dist = std::max(v0 * horizon * scale, cfg.min_distance);
        for (const auto& dir : cfg.directions) {
            goals.push_back({dist * std::cos(dir.bearing), dist * std::sin(dir.bearing) + dir.lateral});
        }
    }
    return goals;
}

PolicyModel::PolicyModel(PolicyConfig cfg) : cfg_(std::move(cfg)) {
    int in = cfg_.input_dim();
    int h = cfg_.hidden;
    w1_ = 0;
    b1_ = w1_ + h * in;
    w2_ = b1_ + h;
    b2_ = w2_ + h * h;
    w3_ = b2_ + h;
    b3_ = w3_ + h;
    param_count_ = b3_ + 1;
}

PolicyParams PolicyModel::init_params(Rng& rng, double scale) const {
    int in = cfg_.input_dim();
    int h = cfg_.hidden;
    PolicyParams p;
    p.v.assign(param_count_, 0.0);
    double s1 = scale / std::sqrt(double(in));
    double s2 = scale / std::sqrt(double(h));
    for (int i = 0; i < h * in; ++i) p.v[w1_ + i] = rng.normal(0.0, s1);
    for (int i = 0; i < h * h; ++i) p.v[w2_ + i] = rng.normal(0.0, s2);
    for (int i = 0; i < h; ++i) p.v[w3_ + i] = rng.normal(0.0, s2);
    return p;
}

std::vector<double> PolicyModel::assemble_input(const std::vector<double>& ctx,
                                                const std::vector<double>& goal_feat) const {
    std::vector<double> x;
    x.reserve(ctx.size() + goal_feat.size());
    x.insert(x.end(), ctx.begin(), ctx.end());
    x.insert(x.end(), goal_feat.begin(), goal_feat.end());
    if (int(x.size()) != cfg_.input_dim())
        throw std::invalid_argument("policy input dimension mismatch");
    return x;
}

double PolicyModel::forward(const PolicyParams& p, const std::vector<double>& input,
                            std::vector<double>* h1_out, std::vector<double>* h2_out) const {
    if (int(p.v.size()) != param_count_)
        throw std::invalid_argument("policy parameter dimension mismatch");
    int in = cfg_.input_dim();
    int h = cfg_.hidden;
    std::vector<double> h1(h), h2(h);
    for (int i = 0; i < h; ++i) {
        double acc = p.v[b1_ + i];
        const double* row = &p.v[w1_ + i * in];
        for (int j = 0; j < in; ++j) acc += row[j] * input[j];
        h1[i] = std::tanh(acc);
    }
    for (int i = 0; i < h; ++i) {
        double acc = p.v[b2_ + i];
        const double* row = &p.v[w2_ + i * h];
        for (int j = 0; j < h; ++j) acc += row[j] * h1[j];
        h2[i] = std::tanh(acc);
    }
    double logit = p.v[b3_];
    for (int i = 0; i < h; ++i) logit += p.v[w3_ + i] * h2[i];
    if (h1_out) *h1_out = std::move(h1);
    if (h2_out) *h2_out = std::move(h2);
    return logit;
}

void PolicyModel::logit_grad(const PolicyParams& p, const std::vector<double>& input,
                             std::vector<double>& grad_out) const {
    int in = cfg_.input_dim();
    int h = cfg_.hidden;
    std::vector<double> h1, h2;
    forward(p, input, &h1, &h2);
    grad_out.assign(param_count_, 0.0);

    grad_out[b3_] = 1.0;
    for (int i = 0; i < h; ++i) grad_out[w3_ + i] = h2[i];

    std::vector<double> g2(h);
    for (int i = 0; i < h; ++i) g2[i] = p.v[w3_ + i] * (1.0 - h2[i] * h2[i]);
    for (int i = 0; i < h; ++i) {
        grad_out[b2_ + i] = g2[i];
        double* row = &grad_out[w2_ + i * h];
        for (int j = 0; j < h; ++j) row[j] = g2[i] * h1[j];
    }

    std::vector<double> g1(h, 0.0);
    for (int j = 0; j < h; ++j) {
        double acc = 0.0;
        for (int i = 0; i < h; ++i) acc += p.v[w2_ + i * h + j] * g2[i];
        g1[j] = acc * (1.0 - h1[j] * h1[j]);
    }
    for (int i = 0; i < h; ++i) {
        grad_out[b1_ + i] = g1[i];
        double* row = &grad_out[w1_ + i * in];
        for (int j = 0; j < in; ++j) row[j] = g1[i] * input[j];
    }
}

std::vector<double> PolicyModel::score_from_features(
    const PolicyParams& p, const std::vector<double>& ctx,
    const std::vector<std::vector<double>>& goal_feats) const {
    std::vector<double> logits(goal_feats.size());
    for (size_t i = 0; i < goal_feats.size(); ++i) {
        logits[i] = forward(p, assemble_input(ctx, goal_feats[i]), nullptr, nullptr);
    }
    return logits;
}

std::vector<double> PolicyModel::score_goals(const PolicyParams& p, const Scenario& s) const {
    std::vector<double> ctx = context_features(s, cfg_.features);
    std::vector<Vec2> goals = goal_grid(s, cfg_.grid);
    std::vector<std::vector<double>> feats;
    feats.reserve(goals.size());
    for (Vec2 g : goals) feats.push_back(goal_features(s, g, cfg_.features));
    return score_from_features(p, ctx, feats);
}

Trajectory PolicyModel::decode_trajectory(const Scenario& s, Vec2 goal_body) const {
    const AgentRecord& adv = s.adversary();
    int cur = s.current_index();
    Pose2 start = adv.logged.poses[cur];
    double v0 = adv.logged.speeds[cur];
    int steps = s.future_steps;
    double horizon = double(steps) * s.dt;

    Vec2 p0 = start.position();
    Vec2 p1 = to_world_frame(goal_body, start);
    Vec2 chord = p1 - p0;
    double chord_len = chord.norm();

    Trajectory out;
    out.dt = s.dt;
    out.poses.reserve(steps + 1);
    out.speeds.reserve(steps + 1);
    out.poses.push_back(start);
    out.speeds.push_back(v0);

    double end_heading = (chord_len > 1e-9) ? std::atan2(chord.y, chord.x) : start.heading;
    Vec2 m0 = Vec2{std::cos(start.heading), std::sin(start.heading)} * chord_len;
    Vec2 m1 = Vec2{std::cos(end_heading), std::sin(end_heading)} * chord_len;

    auto hermite = [&](double u) {
        double u2 = u * u, u3 = u2 * u;
        double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
        double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
        return Vec2{h00 * p0.x + h10 * m0.x + h01 * p1.x + h11 * m1.x,
                    h00 * p0.y + h10 * m0.y + h01 * p1.y + h11 * m1.y};
    };
    auto hermite_tangent = [&](double u) {
        double u2 = u * u;
        double d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1;
        double d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
        return Vec2{d00 * p0.x + d10 * m0.x + d01 * p1.x + d11 * m1.x,
                    d00 * p0.y + d10 * m0.y + d01 * p1.y + d11 * m1.y};
    };

    // arc-length table over the spline
    constexpr int kKnots = 257;
    std::vector<double> cum(kKnots, 0.0);
    Vec2 prev = p0;
    for (int k = 1; k < kKnots; ++k) {
        Vec2 pt = hermite(double(k) / double(kKnots - 1));
        cum[k] = cum[k - 1] + (pt - prev).norm();
        prev = pt;
    }
    double total = cum.back();

    // terminal speed such that the linear ramp integrates to the path
    // length, clamped at zero; in the clamped case the ramp steepens to
    // stop exactly at the path end (full-stop profile)
    double v1_raw = 2.0 * total / horizon - v0;
    double stop_time = horizon;
    if (v1_raw < 0.0) stop_time = (v0 > 0.0) ? 2.0 * total / v0 : 0.0;
    double v1 = std::max(0.0, v1_raw);

    auto arc_at = [&](double t) {
        double sarc;
        if (v1_raw >= 0.0) {
            sarc = v0 * t + (v1 - v0) * t * t / (2.0 * horizon);
        } else if (t < stop_time && stop_time > 0.0) {
            sarc = v0 * t * (1.0 - 0.5 * t / stop_time);
        } else {
            sarc = total;
        }
        return std::clamp(sarc, 0.0, total);
    };
    auto u_at_arc = [&](double sarc) {
        auto it = std::lower_bound(cum.begin(), cum.end(), sarc);
        if (it == cum.begin()) return 0.0;
        if (it == cum.end()) return 1.0;
        size_t k = size_t(it - cum.begin());
        double seg = cum[k] - cum[k - 1];
        double frac = seg > 0.0 ? (sarc - cum[k - 1]) / seg : 0.0;
        return (double(k - 1) + frac) / double(kKnots - 1);
    };

    double prev_arc = 0.0;
    double prev_heading = start.heading;
    for (int t = 1; t <= steps; ++t) {
        double sarc = arc_at(double(t) * s.dt);
        double u = u_at_arc(sarc);
        Vec2 pos = hermite(u);
        Vec2 tan = hermite_tangent(u);
        double heading = (tan.norm() > 1e-9) ? std::atan2(tan.y, tan.x) : prev_heading;
        out.poses.push_back({pos.x, pos.y, heading});
        out.speeds.push_back((sarc - prev_arc) / s.dt);
        prev_arc = sarc;
        prev_heading = heading;
    }
    return out;
}

CandidateSet PolicyModel::candidates(const PolicyParams& p, const Scenario& s) const {
    CandidateSet set;
    std::vector<Vec2> goals = goal_grid(s, cfg_.grid);
    set.trajectories.reserve(goals.size());
    for (Vec2 g : goals) set.trajectories.push_back(decode_trajectory(s, g));
    set.logits = score_goals(p, s);
    double lse = logsumexp(set.logits);
    set.log_probs.resize(set.logits.size());
    for (size_t i = 0; i < set.logits.size(); ++i) set.log_probs[i] = set.logits[i] - lse;
    return set;
}

std::vector<int> PolicyModel::sample_from_logits(const std::vector<double>& logits, int n,
                                                 Rng& rng) const {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    double lse = logsumexp(logits);
    std::vector<double> cdf(logits.size());
    double acc = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        acc += std::exp(logits[i] - lse);
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    std::vector<int> out(n);
    for (int k = 0; k < n; ++k) {
        double u = rng.uniform();
        out[k] = int(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }
    return out;
}

std::vector<int> PolicyModel::sample_goals(const PolicyParams& p, const Scenario& s, int n,
                                           Rng& rng) const {
    return sample_from_logits(score_goals(p, s), n, rng);
}

double PolicyModel::log_prob(const PolicyParams& p, const Scenario& s, int goal_index) const {
    std::vector<double> logits = score_goals(p, s);
    if (goal_index < 0 || goal_index >= int(logits.size()))
        throw std::invalid_argument("log_prob: goal index out of range");
    return logits[goal_index] - logsumexp(logits);
}

std::pair<double, std::vector<double>> PolicyModel::log_prob_with_grad(const PolicyParams& p,
                                                                       const Scenario& s,
                                                                       int goal_index) const {
    std::vector<double> ctx = context_features(s, cfg_.features);
    std::vector<Vec2> goals = goal_grid(s, cfg_.grid);
    if (goal_index < 0 || goal_index >= int(goals.size()))
        throw std::invalid_argument("log_prob: goal index out of range");
    std::vector<std::vector<double>> feats;
    feats.reserve(goals.size());
    for (Vec2 g : goals) feats.push_back(goal_features(s, g, cfg_.features));
    std::vector<double> logits = score_from_features(p, ctx, feats);
    double lse = logsumexp(logits);
    double lp = logits[goal_index] - lse;

    std::vector<double> grad(param_count_, 0.0);
    std::vector<double> gi;
    for (size_t j = 0; j < feats.size(); ++j) {
        double prob = std::exp(logits[j] - lse);
        double coeff = (int(j) == goal_index ? 1.0 : 0.0) - prob;
        if (std::fabs(coeff) < 1e-300) continue;
        logit_grad(p, assemble_input(ctx, feats[j]), gi);
        for (int d = 0; d < param_count_; ++d) grad[d] += coeff * gi[d];
    }
    return {lp, std::move(grad)};
}

std::vector<int> topk_indices(const std::vector<double>& scores, int k) {
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    if (k < int(idx.size())) idx.resize(k);
    return idx;
}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
    if (m.size() != params.size()) {
        m.assign(params.size(), 0.0);
        v.assign(params.size(), 0.0);
        t = 0;
    }
    ++t;
    double bc1 = 1.0 - std::pow(beta1, double(t));
    double bc2 = 1.0 - std::pow(beta2, double(t));
    for (size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

PretrainResult pretrain_imitation(const PolicyModel& model, const std::vector<Scenario>& corpus,
                                  const PretrainConfig& cfg, Rng& rng) {
    if (corpus.empty()) throw std::invalid_argument("pretrain_imitation: empty corpus");
    const PolicyConfig& pc = model.config();

    struct Sample {
        std::vector<double> ctx;
        std::vector<std::vector<double>> feats;
        int target = 0;
    };
    std::vector<Sample> samples;
    samples.reserve(corpus.size());
    for (const Scenario& s : corpus) {
        Sample smp;
        smp.ctx = context_features(s, pc.features);
        std::vector<Vec2> goals = goal_grid(s, pc.grid);
        for (Vec2 g : goals) smp.feats.push_back(goal_features(s, g, pc.features));
        const AgentRecord& adv = s.adversary();
        Pose2 frame = adv.logged.poses[s.current_index()];
        Vec2 endpoint = to_body_frame(adv.logged.poses.back().position(), frame);
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < goals.size(); ++i) {
            double d = (goals[i] - endpoint).norm();
            if (d < best) {
                best = d;
                smp.target = int(i);
            }
        }
        samples.push_back(std::move(smp));
    }

    PretrainResult result;
    result.params = model.init_params(rng, cfg.init_scale);
    Adam opt;
    opt.lr = cfg.learning_rate;

    std::vector<double> grad(model.param_count());
    std::vector<double> gi;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (const Sample& smp : samples) {
            std::vector<double> logits = model.score_from_features(result.params, smp.ctx, smp.feats);
            double lse = logsumexp(logits);
            loss_sum += -(logits[smp.target] - lse);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (size_t j = 0; j < smp.feats.size(); ++j) {
                double coeff = std::exp(logits[j] - lse) - (int(j) == smp.target ? 1.0 : 0.0);
                model.logit_grad(result.params, model.assemble_input(smp.ctx, smp.feats[j]), gi);
                for (size_t d = 0; d < grad.size(); ++d) grad[d] += coeff * gi[d];
            }
            opt.step(result.params.v, grad);
        }
        result.epoch_loss.push_back(loss_sum / double(samples.size()));
    }

    double ll = 0.0;
    int correct = 0;
    for (const Sample& smp : samples) {
        std::vector<double> logits = model.score_from_features(result.params, smp.ctx, smp.feats);
        double lse = logsumexp(logits);
        ll += logits[smp.target] - lse;
        if (topk_indices(logits, 1)[0] == smp.target) ++correct;
    }
    result.final_mean_log_likelihood = ll / double(samples.size());
    result.top1_accuracy = double(correct) / double(samples.size());
    return result;
}

namespace {
constexpr int kCheckpointSchemaVersion = 1;

json grid_to_json(const GoalGridConfig& g) {
    json j;
    j["speed_scalings"] = g.speed_scalings;
    json dirs = json::array();
    for (const auto& d : g.directions) dirs.push_back(json::array({d.bearing, d.lateral}));
    j["directions"] = std::move(dirs);
    j["min_distance"] = g.min_distance;
    return j;
}
}  // namespace

void save_checkpoint(const PolicyModel& model, const PolicyParams& params,
                     const std::string& path) {
    if (int(params.v.size()) != model.param_count())
        throw std::invalid_argument("save_checkpoint: parameter dimension mismatch");
    const PolicyConfig& pc = model.config();
    json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["kind"] = "policy_checkpoint";
    j["hidden"] = pc.hidden;
    j["features"] = {{"history_window", pc.features.history_window},
                     {"pos_scale", pc.features.pos_scale},
                     {"speed_scale", pc.features.speed_scale}};
    j["grid"] = grid_to_json(pc.grid);
    j["param_count"] = model.param_count();
    j["params"] = params.v;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
}

PolicyParams load_checkpoint(const PolicyModel& model, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("checkpoint parse error in " + path + ": " + e.what());
    }
    const PolicyConfig& pc = model.config();
    if (j.at("schema_version").get<int>() != kCheckpointSchemaVersion)
        throw std::runtime_error("checkpoint schema version mismatch: " + path);
    if (j.at("kind").get<std::string>() != "policy_checkpoint")
        throw std::runtime_error("not a policy checkpoint: " + path);
    bool meta_ok = j.at("hidden").get<int>() == pc.hidden &&
                   j.at("param_count").get<int>() == model.param_count() &&
                   j.at("features").at("history_window").get<int>() == pc.features.history_window &&
                   j.at("features").at("pos_scale").get<double>() == pc.features.pos_scale &&
                   j.at("features").at("speed_scale").get<double>() == pc.features.speed_scale &&
                   j.at("grid") == grid_to_json(pc.grid);
    if (!meta_ok) throw std::runtime_error("checkpoint metadata mismatch: " + path);
    PolicyParams p;
    p.v = j.at("params").get<std::vector<double>>();
    if (int(p.v.size()) != model.param_count())
        throw std::runtime_error("checkpoint parameter count mismatch: " + path);
    return p;
}

}  // namespace advgen
