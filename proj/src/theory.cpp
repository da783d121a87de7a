#include "advgen/theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advgen/csv.hpp"
#include "advgen/parallel.hpp"

namespace advgen {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

std::vector<double> lerp(const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - t) * a[i] + t * b[i];
    return out;
}

}  // namespace

double QuadraticLandscape::reward_adv(const std::vector<double>& x) const {
    return c_adv - 0.5 * eta_adv * sq_dist(x, theta_adv);
}

double QuadraticLandscape::reward_real(const std::vector<double>& x) const {
    return c_real - 0.5 * eta_real * sq_dist(x, theta_real);
}

double QuadraticLandscape::reward_user(const std::vector<double>& x, double mu) const {
    return mu * reward_adv(x) + (1.0 - mu) * reward_real(x);
}

namespace {

// curvature-weighted average of the pure optima
std::vector<double> weighted_optimum(const QuadraticLandscape& land, double w_adv, double w_real) {
    double ka = w_adv * land.eta_adv, kr = w_real * land.eta_real;
    double denom = ka + kr;
    if (denom <= 0.0) throw std::invalid_argument("weighted_optimum: degenerate weights");
    std::vector<double> out(land.theta_adv.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = (ka * land.theta_adv[i] + kr * land.theta_real[i]) / denom;
    return out;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> expert_optima(const QuadraticLandscape& land,
                                                                  double beta) {
    return {weighted_optimum(land, beta, 1.0 - beta), weighted_optimum(land, 1.0 - beta, beta)};
}

std::vector<double> user_optimum(const QuadraticLandscape& land, double mu) {
    return weighted_optimum(land, mu, 1.0 - mu);
}

LambdaResult optimal_lambda(double mu, double beta) {
    if (!(beta > 0.5)) throw std::invalid_argument("optimal_lambda: beta must exceed 0.5");
    LambdaResult out;
    out.lam = (mu + beta - 1.0) / (2.0 * beta - 1.0);
    out.in_range = (mu >= 1.0 - beta) && (mu <= beta);
    return out;
}

GapResult measured_gap_grid(const QuadraticLandscape& land, double mu, double beta,
                            double grid_resolution) {
    auto [theta1, theta2] = expert_optima(land, beta);
    std::vector<double> opt = user_optimum(land, mu);
    double best = -std::numeric_limits<double>::infinity();
    double best_lam = 0.0;
    long n = long(std::llround(1.0 / grid_resolution));
    for (long k = 0; k <= n; ++k) {
        double lam = double(k) / double(n);
        double r = land.reward_user(lerp(theta2, theta1, lam), mu);
        if (r > best) {
            best = r;
            best_lam = lam;
        }
    }
    GapResult out;
    out.measured = land.reward_user(opt, mu) - best;
    out.lambda_at_max = best_lam;
    return out;
}

GapResult quadratic_gap(const QuadraticLandscape& land, double mu, double beta,
                        double grid_resolution) {
    if (land.eta_adv != land.eta_real)
        throw std::invalid_argument("quadratic_gap: curvatures must be equal (use measured_gap_grid)");
    GapResult out = measured_gap_grid(land, mu, beta, grid_resolution);
    double clipped = std::clamp(mu, 1.0 - beta, beta);
    double residual = mu - clipped;
    out.closed_form =
        0.5 * land.eta_adv * residual * residual * sq_dist(land.theta_adv, land.theta_real);
    return out;
}

std::vector<QuadraticCheckRow> quadratic_exactness_check(uint64_t seed, int instances,
                                                         const std::vector<int>& dims,
                                                         double grid_resolution, int workers) {
    std::vector<QuadraticCheckRow> rows(instances);
    parallel_for(instances, workers, [&](int i) {
        Rng rng(seed_for(seed, "quad-check", uint64_t(i)));
        QuadraticLandscape land;
        int d = dims[size_t(i) % dims.size()];
        land.eta_adv = land.eta_real = rng.uniform(0.2, 4.0);
        land.c_adv = rng.uniform(-1.0, 1.0);
        land.c_real = rng.uniform(-1.0, 1.0);
        land.theta_adv.resize(d);
        land.theta_real.resize(d);
        for (int k = 0; k < d; ++k) {
            land.theta_adv[k] = rng.normal(0.0, 2.0);
            land.theta_real[k] = rng.normal(0.0, 2.0);
        }
        double beta = rng.uniform(0.55, 0.99);
        double mu = rng.uniform(0.0, 1.0);
        GapResult gap = quadratic_gap(land, mu, beta, grid_resolution);
        QuadraticCheckRow row;
        row.dim = d;
        row.mu = mu;
        row.beta = beta;
        row.closed_form = gap.closed_form;
        row.measured = gap.measured;
        row.lambda_grid = gap.lambda_at_max;
        LambdaResult lr = optimal_lambda(mu, beta);
        row.lambda_formula = lr.lam;
        row.in_range = lr.in_range;
        rows[i] = row;
    });
    return rows;
}

double suboptimality_bound(const BoundParams& p, double expert_dist_sq) {
    if (!(p.beta > 0.5)) throw std::invalid_argument("suboptimality_bound: beta must exceed 0.5");
    double denom = 2.0 * p.beta - 1.0;
    double c1 = (p.mu + p.beta - 1.0) / denom;
    double c2 = (p.beta - p.mu) / denom;
    double l1 = p.beta * p.l_adv + (1.0 - p.beta) * p.l_real;
    double l2 = (1.0 - p.beta) * p.l_adv + p.beta * p.l_real;
    double m_mu = p.mu * p.m_adv + (1.0 - p.mu) * p.m_real;
    double lead = std::max(std::fabs(c1) * l1, std::fabs(c2) * l2);
    return lead * lead / (2.0 * m_mu) * expert_dist_sq;
}

BoundReport bound_check_general(uint64_t seed, int trials, const std::vector<int>& dims,
                                int workers) {
    std::vector<BoundTrialRow> rows(trials);
    parallel_for(trials, workers, [&](int i) {
        Rng rng(seed_for(seed, "bound-check", uint64_t(i)));
        int d = dims[size_t(i) % dims.size()];

        // random SPD matrices with spectra inside [m, L] by construction
        auto random_spd = [&](double m, double l) {
            Eigen::MatrixXd g(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) g(r, c) = rng.normal();
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
            Eigen::MatrixXd q = qr.householderQ();
            Eigen::VectorXd eigs(d);
            for (int k = 0; k < d; ++k) eigs(k) = rng.uniform(m, l);
            return Eigen::MatrixXd(q * eigs.asDiagonal() * q.transpose());
        };

        BoundParams bp;
        bp.m_adv = rng.uniform(0.3, 1.0);
        bp.l_adv = bp.m_adv * rng.uniform(1.0, 8.0);
        bp.m_real = rng.uniform(0.3, 1.0);
        bp.l_real = bp.m_real * rng.uniform(1.0, 8.0);
        bp.beta = rng.uniform(0.55, 1.0);
        bp.mu = rng.uniform(0.0, 1.0);

        Eigen::MatrixXd a_adv = random_spd(bp.m_adv, bp.l_adv);
        Eigen::MatrixXd a_real = random_spd(bp.m_real, bp.l_real);
        Eigen::VectorXd t_adv(d), t_real(d);
        for (int k = 0; k < d; ++k) {
            t_adv(k) = rng.normal(0.0, 2.0);
            t_real(k) = rng.normal(0.0, 2.0);
        }

        auto argmax_mixed = [&](double w_adv, double w_real) {
            Eigen::MatrixXd h = w_adv * a_adv + w_real * a_real;
            Eigen::VectorXd rhs = w_adv * a_adv * t_adv + w_real * a_real * t_real;
            return Eigen::VectorXd(h.ldlt().solve(rhs));
        };
        auto reward_user = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd da = x - t_adv, dr = x - t_real;
            double r_adv = -0.5 * da.dot(a_adv * da);
            double r_real = -0.5 * dr.dot(a_real * dr);
            return bp.mu * r_adv + (1.0 - bp.mu) * r_real;
        };

        Eigen::VectorXd theta1 = argmax_mixed(bp.beta, 1.0 - bp.beta);
        Eigen::VectorXd theta2 = argmax_mixed(1.0 - bp.beta, bp.beta);
        Eigen::VectorXd opt = argmax_mixed(bp.mu, 1.0 - bp.mu);

        // exact segment maximum: the restriction to the segment is a
        // concave 1D quadratic
        double f0 = reward_user(theta2);
        double f1 = reward_user(theta1);
        double fm = reward_user(0.5 * (theta1 + theta2));
        double a2 = 2.0 * (f1 + f0 - 2.0 * fm);  // curvature coefficient
        double b1 = f1 - f0 - a2;
        double best = std::max(f0, f1);
        if (a2 < 0.0) {
            double vertex = -b1 / (2.0 * a2);
            if (vertex > 0.0 && vertex < 1.0) {
                double fv = f0 + b1 * vertex + a2 * vertex * vertex;
                best = std::max(best, fv);
            }
        }
        double gap = reward_user(opt) - best;
        double bound = suboptimality_bound(bp, (theta2 - theta1).squaredNorm());

        BoundTrialRow row;
        row.dim = d;
        row.mu = bp.mu;
        row.beta = bp.beta;
        row.gap = gap;
        row.bound = bound;
        row.ratio = bound > 0.0 ? gap / bound : 0.0;
        rows[i] = row;
    });

    BoundReport rep;
    rep.trials = std::move(rows);
    for (const auto& row : rep.trials) {
        if (row.gap > row.bound * (1.0 + 1e-9) + 1e-12) rep.violations += 1;
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    }
    return rep;
}

double ScalarModelData::eval(const std::vector<double>& theta, int k) const {
    double lin = dot(phi[k], theta);
    if (quad_scale == 0.0 || b.empty()) return lin;
    double q = dot(b[k], theta);
    return lin + 0.5 * quad_scale * q * q;
}

DecompositionReport mix_decomposition_check(const ScalarModelData& data,
                                            const std::vector<double>& theta1,
                                            const std::vector<double>& theta2,
                                            const std::vector<double>& lambda_grid) {
    if (lambda_grid.size() < 3)
        throw std::invalid_argument("mix_decomposition_check: need at least 3 grid points");
    int n = data.samples();
    if (n == 0) throw std::invalid_argument("mix_decomposition_check: empty data");

    std::vector<double> f1(n), f2(n);
    double mean_sq_df = 0.0;
    for (int k = 0; k < n; ++k) {
        f1[k] = data.eval(theta1, k);
        f2[k] = data.eval(theta2, k);
        double df = f2[k] - f1[k];
        mean_sq_df += df * df;
    }
    mean_sq_df /= double(n);

    size_t g = lambda_grid.size();
    std::vector<double> l_weight(g), l_ens(g);
    for (size_t i = 0; i < g; ++i) {
        double lam = lambda_grid[i];
        std::vector<double> theta(theta1.size());
        for (size_t j = 0; j < theta.size(); ++j)
            theta[j] = (1.0 - lam) * theta1[j] + lam * theta2[j];
        double lw = 0.0, le = 0.0;
        for (int k = 0; k < n; ++k) {
            double fw = data.eval(theta, k);
            double fe = (1.0 - lam) * f1[k] + lam * f2[k];
            lw += 0.5 * (fw - data.targets[k]) * (fw - data.targets[k]);
            le += 0.5 * (fe - data.targets[k]) * (fe - data.targets[k]);
        }
        l_weight[i] = lw / double(n);
        l_ens[i] = le / double(n);
    }

    DecompositionReport rep;
    rep.mean_sq_output_diff = mean_sq_df;
    double h = lambda_grid[1] - lambda_grid[0];
    for (size_t i = 0; i < g; ++i) {
        DecompositionRow row;
        row.lam = lambda_grid[i];
        row.l_weight = l_weight[i];
        row.l_ens = l_ens[i];
        row.diff = l_weight[i] - l_ens[i];
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::fabs(row.diff));
        if (i > 0 && i + 1 < g) {
            row.interior = true;
            row.curvature = (l_weight[i + 1] - 2.0 * l_weight[i] + l_weight[i - 1]) / (h * h);
            row.approx = -0.5 * row.lam * (1.0 - row.lam) * (row.curvature - mean_sq_df);
            row.residual = std::fabs(row.diff - row.approx);
            if (row.lam >= 0.2 - 1e-12 && row.lam <= 0.8 + 1e-12) {
                double denom = std::fabs(row.diff);
                double ratio = denom > 1e-15 ? row.residual / denom : 0.0;
                rep.max_residual_ratio_mid = std::max(rep.max_residual_ratio_mid, ratio);
            }
        }
        rep.rows.push_back(row);
    }
    return rep;
}

void save_bound_report_csv(const BoundReport& rep, const std::string& path) {
    CsvWriter csv(path);
    csv.row({"dim", "mu", "beta", "gap", "bound", "ratio"});
    for (const auto& r : rep.trials) {
        csv.row({CsvWriter::cell(r.dim), CsvWriter::cell(r.mu), CsvWriter::cell(r.beta),
                 CsvWriter::cell(r.gap), CsvWriter::cell(r.bound), CsvWriter::cell(r.ratio)});
    }
}

void save_quadratic_check_csv(const std::vector<QuadraticCheckRow>& rows,
                              const std::string& path) {
    CsvWriter csv(path);
    csv.row({"dim", "mu", "beta", "closed_form", "measured", "lambda_formula", "lambda_grid",
             "in_range"});
    for (const auto& r : rows) {
        csv.row({CsvWriter::cell(r.dim), CsvWriter::cell(r.mu), CsvWriter::cell(r.beta),
                 CsvWriter::cell(r.closed_form), CsvWriter::cell(r.measured),
                 CsvWriter::cell(r.lambda_formula), CsvWriter::cell(r.lambda_grid),
                 CsvWriter::cell(int(r.in_range))});
    }
}

}  // namespace advgen
