#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advgen/common.hpp"

namespace advgen {

// Synthetic reward geometry: two isotropic quadratic objectives
//   R_adv(x)  = c_adv  - eta_adv/2  * |x - theta_adv|^2
//   R_real(x) = c_real - eta_real/2 * |x - theta_real|^2
struct QuadraticLandscape {
    std::vector<double> theta_adv;
    std::vector<double> theta_real;
    double eta_adv = 1.0;
    double eta_real = 1.0;
    double c_adv = 0.0;
    double c_real = 0.0;

    int dim() const { return int(theta_adv.size()); }
    double reward_adv(const std::vector<double>& x) const;
    double reward_real(const std::vector<double>& x) const;
    // mu * R_adv + (1 - mu) * R_real
    double reward_user(const std::vector<double>& x, double mu) const;
};

// Closed-form maximizers of the two opposed expert objectives with mixing
// weight beta: curvature-weighted averages of the pure optima.
std::pair<std::vector<double>, std::vector<double>> expert_optima(const QuadraticLandscape& land,
                                                                  double beta);

// Closed-form maximizer of the user objective.
std::vector<double> user_optimum(const QuadraticLandscape& land, double mu);

struct LambdaResult {
    double lam = 0.0;
    bool in_range = false;  // mu within [1-beta, beta]
};

// lam = (mu + beta - 1) / (2 beta - 1); requires beta > 0.5
LambdaResult optimal_lambda(double mu, double beta);

struct GapResult {
    double closed_form = 0.0;
    double measured = 0.0;   // grid-searched along the expert segment
    double lambda_at_max = 0.0;
};

// Equal-curvature suboptimality gap: closed form
//   eta/2 * (mu - clip(mu, 1-beta, beta))^2 * |theta_adv - theta_real|^2
// versus the lambda-grid measurement. Throws on unequal curvatures.
GapResult quadratic_gap(const QuadraticLandscape& land, double mu, double beta,
                        double grid_resolution = 1e-5);

// Grid-only measurement, valid for any curvatures.
GapResult measured_gap_grid(const QuadraticLandscape& land, double mu, double beta,
                            double grid_resolution);

struct QuadraticCheckRow {
    int dim = 0;
    double mu = 0.0, beta = 0.0;
    double closed_form = 0.0, measured = 0.0;
    double lambda_formula = 0.0, lambda_grid = 0.0;
    bool in_range = false;
};

std::vector<QuadraticCheckRow> quadratic_exactness_check(uint64_t seed, int instances,
                                                         const std::vector<int>& dims,
                                                         double grid_resolution, int workers);

// Smoothness/concavity constants known by construction.
struct BoundParams {
    double l_adv = 1.0, l_real = 1.0;
    double m_adv = 1.0, m_real = 1.0;
    double beta = 0.9;  // expert weight, in (0.5, 1]
    double mu = 0.5;    // user preference
};

// General suboptimality bound for the interpolated model:
//   max(|c1| L1, |c2| L2)^2 / (2 m_mu) * dist^2
// with c1 = (mu+beta-1)/(2beta-1), c2 = (beta-mu)/(2beta-1),
// L1 = beta L_adv + (1-beta) L_real, L2 = (1-beta) L_adv + beta L_real,
// m_mu = mu m_adv + (1-mu) m_real.
double suboptimality_bound(const BoundParams& p, double expert_dist_sq);

struct BoundTrialRow {
    int dim = 0;
    double mu = 0.0, beta = 0.0;
    double gap = 0.0, bound = 0.0, ratio = 0.0;
};

struct BoundReport {
    std::vector<BoundTrialRow> trials;
    int violations = 0;
    double max_ratio = 0.0;
};

// Random anisotropic strongly-concave quadratic instances with spectra
// clamped to [m, L]; the measured gap is exact (1D quadratic maximization).
BoundReport bound_check_general(uint64_t seed, int trials, const std::vector<int>& dims,
                                int workers);

// Scalar regression family for the weight-vs-output mixing comparison:
//   f(x_k; theta) = phi_k . theta + quad_scale/2 * (b_k . theta)^2
// quad_scale == 0 gives a model linear in its parameters.
struct ScalarModelData {
    std::vector<std::vector<double>> phi;
    std::vector<std::vector<double>> b;
    double quad_scale = 0.0;
    std::vector<double> targets;

    int samples() const { return int(phi.size()); }
    double eval(const std::vector<double>& theta, int k) const;
};

struct DecompositionRow {
    double lam = 0.0;
    double l_weight = 0.0;
    double l_ens = 0.0;
    double diff = 0.0;      // l_weight - l_ens
    double curvature = 0.0; // central second difference of l_weight (interior points)
    double approx = 0.0;    // -lam(1-lam)/2 * (curvature - mean |df|^2)
    double residual = 0.0;  // |diff - approx|
    bool interior = false;
};

struct DecompositionReport {
    std::vector<DecompositionRow> rows;
    double mean_sq_output_diff = 0.0;
    double max_abs_diff = 0.0;
    double max_residual_ratio_mid = 0.0;  // over interior rows with lam in [0.2, 0.8]
};

// Needs a uniform lambda grid with at least 3 points.
DecompositionReport mix_decomposition_check(const ScalarModelData& data,
                                            const std::vector<double>& theta1,
                                            const std::vector<double>& theta2,
                                            const std::vector<double>& lambda_grid);

void save_bound_report_csv(const BoundReport& rep, const std::string& path);
void save_quadratic_check_csv(const std::vector<QuadraticCheckRow>& rows, const std::string& path);

}  // namespace advgen
