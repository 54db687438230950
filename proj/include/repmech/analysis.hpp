#pragma once
/* Closed-form metrics: error rates, individual rationality, participation
 * thresholds in the heterogeneous truth/image setting, collusion taxes.
 */

#include "repmech/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace repmech {

/// sum_i |r_hat_i - target_i| against the centralized solution.
double mae_total(const Outcome& outcome, const Environment& env);

// ---------------------------------------------------------------------------
// Punish-reward error rates

/// MAE of simple averaging for an aggregate with std sigma': sqrt(2/pi) sigma'.
double averaging_mae(double sigma_prime);

/// e_m = E|r_hat(x*, xbar) - r| with xbar ~ N(r, sigma'^2) and x* the optimal
/// self-report. Integrates the piecewise rule exactly; independent of r.
double pr_mae(double a, double sigma_prime);

/// E[r_hat] - r at the optimal self-report.
double pr_expected_gain(double a, double sigma_prime);

/// argmin of pr_mae over [lo, hi].
double pr_optimal_a(double sigma_prime, double lo = 0.5, double hi = 5.0);

/// Grid points where E[r_hat] > r and e_m < sqrt(2/pi) sigma'.
std::vector<double> pr_mutual_benefit_region(double sigma_prime, const std::vector<double>& a_grid);

struct PrCurveRow {
    double a;
    double y;
    double e_m;
    double averaging_mae;
    double expected_reputation; // E[r_hat] at x*, with r = mu
    double baseline;            // mu
};

std::vector<PrCurveRow> pr_curve(const std::vector<double>& a_grid, double mu, double sigma_prime);

// ---------------------------------------------------------------------------
// Individual rationality and participation

/// U_in - U_out = sum_{j != i} (E f(|R_ij - r_jj|) - f(0)) for a truth agent.
double as_ir_gain(const Agent& agent, const Environment& env);

struct ParticipationReport {
    double u_in = 0.0;  // the closed form (or the exact value where none exists)
    double u_out = 0.0;
    bool participates = false; // u_in >= u_out
    double rho = 0.0;          // image users among the others, over K - 1
    double gamma = 0.0;        // truth users among the others, over K - 1

    double u_in_exact = 0.0; // equilibrium reports clamped to [0, 1]
    bool participates_exact = false;
    double u_in_simplified = 0.0;         // truth agent: -I/4, the large-K limit
    bool participates_simplified = false; // rho <= 4 sigma^2, or gamma <= 4 (1 - r)

    std::optional<double> u_in_mc; // set when Monte Carlo trials were requested
    std::optional<double> u_out_mc;
    std::optional<double> u_in_mc_stderr;
    std::optional<bool> participates_mc;
};

struct MonteCarloOptions {
    std::size_t trials = 0; // 0 skips the Monte Carlo columns
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Truth agent under AS with the others at equilibrium. The closed form
///   u_in = -(I/4)(1 - 1/(K-1)), u_out = -(K-1) sigma^2
/// applies for f = x^2 and linear image value; other families use the exact
/// equilibrium expression.
ParticipationReport hetero_truth_participation(const Environment& env, std::size_t agent,
                                               const MonteCarloOptions& mc = {});

/// Same, for the first truth agent in the environment.
ParticipationReport hetero_truth_participation(const Environment& env, const MonteCarloOptions& mc = {});

/// Image agent under AS. Closed form for linear g:
///   u_in = g(min{r + 1/2, 1}) - 1/4 + (I - 1) / (4 (K - 1)), u_out = r,
/// equivalent to r <= 1/2 or gamma <= 4 (1 - r).
ParticipationReport hetero_image_participation(const Environment& env, std::size_t agent,
                                               const MonteCarloOptions& mc = {});

struct SystemGainReport {
    double as_mae = 0.0;        // sum over image users of g'(r)/2
    double as_mae_exact = 0.0;  // sum_i |equilibrium report - r|
    double direct_mae = 0.0;    // sqrt(2/pi) K sigma_0
    bool gains = false;         // as_mae < direct_mae
    bool gains_simplified = false; // rho < 2 sqrt(2/pi) sigma_0
    double rho = 0.0;           // I / (K - 1)
};

SystemGainReport hetero_system_gain(const Environment& env);

// ---------------------------------------------------------------------------
// Collusion and weighting

/// E|x - x_pred| for a manipulated cross-report x = a R + b against an honest
/// R_pred, both observing r with std sigma: folded Normal with mean
/// (a - 1) r + b and std sigma sqrt(1 + a^2).
double collusion_expected_tax(double a, double b, Quality r_target, double sigma);

/// sum w_j^2 sigma_j^2 <= sum sigma_j^2 / n^2 for normalized weights.
bool weighted_variance_check(const std::vector<double>& weights, const std::vector<double>& sigmas);

} // namespace repmech
