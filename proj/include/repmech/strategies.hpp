#pragma once
/* Best responses: closed forms where they exist, the punish-reward
 * equilibrium solver, and a Monte Carlo grid oracle for everything else.
 */

#include "repmech/core.hpp"
#include "repmech/random.hpp"
#include "repmech/sampling.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace repmech {

// ---------------------------------------------------------------------------
// Strategy profiles

enum class SelfRule {
    Truthful,      // x_ii = r_ii
    Fixed,         // x_ii = value
    Offset,        // x_ii = r_ii + value
    Equilibrium,   // resolved by equilibrium_self_report
    UniformRandom, // fresh U[0, 1] draw per trial
};

enum class CrossRule {
    Truthful,      // x_ji = R_ji
    Affine,        // x_ji = scale * R_ji + shift
    UniformRandom, // fresh U[0, 1] draw per report
    Collude,       // inflate fellow clique members, optionally bash outsiders
};

struct SelfStrategy {
    SelfRule rule = SelfRule::Truthful;
    double value = 0.0;
};

struct CrossStrategy {
    CrossRule rule = CrossRule::Truthful;
    double scale = 1.0;
    double shift = 0.0;
    double inflate = 1.0;
    std::optional<double> bash;
};

struct AgentStrategy {
    SelfStrategy self;
    CrossStrategy cross;
};

using StrategyProfile = std::vector<AgentStrategy>;

/// Report levels used by colluding agents.
struct CollusionParams {
    double inflate = 1.0;
    std::optional<double> bash;
};

StrategyProfile truthful_profile(std::size_t k);

/// Equilibrium self-report of agent i under `spec`, clamped to [0, 1].
/// Throws UnsupportedCombination where no best response is implemented.
double equilibrium_self_report(const Environment& env, std::size_t i, const MechanismSpec& spec,
                               double sigma_prime);

/// Equilibrium profile for every agent, with deterministic self-reports
/// resolved to SelfRule::Fixed.
StrategyProfile equilibrium_profile(const Environment& env, const MechanismSpec& spec,
                                    double sigma_prime, const CollusionParams& collusion = {});

/// Replaces SelfRule::Equilibrium entries by their fixed values.
StrategyProfile resolve_profile(const StrategyProfile& profile, const Environment& env,
                                const MechanismSpec& spec, double sigma_prime);

/// Messages for one trial from observations and a resolved profile.
MessageProfile build_messages(const Environment& env, const StrategyProfile& profile,
                              const Observations& obs, random::Engine& eng, bool with_cross);

// ---------------------------------------------------------------------------
// Punish-reward equilibrium

struct PrEquilibrium {
    double a;
    double y;      // normalized offset, in (0, 1)
    double x_star; // mu + a * sigma' * y
};

/// Left side of the first-order condition for the optimal PR self-report in
/// the normalized offset y = (x - mu) / (a sigma'):
///   a/sqrt(2 pi) (e^{-(a(y+1))^2/2} - 3 e^{-(a(y-1))^2/2})
///     - (erf(a(y+1)/sqrt 2) + 3 erf(a(y-1)/sqrt 2)) / 2.
double pr_first_order_condition(double y, double a);

/// Root of pr_first_order_condition in (0, 1), residual <= 1e-10.
/// Throws NoRoot when the sign does not change on the interval.
double solve_y(double a);

/// E[r_hat] for self-report x when the aggregate is N(mu, sigma'^2):
///   x + (eps/2)(F(x+eps) - 3F(x-eps)) - (1/2) int_{x-eps}^{x+eps} F - 2 int_{-inf}^{x-eps} F,
/// with the integrals by quadrature (lower tail cut at 8 sigma').
double expected_pr_reputation(double x, double mu, double sigma_prime, double eps);

/// d E[r_hat] / dx = 1 + (eps/2)(f(x+eps) - 3 f(x-eps)) - (F(x+eps) + 3 F(x-eps)) / 2.
double expected_pr_reputation_slope(double x, double mu, double sigma_prime, double eps);

PrEquilibrium pr_optimal_self_report(double mu, double sigma_prime, double a);

// ---------------------------------------------------------------------------
// Absolute Scoring best responses

/// Maximizer over [0, 1] of weight * g(x) - E[(x - R_0)^2], R_0 ~ N(mean, sigma0^2):
/// solves weight * g'(x) = 2 (x - mean).
double as_self_report(const ImageValue& g, double weight, double obs_mean, double sigma0);

/// Image-type (weight 1, unbiased R_0 around r) special case: min{r + 1/2, 1} for linear g.
double image_best_response_as(const ImageValue& g, Quality r, double sigma0);

// ---------------------------------------------------------------------------
// Monte Carlo best-response oracle

enum class Decision {
    Auto,       // self-report, or cross-report shift for simple averaging
    SelfReport, // candidate self-reports on a grid over [0, 1]
    CrossShift, // candidate additive shifts of all of the agent's cross-reports
};

struct BestResponseOptions {
    std::size_t trials = 100000;
    std::size_t grid = 201;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    Decision decision = Decision::Auto;
    double shift_range = 0.5; // CrossShift grid spans [-range, range]
};

struct BestResponse {
    Decision decision;
    double argmax;                    // best grid point
    double argmax_utility;            // its Monte Carlo mean v_i
    double claimed_utility;           // mean v_i under the agent's own strategy
    double claimed_value;             // claimed point on the decision axis, when deterministic
    double gain;                      // argmax_utility - claimed_utility
    double gain_stderr;               // paired standard error of gain
    double grid_step;
    std::vector<double> grid;
    std::vector<double> mean_utility; // per grid point
};

/// Grid search of Monte Carlo expected v_i for agent `agent`, everyone else
/// playing `profile` (which must be resolved). Common random numbers across
/// candidates; deterministic in options.seed, independent of workers.
BestResponse best_response_numeric(std::size_t agent, const MechanismSpec& mechanism,
                                   const Environment& env, const StrategyProfile& profile,
                                   const BestResponseOptions& options);

// ---------------------------------------------------------------------------
// Deviation analyses

/// Utility gain of agent i from claiming quality `claimed` instead of r_ii
/// when the allocation is the centralized solution (Absolute scheme).
double bayesian_ic_violation(const Environment& env, std::size_t agent, double claimed);

/// u_i(x) - u_i(r_ii) under Fair Ranking with everyone else truthful,
/// via the closed form -sum_j f(|r_jj (x - r_ii) / ((x + S_{-i}) S)|).
double fr_deviation_loss(std::size_t deviator, double x, const Environment& env);

enum class DeviationTax { None, AbsoluteScoring };

struct DeviationProfit {
    double accuracy_loss; // -lambda * (sum f(errors) - sum f(0)); never positive
    double image_gain;    // (1 - lambda) * (g(x / (x + S_{-i})) - g(r / S))
    double tax_term;      // -(E t(x) - E t(r)); the AS-style tax gives -(x - r)^2

    double net() const { return accuracy_loss + image_gain + tax_term; }
};

/// Decomposition of a unilateral deviation under proportional allocation
/// with everyone else truthful.
DeviationProfit proportional_deviation_profit(std::size_t deviator, double x, const Environment& env,
                                              DeviationTax tax = DeviationTax::None);

} // namespace repmech
