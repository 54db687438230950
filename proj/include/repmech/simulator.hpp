#pragma once
/* Seeded Monte Carlo scenarios.
 *
 * Strategies are resolved once per scenario; observations (and random
 * reports) are redrawn every trial from the trial's own substream.
 */

#include "repmech/core.hpp"
#include "repmech/strategies.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace repmech {

enum class StrategyMode { Equilibrium, Custom };

struct ScenarioConfig {
    Environment env;
    MechanismSpec mechanism{AbsoluteScoring{}};
    StrategyMode mode = StrategyMode::Equilibrium;
    StrategyProfile profile; // Custom mode; SelfRule::Equilibrium entries are resolved
    CollusionParams collusion;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    void validate() const;
};

struct SimStats {
    double mae_mean = 0.0; // of mae_total
    double mae_stderr = 0.0;
    std::vector<double> per_agent_reputation_mean;
    std::vector<double> per_agent_utility_mean;
    std::vector<double> per_agent_tax_mean;
    std::vector<double> per_agent_report_mean;
    double budget_mean = 0.0;
    double budget_max_abs = 0.0;
    std::size_t trials = 0;
};

/// Profile actually played: the equilibrium profile, or the custom one resolved.
StrategyProfile scenario_profile(const ScenarioConfig& config);

SimStats run_trials(const ScenarioConfig& config);

enum class SweepParameter { PrA, Sigma, Rho };

std::string to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(const std::string& text);

struct SweepRow {
    double value;
    SimStats stats;
    double sigma_prime;
    // Punish-reward closed forms, filled for PrA sweeps.
    std::optional<double> y;
    std::optional<double> e_m;
    std::optional<double> expected_gain; // E[r_hat] - r at the optimal report
};

/// Copy of `config` with the swept parameter set to `value`:
///   PrA   - the punish-reward band parameter a;
///   Sigma - every observation std (system and cross);
///   Rho   - the first round(value (K - 1)) agents become image users, the rest truth users.
ScenarioConfig apply_sweep_value(const ScenarioConfig& config, SweepParameter parameter, double value);

std::vector<SweepRow> sweep(const ScenarioConfig& config, SweepParameter parameter, const std::vector<double>& grid);

// ---------------------------------------------------------------------------

struct CollusionArm {
    double clique_utility_mean = 0.0; // per clique member
    double clique_tax_mean = 0.0;     // per clique member
    double outsider_mae = 0.0;        // mean |r_hat - r| over outsiders
    double system_mae = 0.0;          // mean of mae_total
};

struct CollusionComparison {
    CollusionArm one_layer;
    CollusionArm two_layer;
    CollusionArm honest_two_layer; // same slots, everyone truthful
    std::size_t clique_size = 0;
    std::size_t trials = 0;
};

/// Extended-AS with fresh secret rings per layer per trial. Clique members
/// inflate each other (and optionally bash outsiders). `clique` holds agent
/// ids. Throws CliqueTooLarge unless at least two agents stay outside.
CollusionComparison run_collusion_scenario(const Environment& env, const std::vector<int>& clique,
                                           std::size_t trials, std::uint64_t seed, unsigned workers = 1,
                                           const CollusionParams& params = {});

struct MaliciousComparison {
    double baseline_mae = 0.0;  // env as given
    double malicious_mae = 0.0; // slots play uniform random reports
    double image_mae = 0.0;     // slots are image users
    double malicious_gross_tax = 0.0; // E (x - R_0)^2 per malicious agent
    double image_gross_tax = 0.0;
    std::size_t slots = 0;
    std::size_t trials = 0;
};

/// Absolute Scoring with the listed agent ids replaced by random reporters,
/// then by image users, on common random numbers.
MaliciousComparison run_malicious_scenario(const Environment& env, const std::vector<int>& malicious,
                                           std::size_t trials, std::uint64_t seed, unsigned workers = 1);

} // namespace repmech
