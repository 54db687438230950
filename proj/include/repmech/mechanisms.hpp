#pragma once
/* Outcome functions h: messages -> (reputations, taxes).
 *
 * Each run_* is a pure function of the message profile and the context.
 * Indices refer to positions in the message vectors (agent order).
 */

#include "repmech/core.hpp"

#include <vector>

namespace repmech {

struct MechanismContext {
    std::vector<double> system_observations; // R_0i, one per agent
    MechanismSpec spec;
    double sigma_prime = 0.0; // std of the aggregate cross-report, sigma / sqrt(K)
};

/// The punish-reward rule for one agent: average inside the closed band
/// [aggregate - eps, aggregate + eps], reflect below the aggregate outside it.
double punish_reward(double self_report, double aggregate, double eps);

/// (sum_{j != i} x_ji + R_0i) / K.
double aggregate_with_system(const ReportMatrix& cross, double system_obs, std::size_t about);

/// sum_{j != i} w_j x_ji / sum_{j != i} w_j. Throws ZeroWeightSum.
double weighted_aggregate(const ReportMatrix& cross, const std::vector<double>& weights,
                          std::size_t about);

Outcome run_as(const MessageProfile& msgs, const MechanismContext& ctx);
Outcome run_extended_as(const MessageProfile& msgs, const MechanismContext& ctx);
Outcome run_fr(const MessageProfile& msgs, const MechanismContext& ctx);
Outcome run_simple_avg(const MessageProfile& msgs, const MechanismContext& ctx);
Outcome run_pr(const MessageProfile& msgs, const MechanismContext& ctx);
Outcome run_weighted_pr(const MessageProfile& msgs, const MechanismContext& ctx);
Outcome run_direct_observation(const MechanismContext& ctx);

/// Layer-by-layer Extended-AS taxes (size 1 or 2), each summing to zero.
std::vector<std::vector<double>> extended_as_tax_layers(const MessageProfile& msgs,
                                                        const ExtendedAbsoluteScoring& spec);

/// Dispatch on ctx.spec.
Outcome run_mechanism(const MessageProfile& msgs, const MechanismContext& ctx);

} // namespace repmech
