#pragma once

#include "repmech/core.hpp"
#include "repmech/random.hpp"

namespace repmech {

/// One draw of every observation channel.
struct Observations {
    std::vector<double> system; // R_0i
    ReportMatrix cross;         // (j, i) = R_ji; empty when not sampled
};

/// Samples R_0i ~ N(r_i + b_0, s_0^2) and, if requested, R_ji ~ N(r_i + b_j, s_j^2).
/// Values are clamped to [0, 1] only when env.clamp_observations is set.
Observations sample_observations(const Environment& env, random::Engine& eng, bool with_cross);

/// Standard deviation of the aggregate (sum_{j != i} R_ji + R_0i) / K,
/// root-mean-square over agents. Equals sigma / sqrt(K) for a common sigma.
double aggregate_sigma(const Environment& env);

/// Mean and std of the aggregate about agent i (including R_0i).
numerics::NormalParams aggregate_law(const Environment& env, std::size_t i);

/// Mean and std of the weighted cross-report aggregate about agent i.
numerics::NormalParams weighted_aggregate_law(const Environment& env, std::size_t i,
                                              const std::vector<double>& weights);

} // namespace repmech
