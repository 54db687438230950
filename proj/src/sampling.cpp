#include "repmech/sampling.hpp"

#include "repmech/error.hpp"

#include <algorithm>
#include <cmath>

namespace repmech {

namespace {

double maybe_clamp(double v, bool clamp) { return clamp ? std::clamp(v, 0.0, 1.0) : v; }

} // namespace

Observations sample_observations(const Environment& env, random::Engine& eng, bool with_cross) {
    const std::size_t k = env.size();
    Observations obs;
    obs.system.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto law = env.system_obs.around(env.agents[i].quality);
        obs.system[i] = maybe_clamp(random::normal(eng, law.mean, law.std), env.clamp_observations);
    }
    if (with_cross) {
        obs.cross = ReportMatrix(k);
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < k; ++i) {
                if (i == j) continue;
                const auto law = env.agents[j].cross_obs.around(env.agents[i].quality);
                obs.cross(j, i) = maybe_clamp(random::normal(eng, law.mean, law.std), env.clamp_observations);
            }
        }
    }
    return obs;
}

numerics::NormalParams aggregate_law(const Environment& env, std::size_t i) {
    const std::size_t k = env.size();
    double mean = env.agents[i].quality + env.system_obs.bias;
    double var = env.system_obs.std * env.system_obs.std;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        mean += env.agents[i].quality + env.agents[j].cross_obs.bias;
        var += env.agents[j].cross_obs.std * env.agents[j].cross_obs.std;
    }
    return {mean / double(k), std::sqrt(var) / double(k)};
}

numerics::NormalParams weighted_aggregate_law(const Environment& env, std::size_t i,
                                              const std::vector<double>& weights) {
    const std::size_t k = env.size();
    if (weights.size() != k) throw Error(ErrorKind::DimensionMismatch, "one weight per reporter");
    double sw = 0.0, mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        const auto& obs = env.agents[j].cross_obs;
        sw += weights[j];
        mean += weights[j] * (env.agents[i].quality + obs.bias);
        var += weights[j] * weights[j] * obs.std * obs.std;
    }
    if (!(sw > 0.0)) throw Error(ErrorKind::ZeroWeightSum, "no positive weight among reporters");
    return {mean / sw, std::sqrt(var) / sw};
}

double aggregate_sigma(const Environment& env) {
    double sum = 0.0;
    for (std::size_t i = 0; i < env.size(); ++i) {
        const double s = aggregate_law(env, i).std;
        sum += s * s;
    }
    return std::sqrt(sum / double(env.size()));
}

} // namespace repmech
