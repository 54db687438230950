#pragma once
// Small builders shared by the test binaries.

#include "repmech/core.hpp"

#include <vector>

namespace testing_support {

using namespace repmech;

inline Agent make_agent(int id, double quality, AgentType type, double lambda, double cross_std = 0.0) {
    Agent a;
    a.id = id;
    a.quality = Quality(quality);
    a.type = type;
    a.utility.lambda = lambda;
    a.cross_obs = {0.0, cross_std};
    return a;
}

inline Agent truth(int id, double q, double sigma = 0.0) { return make_agent(id, q, AgentType::truth(), 1.0, sigma); }
inline Agent image(int id, double q, double sigma = 0.0) { return make_agent(id, q, AgentType::image(), 0.0, sigma); }
inline Agent mixed(int id, double q, double lambda, double sigma = 0.0) {
    return make_agent(id, q, AgentType::mixed(), lambda, sigma);
}

inline Environment env_of(std::vector<Agent> agents, double system_std = 0.0,
                          IndexScheme scheme = IndexScheme::Absolute) {
    Environment env;
    env.agents = std::move(agents);
    env.system_obs = {0.0, system_std};
    env.scheme = scheme;
    return env;
}

// K truth agents with common observation noise sigma on every channel.
inline Environment truth_env(const std::vector<double>& qualities, double sigma,
                             IndexScheme scheme = IndexScheme::Absolute) {
    std::vector<Agent> agents;
    for (std::size_t i = 0; i < qualities.size(); ++i) agents.push_back(truth(int(i), qualities[i], sigma));
    return env_of(agents, sigma, scheme);
}

inline std::vector<std::size_t> identity_ring(std::size_t k) {
    std::vector<std::size_t> r(k);
    for (std::size_t i = 0; i < k; ++i) r[i] = i;
    return r;
}

} // namespace testing_support
