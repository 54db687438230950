#include "repmech/core.hpp"

#include "repmech/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace repmech {

Quality::Quality(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        std::ostringstream msg;
        msg << "quality " << value << " outside [0, 1]";
        throw Error(ErrorKind::InvalidArgument, msg.str());
    }
}

double UtilitySpec::loss(double abs_error) const {
    if (f.p == 1.0) return abs_error;
    if (f.p == 2.0) return abs_error * abs_error;
    return std::pow(abs_error, f.p);
}

double UtilitySpec::image(double reputation) const {
    if (std::holds_alternative<LinearImage>(g)) return reputation;
    const double q = std::get<PowerImage>(g).q;
    return reputation <= 0.0 ? 0.0 : std::pow(reputation, q);
}

double UtilitySpec::image_slope(double reputation) const {
    if (std::holds_alternative<LinearImage>(g)) return 1.0;
    const double q = std::get<PowerImage>(g).q;
    if (reputation <= 0.0) return std::numeric_limits<double>::infinity();
    return q * std::pow(reputation, q - 1.0);
}

void UtilitySpec::validate() const {
    if (!(f.p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "AbsPower exponent must be >= 1");
    if (auto* pw = std::get_if<PowerImage>(&g); pw && !(pw->q > 0.0 && pw->q <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "Power image exponent must lie in (0, 1]");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1]");
    }
}

std::string to_string(AgentKind kind) {
    switch (kind) {
    case AgentKind::Truth: return "truth";
    case AgentKind::Image: return "image";
    case AgentKind::Mixed: return "mixed";
    case AgentKind::MaliciousRandom: return "malicious";
    case AgentKind::Colluder: return "colluder";
    }
    return "unknown";
}

std::optional<AgentKind> parse_agent_kind(const std::string& text) {
    if (text == "truth") return AgentKind::Truth;
    if (text == "image") return AgentKind::Image;
    if (text == "mixed") return AgentKind::Mixed;
    if (text == "malicious") return AgentKind::MaliciousRandom;
    if (text == "colluder") return AgentKind::Colluder;
    return std::nullopt;
}

std::vector<double> Environment::truths() const {
    std::vector<double> out;
    out.reserve(agents.size());
    for (const auto& a : agents) out.push_back(a.quality.value());
    return out;
}

void Environment::validate() const {
    if (agents.size() < 2) {
        throw Error(ErrorKind::TooFewAgents, "an environment needs K >= 2 agents, got " +
                                                 std::to_string(agents.size()));
    }
    std::set<int> ids;
    for (const auto& a : agents) {
        if (!ids.insert(a.id).second) {
            throw Error(ErrorKind::InvalidArgument, "duplicate agent id " + std::to_string(a.id));
        }
        a.utility.validate();
        const double lambda = a.utility.lambda;
        const bool ok = [&] {
            switch (a.type.kind) {
            case AgentKind::Truth: return lambda == 1.0;
            case AgentKind::Image: return lambda == 0.0;
            case AgentKind::Mixed: return lambda > 0.0 && lambda < 1.0;
            default: return true;
            }
        }();
        if (!ok) {
            throw Error(ErrorKind::InvalidArgument,
                        "agent " + std::to_string(a.id) + ": type " + to_string(a.type.kind) +
                            " disagrees with lambda " + std::to_string(lambda));
        }
        if (a.cross_obs.std < 0.0) {
            throw Error(ErrorKind::InvalidArgument, "negative observation std");
        }
    }
    if (system_obs.std < 0.0) throw Error(ErrorKind::InvalidArgument, "negative system std");
    if (scheme == IndexScheme::Relative) {
        const auto t = truths();
        if (std::accumulate(t.begin(), t.end(), 0.0) <= 0.0) {
            throw Error(ErrorKind::ZeroTotalQuality, "relative scheme requires sum r_kk > 0");
        }
    }
}

double Outcome::budget() const {
    // Neumaier summation; budgets are checked against 1e-12.
    double sum = 0.0, comp = 0.0;
    for (double t : taxes) {
        const double s = sum + t;
        comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
        sum = s;
    }
    return sum + comp;
}

std::string mechanism_name(const MechanismSpec& spec) {
    struct Visitor {
        std::string operator()(const AbsoluteScoring&) const { return "as"; }
        std::string operator()(const ExtendedAbsoluteScoring&) const { return "extended_as"; }
        std::string operator()(const FairRanking&) const { return "fr"; }
        std::string operator()(const SimpleAveraging&) const { return "simple_averaging"; }
        std::string operator()(const PunishReward&) const { return "pr"; }
        std::string operator()(const WeightedPunishReward&) const { return "weighted_pr"; }
        std::string operator()(const DirectObservation&) const { return "direct"; }
    };
    return std::visit(Visitor{}, spec);
}

namespace {

void check_ring(const std::vector<std::size_t>& ring, std::size_t k, const char* what) {
    if (ring.size() != k) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string(what) + " must list all " + std::to_string(k) + " agents");
    }
    std::vector<bool> seen(k, false);
    for (std::size_t v : ring) {
        if (v >= k || seen[v]) throw Error(ErrorKind::InvalidArgument, std::string(what) + " is not a permutation");
        seen[v] = true;
    }
}

} // namespace

void validate_mechanism(const MechanismSpec& spec, std::size_t k) {
    if (const auto* ext = std::get_if<ExtendedAbsoluteScoring>(&spec)) {
        if (k < 3) throw Error(ErrorKind::TooFewAgents, "extended AS requires K >= 3");
        if (ext->layers != 1 && ext->layers != 2) {
            throw Error(ErrorKind::InvalidArgument, "extended AS supports 1 or 2 tax layers");
        }
        check_ring(ext->ring, k, "ring");
        if (ext->second_ring) check_ring(*ext->second_ring, k, "second ring");
    } else if (const auto* pr = std::get_if<PunishReward>(&spec)) {
        if (!(pr->a > 0.0)) throw Error(ErrorKind::InvalidArgument, "PR band parameter a must be > 0");
    } else if (const auto* wpr = std::get_if<WeightedPunishReward>(&spec)) {
        if (!(wpr->a > 0.0)) throw Error(ErrorKind::InvalidArgument, "PR band parameter a must be > 0");
        if (wpr->weights.size() != k) {
            throw Error(ErrorKind::DimensionMismatch, "weighted PR needs one weight per agent");
        }
        if (std::any_of(wpr->weights.begin(), wpr->weights.end(), [](double w) { return !(w >= 0.0); })) {
            throw Error(ErrorKind::InvalidArgument, "weights must be nonnegative");
        }
        if (std::all_of(wpr->weights.begin(), wpr->weights.end(), [](double w) { return w == 0.0; })) {
            throw Error(ErrorKind::ZeroWeightSum, "weights are all zero");
        }
    } else if (std::holds_alternative<AbsoluteScoring>(spec)) {
        if (k < 2) throw Error(ErrorKind::TooFewAgents, "AS requires K >= 2");
    }
}

bool uses_cross_reports(const MechanismSpec& spec) {
    return std::holds_alternative<ExtendedAbsoluteScoring>(spec) ||
           std::holds_alternative<SimpleAveraging>(spec) ||
           std::holds_alternative<PunishReward>(spec) ||
           std::holds_alternative<WeightedPunishReward>(spec);
}

std::vector<double> centralized_solution(const Environment& env) {
    std::vector<double> target = env.truths();
    if (env.scheme == IndexScheme::Relative) {
        const double total = std::accumulate(target.begin(), target.end(), 0.0);
        if (!(total > 0.0)) throw Error(ErrorKind::ZeroTotalQuality, "sum of true qualities is zero");
        for (double& v : target) v /= total;
    }
    return target;
}

double true_utility(std::size_t index, const Outcome& outcome, const Environment& env) {
    const std::size_t k = env.size();
    if (outcome.reputations.size() != k || outcome.taxes.size() != k || index >= k) {
        throw Error(ErrorKind::DimensionMismatch, "outcome does not match the environment");
    }
    const auto target = centralized_solution(env);
    const UtilitySpec& u = env.agents[index].utility;
    double accuracy = 0.0;
    if (u.lambda > 0.0) {
        for (std::size_t j = 0; j < k; ++j) {
            if (j != index) accuracy += u.loss(std::abs(outcome.reputations[j] - target[j]));
        }
    }
    double value = -u.lambda * accuracy - outcome.taxes[index];
    if (u.lambda < 1.0) value += (1.0 - u.lambda) * u.image(outcome.reputations[index]);
    return value;
}

std::size_t index_of(const Environment& env, int agent_id) {
    for (std::size_t i = 0; i < env.agents.size(); ++i) {
        if (env.agents[i].id == agent_id) return i;
    }
    throw Error(ErrorKind::InvalidArgument, "no agent with id " + std::to_string(agent_id));
}

double true_utility(const Agent& agent, const Outcome& outcome, const Environment& env) {
    return true_utility(index_of(env, agent.id), outcome, env);
}

} // namespace repmech
