#pragma once
/* Domain types: agents, observation channels, message profiles, mechanism
 * specifications and outcomes. All types are plain values.
 */

#include "repmech/numerics.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace repmech {

/// True quality r_ii, validated to [0, 1].
class Quality {
public:
    Quality() = default;
    explicit Quality(double value);

    double value() const noexcept { return value_; }
    operator double() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

/// f(x) = |x|^p, p >= 1. f(0) = 0.
struct AbsPower {
    double p = 2.0;
};

struct LinearImage {};

/// g(x) = x^q on x >= 0, q in (0, 1]; negative reputations are valued as 0.
struct PowerImage {
    double q = 0.5;
};

using AccuracyLoss = AbsPower;
using ImageValue = std::variant<LinearImage, PowerImage>;

/// u = -lambda * sum_j f(|err_j|) + (1 - lambda) * g(own reputation).
struct UtilitySpec {
    AccuracyLoss f{};
    ImageValue g{LinearImage{}};
    double lambda = 1.0;

    double loss(double abs_error) const;
    double image(double reputation) const;
    double image_slope(double reputation) const;
    bool image_is_linear() const noexcept { return std::holds_alternative<LinearImage>(g); }

    void validate() const;
};

enum class AgentKind { Truth, Image, Mixed, MaliciousRandom, Colluder };

struct AgentType {
    AgentKind kind = AgentKind::Truth;
    int clique_id = -1; // meaningful for Colluder only

    static AgentType truth() { return {AgentKind::Truth, -1}; }
    static AgentType image() { return {AgentKind::Image, -1}; }
    static AgentType mixed() { return {AgentKind::Mixed, -1}; }
    static AgentType malicious() { return {AgentKind::MaliciousRandom, -1}; }
    static AgentType colluder(int clique) { return {AgentKind::Colluder, clique}; }

    friend bool operator==(const AgentType&, const AgentType&) = default;
};

std::string to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(const std::string& text);

/// Normal perception channel: an observation of quality r is N(r + bias, std^2).
struct ObservationModel {
    double bias = 0.0;
    double std = 0.0;

    numerics::NormalParams around(double truth) const { return {truth + bias, std}; }
};

struct Agent {
    int id = 0;
    Quality quality;
    AgentType type;
    UtilitySpec utility;
    ObservationModel cross_obs; // how this agent perceives others
};

enum class IndexScheme { Absolute, Relative };

struct Environment {
    std::vector<Agent> agents;
    ObservationModel system_obs;
    IndexScheme scheme = IndexScheme::Absolute;
    bool clamp_observations = false;

    std::size_t size() const noexcept { return agents.size(); }
    std::vector<double> truths() const;

    /// Throws on K < 2, duplicate ids, type/lambda disagreement, or a
    /// Relative scheme with zero total quality.
    void validate() const;
};

/// Dense row-major K x K matrix; entry (j, i) is j's report about i.
class ReportMatrix {
public:
    ReportMatrix() = default;
    explicit ReportMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t from, std::size_t about) { return data_[from * n_ + about]; }
    double operator()(std::size_t from, std::size_t about) const { return data_[from * n_ + about]; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct MessageProfile {
    std::vector<double> self_reports;
    std::optional<ReportMatrix> cross_reports;
};

struct Outcome {
    std::vector<double> reputations;
    std::vector<double> taxes;

    double budget() const;
};

/// Absolute Scoring: reputations are self-reports, taxed against R_0.
struct AbsoluteScoring {};

/// Ring-validated Absolute Scoring. `ring` lists agent indices in ring order
/// (ring[k] is followed by ring[k + 1]). Layer 2, when enabled, uses
/// `second_ring` if given and `ring` otherwise.
struct ExtendedAbsoluteScoring {
    std::vector<std::size_t> ring;
    int layers = 1;
    std::optional<std::vector<std::size_t>> second_ring;
};

struct FairRanking {};
struct SimpleAveraging {};

/// Punish-reward with band half-width eps = a * sigma'.
struct PunishReward {
    double a = 1.7;
};

/// Punish-reward over a weighted mean of cross-reports. weights[j] is the
/// weight of reporter j.
struct WeightedPunishReward {
    double a = 1.7;
    std::vector<double> weights;
};

struct DirectObservation {};

using MechanismSpec = std::variant<AbsoluteScoring, ExtendedAbsoluteScoring, FairRanking,
                                   SimpleAveraging, PunishReward, WeightedPunishReward,
                                   DirectObservation>;

std::string mechanism_name(const MechanismSpec& spec);

/// Throws InvalidArgument when the spec is inconsistent with K agents.
void validate_mechanism(const MechanismSpec& spec, std::size_t agent_count);

/// Whether the mechanism reads cross-reports.
bool uses_cross_reports(const MechanismSpec& spec);

/// Ideal index vector: r_ii (Absolute) or r_ii / sum r_kk (Relative).
std::vector<double> centralized_solution(const Environment& env);

/// Aggregate utility v_i = u_i - t_i of agent `index` for a given outcome.
double true_utility(std::size_t index, const Outcome& outcome, const Environment& env);

/// Convenience overload locating the agent by id.
double true_utility(const Agent& agent, const Outcome& outcome, const Environment& env);

std::size_t index_of(const Environment& env, int agent_id);

} // namespace repmech
