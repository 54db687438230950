#include "repmech/simulator.hpp"

#include "repmech/analysis.hpp"
#include "repmech/error.hpp"
#include "repmech/mechanisms.hpp"
#include "repmech/random.hpp"
#include "repmech/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace repmech {

void ScenarioConfig::validate() const {
    env.validate();
    validate_mechanism(mechanism, env.size());
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    if (mode == StrategyMode::Custom && profile.size() != env.size()) {
        throw Error(ErrorKind::DimensionMismatch, "custom profile needs one strategy per agent");
    }
}

StrategyProfile scenario_profile(const ScenarioConfig& config) {
    const double sp = aggregate_sigma(config.env);
    if (config.mode == StrategyMode::Equilibrium) {
        return equilibrium_profile(config.env, config.mechanism, sp, config.collusion);
    }
    return resolve_profile(config.profile, config.env, config.mechanism, sp);
}

namespace {

struct TrialAcc {
    double mae = 0.0;
    double mae_sq = 0.0;
    double budget = 0.0;
    double budget_max_abs = 0.0;
    std::vector<double> reputation, utility, tax, report;

    explicit TrialAcc(std::size_t k) : reputation(k, 0.0), utility(k, 0.0), tax(k, 0.0), report(k, 0.0) {}
};

void add_into(std::vector<double>& total, const std::vector<double>& part) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
}

std::vector<double> scaled(std::vector<double> v, double n) {
    for (double& x : v) x /= n;
    return v;
}

} // namespace

SimStats run_trials(const ScenarioConfig& config) {
    config.validate();
    const Environment& env = config.env;
    const std::size_t k = env.size();
    const StrategyProfile profile = scenario_profile(config);
    const double sp = aggregate_sigma(env);
    const bool with_cross = uses_cross_reports(config.mechanism);

    const auto trial = [&](std::size_t t, TrialAcc& acc) {
        random::Engine eng = random::make_engine(config.seed, t);
        const Observations obs = sample_observations(env, eng, with_cross);
        const MessageProfile msgs = build_messages(env, profile, obs, eng, with_cross);
        const Outcome out = run_mechanism(msgs, MechanismContext{obs.system, config.mechanism, sp});
        const double mae = mae_total(out, env);
        acc.mae += mae;
        acc.mae_sq += mae * mae;
        const double budget = out.budget();
        acc.budget += budget;
        acc.budget_max_abs = std::max(acc.budget_max_abs, std::abs(budget));
        for (std::size_t i = 0; i < k; ++i) {
            acc.reputation[i] += out.reputations[i];
            acc.utility[i] += true_utility(i, out, env);
            acc.tax[i] += out.taxes[i];
            acc.report[i] += msgs.self_reports[i];
        }
    };
    const auto merge = [](TrialAcc& total, const TrialAcc& part) {
        total.mae += part.mae;
        total.mae_sq += part.mae_sq;
        total.budget += part.budget;
        total.budget_max_abs = std::max(total.budget_max_abs, part.budget_max_abs);
        add_into(total.reputation, part.reputation);
        add_into(total.utility, part.utility);
        add_into(total.tax, part.tax);
        add_into(total.report, part.report);
    };
    const TrialAcc acc = random::run_blocked(config.trials, config.workers, TrialAcc(k), trial, merge);

    const double n = double(config.trials);
    SimStats s;
    s.trials = config.trials;
    s.mae_mean = acc.mae / n;
    const double var = n > 1 ? std::max(0.0, (acc.mae_sq / n - s.mae_mean * s.mae_mean) * n / (n - 1.0)) : 0.0;
    s.mae_stderr = std::sqrt(var / n);
    s.per_agent_reputation_mean = scaled(acc.reputation, n);
    s.per_agent_utility_mean = scaled(acc.utility, n);
    s.per_agent_tax_mean = scaled(acc.tax, n);
    s.per_agent_report_mean = scaled(acc.report, n);
    s.budget_mean = acc.budget / n;
    s.budget_max_abs = acc.budget_max_abs;
    return s;
}

// ---------------------------------------------------------------------------

std::string to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::PrA: return "pr-a";
    case SweepParameter::Sigma: return "sigma";
    case SweepParameter::Rho: return "rho";
    }
    return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(const std::string& text) {
    if (text == "pr-a" || text == "a") return SweepParameter::PrA;
    if (text == "sigma") return SweepParameter::Sigma;
    if (text == "rho") return SweepParameter::Rho;
    return std::nullopt;
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& config, SweepParameter parameter, double value) {
    ScenarioConfig out = config;
    switch (parameter) {
    case SweepParameter::PrA:
        if (auto* pr = std::get_if<PunishReward>(&out.mechanism)) pr->a = value;
        else if (auto* wpr = std::get_if<WeightedPunishReward>(&out.mechanism)) wpr->a = value;
        else throw Error(ErrorKind::InvalidArgument, "sweeping a needs a punish-reward mechanism");
        break;
    case SweepParameter::Sigma:
        if (value < 0.0) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
        out.env.system_obs.std = value;
        for (Agent& a : out.env.agents) a.cross_obs.std = value;
        break;
    case SweepParameter::Rho: {
        const std::size_t k = out.env.size();
        const double count = std::round(value * double(k - 1));
        if (count < 0.0 || count > double(k)) throw Error(ErrorKind::InvalidArgument, "rho out of range");
        for (std::size_t j = 0; j < k; ++j) {
            Agent& a = out.env.agents[j];
            const bool image = double(j) < count;
            a.type = image ? AgentType::image() : AgentType::truth();
            a.utility.lambda = image ? 0.0 : 1.0;
        }
        break;
    }
    }
    return out;
}

std::vector<SweepRow> sweep(const ScenarioConfig& config, SweepParameter parameter, const std::vector<double>& grid) {
    if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grid is empty");
    const bool up = std::is_sorted(grid.begin(), grid.end());
    const bool down = std::is_sorted(grid.rbegin(), grid.rend());
    if (!up && !down) throw Error(ErrorKind::InvalidArgument, "sweep grid must be monotone");

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (double value : grid) {
        const ScenarioConfig point = apply_sweep_value(config, parameter, value);
        SweepRow row{value, run_trials(point), aggregate_sigma(point.env), {}, {}, {}};
        if (parameter == SweepParameter::PrA && row.sigma_prime > 0.0) {
            row.y = solve_y(value);
            row.e_m = pr_mae(value, row.sigma_prime);
            row.expected_gain = pr_expected_gain(value, row.sigma_prime);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> slots_of(const Environment& env, const std::vector<int>& ids) {
    std::set<std::size_t> seen;
    for (int id : ids) {
        if (!seen.insert(index_of(env, id)).second) {
            throw Error(ErrorKind::InvalidArgument, "agent id listed twice: " + std::to_string(id));
        }
    }
    return {seen.begin(), seen.end()};
}

std::vector<std::size_t> shuffled_ring(std::size_t k, random::Engine& eng) {
    std::vector<std::size_t> ring(k);
    std::iota(ring.begin(), ring.end(), std::size_t{0});
    // Fisher-Yates with explicit draws keeps rings identical across standard libraries.
    for (std::size_t i = k - 1; i > 0; --i) {
        const std::size_t j = std::size_t(random::uniform01(eng) * double(i + 1));
        std::swap(ring[i], ring[std::min(j, i)]);
    }
    return ring;
}

struct ArmAcc {
    double clique_utility = 0.0;
    double clique_tax = 0.0;
    double outsider_error = 0.0;
    double mae = 0.0;

    void add(const ArmAcc& o) {
        clique_utility += o.clique_utility;
        clique_tax += o.clique_tax;
        outsider_error += o.outsider_error;
        mae += o.mae;
    }
};

struct CollusionAcc {
    ArmAcc one, two, honest;
};

} // namespace

CollusionComparison run_collusion_scenario(const Environment& env, const std::vector<int>& clique,
                                           std::size_t trials, std::uint64_t seed, unsigned workers,
                                           const CollusionParams& params) {
    env.validate();
    const std::size_t k = env.size();
    if (k < 3) throw Error(ErrorKind::TooFewAgents, "extended AS requires K >= 3");
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    const std::vector<std::size_t> members = slots_of(env, clique);
    if (members.size() + 2 > k) {
        throw Error(ErrorKind::CliqueTooLarge, "a clique of " + std::to_string(members.size()) + " in K = " +
                                                   std::to_string(k) + " leaves fewer than two outsiders");
    }
    std::vector<bool> in_clique(k, false);
    for (std::size_t m : members) in_clique[m] = true;

    Environment colluding = env;
    for (std::size_t m : members) colluding.agents[m].type = AgentType::colluder(0);

    // Strategies against a reference ring; with common observation noise they do not depend on it.
    std::vector<std::size_t> identity(k);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    const MechanismSpec reference = ExtendedAbsoluteScoring{identity, 2, std::nullopt};
    const StrategyProfile honest_profile = equilibrium_profile(env, reference, 0.0);
    const StrategyProfile clique_profile = equilibrium_profile(colluding, reference, 0.0, params);
    const auto target = centralized_solution(env);
    const double outsiders = double(k - members.size());
    const double clique_n = double(members.size());

    const auto score = [&](const Environment& e, const Outcome& out, ArmAcc& acc) {
        for (std::size_t i = 0; i < k; ++i) {
            const double err = std::abs(out.reputations[i] - target[i]);
            acc.mae += err;
            if (in_clique[i]) {
                acc.clique_utility += true_utility(i, out, e) / clique_n;
                acc.clique_tax += out.taxes[i] / clique_n;
            } else {
                acc.outsider_error += err / outsiders;
            }
        }
    };

    const auto trial = [&](std::size_t t, CollusionAcc& acc) {
        random::Engine eng = random::make_engine(seed, t);
        random::Engine ring_eng = random::make_engine(seed, t, 1);
        const auto ring1 = shuffled_ring(k, ring_eng);
        const auto ring2 = shuffled_ring(k, ring_eng);
        const Observations obs = sample_observations(env, eng, true);

        random::Engine eng_c = eng;
        const MessageProfile colluded = build_messages(colluding, clique_profile, obs, eng_c, true);
        const MessageProfile honest = build_messages(env, honest_profile, obs, eng, true);

        const MechanismSpec one = ExtendedAbsoluteScoring{ring1, 1, std::nullopt};
        const MechanismSpec two = ExtendedAbsoluteScoring{ring1, 2, ring2};
        score(colluding, run_extended_as(colluded, MechanismContext{obs.system, one, 0.0}), acc.one);
        score(colluding, run_extended_as(colluded, MechanismContext{obs.system, two, 0.0}), acc.two);
        score(env, run_extended_as(honest, MechanismContext{obs.system, two, 0.0}), acc.honest);
    };
    const auto merge = [](CollusionAcc& total, const CollusionAcc& part) {
        total.one.add(part.one);
        total.two.add(part.two);
        total.honest.add(part.honest);
    };
    const CollusionAcc acc = random::run_blocked(trials, workers, CollusionAcc{}, trial, merge);

    const double n = double(trials);
    const auto finish = [n](const ArmAcc& a) {
        return CollusionArm{a.clique_utility / n, a.clique_tax / n, a.outsider_error / n, a.mae / n};
    };
    return {finish(acc.one), finish(acc.two), finish(acc.honest), members.size(), trials};
}

// ---------------------------------------------------------------------------

namespace {

struct MaliciousAcc {
    double baseline = 0.0, malicious = 0.0, image = 0.0;
    double malicious_tax = 0.0, image_tax = 0.0;
};

} // namespace

MaliciousComparison run_malicious_scenario(const Environment& env, const std::vector<int>& malicious,
                                           std::size_t trials, std::uint64_t seed, unsigned workers) {
    env.validate();
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
    const std::vector<std::size_t> slots = slots_of(env, malicious);

    Environment random_env = env, image_env = env;
    for (std::size_t s : slots) {
        random_env.agents[s].type = AgentType::malicious();
        image_env.agents[s].type = AgentType::image();
        image_env.agents[s].utility.lambda = 0.0;
    }
    const MechanismSpec spec = AbsoluteScoring{};
    const StrategyProfile base_profile = equilibrium_profile(env, spec, 0.0);
    const StrategyProfile random_profile = equilibrium_profile(random_env, spec, 0.0);
    const StrategyProfile image_profile = equilibrium_profile(image_env, spec, 0.0);
    const double per_slot = slots.empty() ? 0.0 : 1.0 / double(slots.size());

    const auto trial = [&](std::size_t t, MaliciousAcc& acc) {
        random::Engine eng = random::make_engine(seed, t);
        const Observations obs = sample_observations(env, eng, false);
        const MechanismContext ctx{obs.system, spec, 0.0};
        random::Engine e1 = eng, e2 = eng, e3 = eng;
        const MessageProfile base = build_messages(env, base_profile, obs, e1, false);
        const MessageProfile rnd = build_messages(random_env, random_profile, obs, e2, false);
        const MessageProfile img = build_messages(image_env, image_profile, obs, e3, false);
        acc.baseline += mae_total(run_as(base, ctx), env);
        acc.malicious += mae_total(run_as(rnd, ctx), env);
        acc.image += mae_total(run_as(img, ctx), env);
        for (std::size_t s : slots) {
            const double dr = rnd.self_reports[s] - obs.system[s];
            const double di = img.self_reports[s] - obs.system[s];
            acc.malicious_tax += dr * dr * per_slot;
            acc.image_tax += di * di * per_slot;
        }
    };
    const auto merge = [](MaliciousAcc& total, const MaliciousAcc& part) {
        total.baseline += part.baseline;
        total.malicious += part.malicious;
        total.image += part.image;
        total.malicious_tax += part.malicious_tax;
        total.image_tax += part.image_tax;
    };
    const MaliciousAcc acc = random::run_blocked(trials, workers, MaliciousAcc{}, trial, merge);
    const double n = double(trials);
    return {acc.baseline / n, acc.malicious / n, acc.image / n, acc.malicious_tax / n, acc.image_tax / n,
            slots.size(), trials};
}

} // namespace repmech
