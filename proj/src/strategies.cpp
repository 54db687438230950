#include "repmech/strategies.hpp"

#include "repmech/error.hpp"
#include "repmech/mechanisms.hpp"
#include "repmech/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace repmech {

using numerics::kSqrt2;

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double image_weight(const Agent& a) { return 1.0 - a.utility.lambda; }

// Position-based predecessor on a ring listing agent indices.
std::size_t ring_predecessor(const std::vector<std::size_t>& ring, std::size_t agent) {
    const std::size_t k = ring.size();
    for (std::size_t p = 0; p < k; ++p) {
        if (ring[p] == agent) return ring[(p + k - 1) % k];
    }
    throw Error(ErrorKind::InvalidArgument, "agent missing from ring");
}

// Optimal PR self-report against an aggregate ~ N(law.mean, law.std^2) with band eps.
double pr_self_report_for(const numerics::NormalParams& law, double eps) {
    if (law.std <= 0.0) return law.mean + eps;
    const double a_eff = eps / law.std;
    return law.mean + eps * solve_y(a_eff);
}

} // namespace

// ---------------------------------------------------------------------------

StrategyProfile truthful_profile(std::size_t k) { return StrategyProfile(k); }

double equilibrium_self_report(const Environment& env, std::size_t i, const MechanismSpec& spec,
                               double sigma_prime) {
    const Agent& agent = env.agents.at(i);
    if (agent.type.kind == AgentKind::MaliciousRandom) {
        throw Error(ErrorKind::UnsupportedCombination, "random reporters have no deterministic self-report");
    }
    const double r = agent.quality;
    const double w = image_weight(agent);

    struct Visitor {
        const Environment& env;
        std::size_t i;
        const Agent& agent;
        double r;
        double w;
        double sigma_prime;

        double operator()(const AbsoluteScoring&) const {
            return as_self_report(agent.utility.g, w, r + env.system_obs.bias, env.system_obs.std);
        }
        double operator()(const ExtendedAbsoluteScoring& ext) const {
            const Agent& pred = env.agents[ring_predecessor(ext.ring, i)];
            const double center = r + pred.cross_obs.bias;
            if (w == 0.0) return clamp01(center);
            const double spread = pred.cross_obs.std;
            const auto objective = [&](double x) {
                return numerics::folded_normal_mean(x - center, spread) - w * agent.utility.image(x);
            };
            return numerics::minimize_1d(objective, 0.0, 1.0, 1e-10).argmin;
        }
        double operator()(const FairRanking&) const {
            if (w == 0.0) return r;
            const FairRanking fr;
            const auto objective = [&](double x) {
                MessageProfile msgs{env.truths(), std::nullopt};
                msgs.self_reports[i] = x;
                MechanismContext ctx{{}, fr, 0.0};
                return -true_utility(i, run_fr(msgs, ctx), env);
            };
            return numerics::minimize_1d(objective, 0.0, 1.0, 1e-10).argmin;
        }
        double operator()(const SimpleAveraging&) const { return r; }
        double operator()(const DirectObservation&) const { return r; }
        double operator()(const PunishReward& pr) const {
            if (w == 0.0) return r;
            require_linear();
            return clamp01(pr_self_report_for(aggregate_law(env, i), pr.a * sigma_prime));
        }
        double operator()(const WeightedPunishReward& wpr) const {
            if (w == 0.0) return r;
            require_linear();
            return clamp01(pr_self_report_for(weighted_aggregate_law(env, i, wpr.weights), wpr.a * sigma_prime));
        }
        void require_linear() const {
            if (!agent.utility.image_is_linear()) {
                throw Error(ErrorKind::UnsupportedCombination,
                            "punish-reward best response is implemented for linear image value only");
            }
        }
    };
    return clamp01(std::visit(Visitor{env, i, agent, r, w, sigma_prime}, spec));
}

StrategyProfile equilibrium_profile(const Environment& env, const MechanismSpec& spec,
                                    double sigma_prime, const CollusionParams& collusion) {
    StrategyProfile profile(env.size());
    for (std::size_t i = 0; i < env.size(); ++i) {
        auto& s = profile[i];
        switch (env.agents[i].type.kind) {
        case AgentKind::MaliciousRandom:
            s.self.rule = SelfRule::UniformRandom;
            s.cross.rule = CrossRule::UniformRandom;
            break;
        case AgentKind::Colluder:
            s.self = {SelfRule::Fixed, collusion.inflate};
            s.cross.rule = CrossRule::Collude;
            s.cross.inflate = collusion.inflate;
            s.cross.bash = collusion.bash;
            break;
        default:
            s.self = {SelfRule::Fixed, equilibrium_self_report(env, i, spec, sigma_prime)};
            break;
        }
    }
    return profile;
}

StrategyProfile resolve_profile(const StrategyProfile& profile, const Environment& env,
                                const MechanismSpec& spec, double sigma_prime) {
    if (profile.size() != env.size()) throw Error(ErrorKind::DimensionMismatch, "one strategy per agent");
    StrategyProfile out = profile;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].self.rule == SelfRule::Equilibrium) {
            out[i].self = {SelfRule::Fixed, equilibrium_self_report(env, i, spec, sigma_prime)};
        }
    }
    return out;
}

MessageProfile build_messages(const Environment& env, const StrategyProfile& profile,
                              const Observations& obs, random::Engine& eng, bool with_cross) {
    const std::size_t k = env.size();
    MessageProfile msgs;
    msgs.self_reports.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const SelfStrategy& s = profile[i].self;
        const double r = env.agents[i].quality;
        switch (s.rule) {
        case SelfRule::Truthful: msgs.self_reports[i] = r; break;
        case SelfRule::Fixed: msgs.self_reports[i] = s.value; break;
        case SelfRule::Offset: msgs.self_reports[i] = clamp01(r + s.value); break;
        case SelfRule::UniformRandom: msgs.self_reports[i] = random::uniform01(eng); break;
        case SelfRule::Equilibrium:
            throw Error(ErrorKind::InvalidArgument, "profile must be resolved before building messages");
        }
    }
    if (!with_cross) return msgs;

    ReportMatrix cross(k);
    for (std::size_t j = 0; j < k; ++j) {
        const CrossStrategy& c = profile[j].cross;
        const AgentType& reporter = env.agents[j].type;
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            const double observed = obs.cross(j, i);
            double report = observed;
            switch (c.rule) {
            case CrossRule::Truthful: break;
            case CrossRule::Affine: report = c.scale * observed + c.shift; break;
            case CrossRule::UniformRandom: report = random::uniform01(eng); break;
            case CrossRule::Collude: {
                const AgentType& target = env.agents[i].type;
                const bool fellow = target.kind == AgentKind::Colluder && target.clique_id == reporter.clique_id;
                if (fellow) report = c.inflate;
                else if (c.bash) report = *c.bash;
                break;
            }
            }
            cross(j, i) = report;
        }
    }
    msgs.cross_reports = std::move(cross);
    return msgs;
}

// ---------------------------------------------------------------------------

double pr_first_order_condition(double y, double a) {
    const double u = a * (y + 1.0) / kSqrt2;
    const double v = a * (y - 1.0) / kSqrt2;
    return a * numerics::kInvSqrt2Pi * (std::exp(-u * u) - 3.0 * std::exp(-v * v)) -
           0.5 * (numerics::erf(u) + 3.0 * numerics::erf(v));
}

double solve_y(double a) {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "solve_y requires a > 0");
    const auto h = [a](double y) { return pr_first_order_condition(y, a); };
    const double h0 = h(0.0);
    const double h1 = h(1.0);
    if (!(h0 > 0.0 && h1 < 0.0)) {
        throw Error(ErrorKind::NoRoot, "no sign change of the PR first-order condition on (0, 1) for a = " +
                                           std::to_string(a));
    }
    return numerics::find_root(h, 0.0, 1.0, 1e-14);
}

double expected_pr_reputation(double x, double mu, double sigma_prime, double eps) {
    if (!(sigma_prime > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma' must be > 0");
    const auto cdf = [=](double t) { return numerics::normal_cdf(t, mu, sigma_prime); };
    const double lo = x - eps;
    const double hi = x + eps;
    const double band = numerics::integrate(cdf, lo, hi, 1e-13);
    const double cutoff = mu - numerics::kNormalTailCutoff * sigma_prime;
    const double tail = lo > cutoff ? numerics::integrate(cdf, cutoff, lo, 1e-13) : 0.0;
    return x + 0.5 * eps * (cdf(hi) - 3.0 * cdf(lo)) - 0.5 * band - 2.0 * tail;
}

double expected_pr_reputation_slope(double x, double mu, double sigma_prime, double eps) {
    using numerics::normal_cdf;
    using numerics::normal_pdf;
    return 1.0 + 0.5 * eps * (normal_pdf(x + eps, mu, sigma_prime) - 3.0 * normal_pdf(x - eps, mu, sigma_prime)) -
           0.5 * (normal_cdf(x + eps, mu, sigma_prime) + 3.0 * normal_cdf(x - eps, mu, sigma_prime));
}

PrEquilibrium pr_optimal_self_report(double mu, double sigma_prime, double a) {
    if (!(sigma_prime > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma' must be > 0");
    const double y = solve_y(a);
    return {a, y, mu + a * sigma_prime * y};
}

// ---------------------------------------------------------------------------

double as_self_report(const ImageValue& g, double weight, double obs_mean, double /*sigma0*/) {
    // E[(x - R_0)^2] = (x - mean)^2 + sigma0^2; sigma0 shifts the level only.
    if (weight <= 0.0) return clamp01(obs_mean);
    if (std::holds_alternative<LinearImage>(g)) return clamp01(obs_mean + 0.5 * weight);

    const double q = std::get<PowerImage>(g).q;
    const auto foc = [&](double x) { return weight * q * std::pow(x, q - 1.0) - 2.0 * (x - obs_mean); };
    const double lo = 1e-12;
    if (foc(1.0) >= 0.0) return 1.0;
    if (foc(lo) <= 0.0) return 0.0;
    return numerics::find_root(foc, lo, 1.0, 1e-14);
}

double image_best_response_as(const ImageValue& g, Quality r, double sigma0) {
    return as_self_report(g, 1.0, r.value(), sigma0);
}

// ---------------------------------------------------------------------------

namespace {

struct OracleAcc {
    std::vector<double> sum;
    std::vector<double> diff_sum;
    std::vector<double> diff_sq;
    double claimed_sum = 0.0;
};

double claimed_point(Decision decision, const AgentStrategy& s, double r) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (decision == Decision::SelfReport) {
        switch (s.self.rule) {
        case SelfRule::Truthful: return r;
        case SelfRule::Fixed: return s.self.value;
        case SelfRule::Offset: return clamp01(r + s.self.value);
        default: return nan;
        }
    }
    if (s.cross.rule == CrossRule::Truthful) return 0.0;
    if (s.cross.rule == CrossRule::Affine && s.cross.scale == 1.0) return s.cross.shift;
    return nan;
}

} // namespace

BestResponse best_response_numeric(std::size_t agent, const MechanismSpec& mechanism,
                                   const Environment& env, const StrategyProfile& profile,
                                   const BestResponseOptions& options) {
    env.validate();
    validate_mechanism(mechanism, env.size());
    if (agent >= env.size()) throw Error(ErrorKind::InvalidArgument, "agent index out of range");
    if (profile.size() != env.size()) throw Error(ErrorKind::DimensionMismatch, "one strategy per agent");
    if (options.grid < 2 || options.trials < 2) {
        throw Error(ErrorKind::InvalidArgument, "best_response_numeric needs grid >= 2 and trials >= 2");
    }

    Decision decision = options.decision;
    if (decision == Decision::Auto) {
        decision = std::holds_alternative<SimpleAveraging>(mechanism) ? Decision::CrossShift : Decision::SelfReport;
    }
    const bool with_cross = uses_cross_reports(mechanism) || decision == Decision::CrossShift;

    const std::size_t n = options.grid;
    std::vector<double> grid(n);
    const double lo = decision == Decision::SelfReport ? 0.0 : -options.shift_range;
    const double hi = decision == Decision::SelfReport ? 1.0 : options.shift_range;
    const double step = (hi - lo) / double(n - 1);
    for (std::size_t k = 0; k < n; ++k) grid[k] = k + 1 == n ? hi : lo + step * double(k);

    const double sigma_prime = aggregate_sigma(env);
    const OracleAcc zero{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0};

    const auto trial = [&](std::size_t t, OracleAcc& acc) {
        random::Engine eng = random::make_engine(options.seed, t);
        const Observations obs = sample_observations(env, eng, with_cross);
        MessageProfile msgs = build_messages(env, profile, obs, eng, with_cross);
        const MechanismContext ctx{obs.system, mechanism, sigma_prime};
        const double claimed = true_utility(agent, run_mechanism(msgs, ctx), env);
        acc.claimed_sum += claimed;
        for (std::size_t k = 0; k < n; ++k) {
            if (decision == Decision::SelfReport) {
                msgs.self_reports[agent] = grid[k];
            } else {
                for (std::size_t j = 0; j < env.size(); ++j) {
                    if (j != agent) (*msgs.cross_reports)(agent, j) = obs.cross(agent, j) + grid[k];
                }
            }
            const double u = true_utility(agent, run_mechanism(msgs, ctx), env);
            const double d = u - claimed;
            acc.sum[k] += u;
            acc.diff_sum[k] += d;
            acc.diff_sq[k] += d * d;
        }
    };
    const auto merge = [](OracleAcc& total, const OracleAcc& part) {
        for (std::size_t k = 0; k < total.sum.size(); ++k) {
            total.sum[k] += part.sum[k];
            total.diff_sum[k] += part.diff_sum[k];
            total.diff_sq[k] += part.diff_sq[k];
        }
        total.claimed_sum += part.claimed_sum;
    };
    const OracleAcc acc = random::run_blocked(options.trials, options.workers, zero, trial, merge);

    const double trials = double(options.trials);
    BestResponse out;
    out.decision = decision;
    out.grid = grid;
    out.grid_step = step;
    out.mean_utility.resize(n);
    std::size_t best = 0;
    for (std::size_t k = 0; k < n; ++k) {
        out.mean_utility[k] = acc.sum[k] / trials;
        if (out.mean_utility[k] > out.mean_utility[best]) best = k;
    }
    out.argmax = grid[best];
    out.argmax_utility = out.mean_utility[best];
    out.claimed_utility = acc.claimed_sum / trials;
    out.claimed_value = claimed_point(decision, profile[agent], env.agents[agent].quality);
    out.gain = acc.diff_sum[best] / trials;
    const double var = std::max(0.0, (acc.diff_sq[best] / trials - out.gain * out.gain) * trials / (trials - 1.0));
    out.gain_stderr = std::sqrt(var / trials);
    return out;
}

// ---------------------------------------------------------------------------

double bayesian_ic_violation(const Environment& env, std::size_t agent, double claimed) {
    if (env.scheme != IndexScheme::Absolute) {
        throw Error(ErrorKind::InvalidArgument, "the incentive-compatibility check uses absolute indices");
    }
    const std::size_t k = env.size();
    if (agent >= k) throw Error(ErrorKind::InvalidArgument, "agent index out of range");
    Outcome honest{env.truths(), std::vector<double>(k, 0.0)};
    Outcome misreport = honest;
    misreport.reputations[agent] = claimed;
    return true_utility(agent, misreport, env) - true_utility(agent, honest, env);
}

double fr_deviation_loss(std::size_t deviator, double x, const Environment& env) {
    const auto truths = env.truths();
    const std::size_t k = truths.size();
    if (deviator >= k) throw Error(ErrorKind::InvalidArgument, "agent index out of range");
    const double total = std::accumulate(truths.begin(), truths.end(), 0.0);
    if (!(total > 0.0)) throw Error(ErrorKind::ZeroTotalQuality, "sum of true qualities is zero");
    const double r = truths[deviator];
    const double others = total - r;
    const UtilitySpec& u = env.agents[deviator].utility;
    const double denom = (x + others) * total;

    double loss = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == deviator) continue;
        const double err = denom > 0.0 ? truths[j] * (x - r) / denom : 1.0 / double(k) - truths[j] / total;
        loss += u.loss(std::abs(err));
    }
    return -u.lambda * loss;
}

DeviationProfit proportional_deviation_profit(std::size_t deviator, double x, const Environment& env,
                                              DeviationTax tax) {
    const double r = env.agents.at(deviator).quality;
    const auto truths = env.truths();
    const double total = std::accumulate(truths.begin(), truths.end(), 0.0);
    if (!(total > 0.0)) throw Error(ErrorKind::ZeroTotalQuality, "sum of true qualities is zero");
    const UtilitySpec& u = env.agents[deviator].utility;
    const double others = total - r;

    DeviationProfit out{};
    out.accuracy_loss = fr_deviation_loss(deviator, x, env);
    const double share = x + others > 0.0 ? x / (x + others) : 1.0 / double(truths.size());
    out.image_gain = (1.0 - u.lambda) * (u.image(share) - u.image(r / total));
    if (tax == DeviationTax::AbsoluteScoring) {
        // E[(x - R_0)^2] - E[(r - R_0)^2] with R_0 ~ N(r + b, s^2); the redistribution
        // share does not depend on the deviator's report.
        const double center = r + env.system_obs.bias;
        out.tax_term = -((x - center) * (x - center) - (r - center) * (r - center));
    }
    return out;
}

} // namespace repmech
