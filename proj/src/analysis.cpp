#include "repmech/analysis.hpp"

#include "repmech/error.hpp"
#include "repmech/mechanisms.hpp"
#include "repmech/numerics.hpp"
#include "repmech/random.hpp"
#include "repmech/sampling.hpp"
#include "repmech/strategies.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace repmech {

using numerics::kSqrt2OverPi;

double mae_total(const Outcome& outcome, const Environment& env) {
    const auto target = centralized_solution(env);
    if (outcome.reputations.size() != target.size()) {
        throw Error(ErrorKind::DimensionMismatch, "outcome does not match the environment");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) sum += std::abs(outcome.reputations[i] - target[i]);
    return sum;
}

// ---------------------------------------------------------------------------

double averaging_mae(double sigma_prime) { return kSqrt2OverPi * sigma_prime; }

double pr_mae(double a, double sigma_prime) {
    if (!(a > 0.0) || !(sigma_prime > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "pr_mae requires a > 0 and sigma' > 0");
    }
    // Centered at r = 0: the error is |r_hat| itself.
    const double eps = a * sigma_prime;
    const double x = eps * solve_y(a);
    const auto integrand = [=](double m) {
        return std::abs(punish_reward(x, m, eps)) * numerics::normal_pdf(m, 0.0, sigma_prime);
    };
    const double span = numerics::kNormalTailCutoff * sigma_prime;
    std::array<double, 4> kinks{x - eps, -x, 0.5 * x, x + eps};
    std::sort(kinks.begin(), kinks.end());
    std::vector<double> inside;
    for (double k : kinks) {
        if (k > -span && k < span) inside.push_back(k);
    }
    return numerics::integrate(integrand, -span, span, inside, 1e-14);
}

double pr_expected_gain(double a, double sigma_prime) {
    const PrEquilibrium eq = pr_optimal_self_report(0.0, sigma_prime, a);
    return expected_pr_reputation(eq.x_star, 0.0, sigma_prime, a * sigma_prime);
}

double pr_optimal_a(double sigma_prime, double lo, double hi) {
    return numerics::minimize_1d([=](double a) { return pr_mae(a, sigma_prime); }, lo, hi, 1e-6).argmin;
}

std::vector<double> pr_mutual_benefit_region(double sigma_prime, const std::vector<double>& a_grid) {
    std::vector<double> region;
    const double baseline = averaging_mae(sigma_prime);
    for (double a : a_grid) {
        if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid values must be positive");
        if (pr_expected_gain(a, sigma_prime) > 0.0 && pr_mae(a, sigma_prime) < baseline) region.push_back(a);
    }
    return region;
}

std::vector<PrCurveRow> pr_curve(const std::vector<double>& a_grid, double mu, double sigma_prime) {
    std::vector<PrCurveRow> rows;
    rows.reserve(a_grid.size());
    for (double a : a_grid) {
        const PrEquilibrium eq = pr_optimal_self_report(mu, sigma_prime, a);
        rows.push_back({a, eq.y, pr_mae(a, sigma_prime), averaging_mae(sigma_prime),
                        expected_pr_reputation(eq.x_star, mu, sigma_prime, a * sigma_prime), mu});
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

// a >= b, treating a rounding-level shortfall as a tie.
bool at_least(double a, double b) { return a >= b - 1e-12 * std::max(1.0, std::abs(b)); }

// E|N(mu, sigma^2)|^p
double abs_moment(double mu, double sigma, double p) {
    if (sigma == 0.0) return std::pow(std::abs(mu), p);
    if (p == 1.0) return numerics::folded_normal_mean(mu, sigma);
    if (p == 2.0) return mu * mu + sigma * sigma;
    const double span = numerics::kNormalTailCutoff * sigma;
    const auto integrand = [=](double z) { return std::pow(std::abs(z), p) * numerics::normal_pdf(z, mu, sigma); };
    const double lo = mu - span, hi = mu + span;
    if (lo < 0.0 && hi > 0.0) {
        const double kink[] = {0.0};
        return numerics::integrate(integrand, lo, hi, kink, 1e-13);
    }
    return numerics::integrate(integrand, lo, hi, 1e-13);
}

// E g(R) for R ~ N(mean, std^2)
double expected_image(const UtilitySpec& u, double mean, double std) {
    if (u.image_is_linear()) return mean;
    if (std == 0.0) return u.image(mean);
    const double span = numerics::kNormalTailCutoff * std;
    const auto integrand = [&](double z) { return u.image(z) * numerics::normal_pdf(z, mean, std); };
    const double lo = std::max(0.0, mean - span);
    const double hi = mean + span;
    return hi > lo ? numerics::integrate(integrand, lo, hi, 1e-13) : 0.0;
}

bool deterministic_kind(AgentKind kind) {
    return kind == AgentKind::Truth || kind == AgentKind::Image || kind == AgentKind::Mixed;
}

std::vector<double> as_equilibrium_reports(const Environment& env) {
    std::vector<double> x(env.size());
    for (std::size_t j = 0; j < env.size(); ++j) {
        if (!deterministic_kind(env.agents[j].type.kind)) {
            throw Error(ErrorKind::UnsupportedCombination,
                        "closed-form participation needs truth, image or mixed agents only");
        }
        x[j] = equilibrium_self_report(env, j, AbsoluteScoring{}, 0.0);
    }
    return x;
}

// Expected v_i under AS for deterministic reports x.
double as_expected_utility(const Environment& env, std::size_t i, const std::vector<double>& x) {
    const std::size_t k = env.size();
    const auto target = centralized_solution(env);
    const UtilitySpec& u = env.agents[i].utility;
    const double s0 = env.system_obs.std;
    const auto sq_tax = [&](std::size_t j) {
        const double d = x[j] - (env.agents[j].quality + env.system_obs.bias);
        return d * d + s0 * s0;
    };
    double accuracy = 0.0, others = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        accuracy += u.loss(std::abs(x[j] - target[j]));
        others += sq_tax(j);
    }
    const double tax = sq_tax(i) - others / double(k - 1);
    return -u.lambda * accuracy + (1.0 - u.lambda) * u.image(x[i]) - tax;
}

struct Census {
    std::size_t image = 0;
    std::size_t truth = 0;
    std::size_t mixed = 0;
    bool all_linear = true;
};

Census census_excluding(const Environment& env, std::size_t i) {
    Census c;
    for (std::size_t j = 0; j < env.size(); ++j) {
        if (j == i) continue;
        const Agent& a = env.agents[j];
        if (a.type.kind == AgentKind::Image) ++c.image;
        else if (a.type.kind == AgentKind::Truth) ++c.truth;
        else ++c.mixed;
        if (a.type.kind != AgentKind::Truth && !a.utility.image_is_linear()) c.all_linear = false;
    }
    return c;
}

struct McAcc {
    double in_sum = 0.0;
    double in_sq = 0.0;
    double out_sum = 0.0;
};

enum class ReservedKind { OwnObservations, SystemImage };

// Monte Carlo u_in under AS at equilibrium, and the reserved utility.
void fill_monte_carlo(ParticipationReport& rep, const Environment& env, std::size_t i,
                      const MonteCarloOptions& mc, ReservedKind reserved) {
    if (mc.trials == 0) return;
    const MechanismSpec spec = AbsoluteScoring{};
    const StrategyProfile profile = equilibrium_profile(env, spec, 0.0);
    const Agent& me = env.agents[i];
    const auto target = centralized_solution(env);

    const auto trial = [&](std::size_t t, McAcc& acc) {
        random::Engine eng = random::make_engine(mc.seed, t);
        const Observations obs = sample_observations(env, eng, true);
        const MessageProfile msgs = build_messages(env, profile, obs, eng, false);
        const double v = true_utility(i, run_as(msgs, MechanismContext{obs.system, spec, 0.0}), env);
        acc.in_sum += v;
        acc.in_sq += v * v;
        if (reserved == ReservedKind::OwnObservations) {
            double loss = 0.0;
            for (std::size_t j = 0; j < env.size(); ++j) {
                if (j != i) loss += me.utility.loss(std::abs(obs.cross(i, j) - target[j]));
            }
            acc.out_sum += -me.utility.lambda * loss;
        } else {
            acc.out_sum += (1.0 - me.utility.lambda) * me.utility.image(obs.system[i]);
        }
    };
    const auto merge = [](McAcc& total, const McAcc& part) {
        total.in_sum += part.in_sum;
        total.in_sq += part.in_sq;
        total.out_sum += part.out_sum;
    };
    const McAcc acc = random::run_blocked(mc.trials, mc.workers, McAcc{}, trial, merge);
    const double n = double(mc.trials);
    const double mean = acc.in_sum / n;
    const double var = n > 1 ? std::max(0.0, (acc.in_sq / n - mean * mean) * n / (n - 1.0)) : 0.0;
    rep.u_in_mc = mean;
    rep.u_in_mc_stderr = std::sqrt(var / n);
    rep.u_out_mc = acc.out_sum / n;
    rep.participates_mc = *rep.u_in_mc >= *rep.u_out_mc;
}

} // namespace

double as_ir_gain(const Agent& agent, const Environment& env) {
    if (agent.type.kind != AgentKind::Truth) {
        throw Error(ErrorKind::InvalidArgument, "individual rationality gain is defined for truth agents");
    }
    const double p = agent.utility.f.p;
    double gain = 0.0;
    for (const Agent& other : env.agents) {
        if (other.id == agent.id) continue;
        gain += abs_moment(agent.cross_obs.bias, agent.cross_obs.std, p) - agent.utility.loss(0.0);
    }
    return gain;
}

ParticipationReport hetero_truth_participation(const Environment& env, std::size_t i, const MonteCarloOptions& mc) {
    env.validate();
    const Agent& me = env.agents.at(i);
    if (me.type.kind != AgentKind::Truth) throw Error(ErrorKind::InvalidArgument, "agent is not a truth agent");
    const std::size_t k = env.size();
    const Census c = census_excluding(env, i);

    ParticipationReport rep;
    rep.rho = double(c.image) / double(k - 1);
    rep.gamma = double(c.truth) / double(k - 1);
    const double per_peer = abs_moment(me.cross_obs.bias, me.cross_obs.std, me.utility.f.p);
    rep.u_out = -double(k - 1) * per_peer;

    rep.u_in_exact = as_expected_utility(env, i, as_equilibrium_reports(env));
    rep.participates_exact = at_least(rep.u_in_exact, rep.u_out);

    const bool closed_form = me.utility.f.p == 2.0 && c.mixed == 0 && c.all_linear;
    const double image = double(c.image);
    rep.u_in = closed_form ? -(image / 4.0) * (1.0 - 1.0 / double(k - 1)) : rep.u_in_exact;
    rep.participates = at_least(rep.u_in, rep.u_out);
    rep.u_in_simplified = closed_form ? -image / 4.0 : rep.u_in_exact;
    rep.participates_simplified = at_least(rep.u_in_simplified, rep.u_out);

    fill_monte_carlo(rep, env, i, mc, ReservedKind::OwnObservations);
    return rep;
}

ParticipationReport hetero_truth_participation(const Environment& env, const MonteCarloOptions& mc) {
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (env.agents[i].type.kind == AgentKind::Truth) return hetero_truth_participation(env, i, mc);
    }
    throw Error(ErrorKind::InvalidArgument, "environment has no truth agent");
}

ParticipationReport hetero_image_participation(const Environment& env, std::size_t i, const MonteCarloOptions& mc) {
    env.validate();
    const Agent& me = env.agents.at(i);
    if (me.type.kind != AgentKind::Image) throw Error(ErrorKind::InvalidArgument, "agent is not an image agent");
    const std::size_t k = env.size();
    const Census c = census_excluding(env, i);
    const double r = me.quality;

    ParticipationReport rep;
    rep.rho = double(c.image) / double(k - 1);
    rep.gamma = double(c.truth) / double(k - 1);
    rep.u_out = expected_image(me.utility, r + env.system_obs.bias, env.system_obs.std);

    rep.u_in_exact = as_expected_utility(env, i, as_equilibrium_reports(env));
    rep.participates_exact = at_least(rep.u_in_exact, rep.u_out);

    const bool closed_form = me.utility.image_is_linear() && c.mixed == 0 && c.all_linear;
    if (closed_form) {
        // The tax keeps the interior value 1/4 even where the report is clamped.
        rep.u_in = me.utility.image(std::min(r + 0.5, 1.0)) - 0.25 + double(c.image) / (4.0 * double(k - 1));
    } else {
        rep.u_in = rep.u_in_exact;
    }
    rep.participates = at_least(rep.u_in, rep.u_out);
    rep.u_in_simplified = rep.u_in;
    rep.participates_simplified = r <= 0.5 || at_least(4.0 * (1.0 - r), rep.gamma);

    fill_monte_carlo(rep, env, i, mc, ReservedKind::SystemImage);
    return rep;
}

SystemGainReport hetero_system_gain(const Environment& env) {
    env.validate();
    const std::size_t k = env.size();
    const std::vector<double> x = as_equilibrium_reports(env);
    SystemGainReport rep;
    std::size_t image = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const Agent& a = env.agents[j];
        if (a.type.kind == AgentKind::Image) ++image;
        if (a.type.kind != AgentKind::Truth) {
            rep.as_mae += (1.0 - a.utility.lambda) * a.utility.image_slope(a.quality) / 2.0;
        }
        rep.as_mae_exact += std::abs(x[j] - a.quality);
    }
    rep.direct_mae = double(k) * numerics::folded_normal_mean(env.system_obs.bias, env.system_obs.std);
    rep.gains = rep.as_mae < rep.direct_mae;
    rep.rho = double(image) / double(k - 1);
    rep.gains_simplified = rep.rho < 2.0 * kSqrt2OverPi * env.system_obs.std;
    return rep;
}

// ---------------------------------------------------------------------------

double collusion_expected_tax(double a, double b, Quality r_target, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "collusion tax requires sigma > 0");
    return numerics::folded_normal_mean((a - 1.0) * r_target.value() + b, sigma * std::sqrt(1.0 + a * a));
}

bool weighted_variance_check(const std::vector<double>& weights, const std::vector<double>& sigmas) {
    if (weights.size() != sigmas.size() || weights.empty()) {
        throw Error(ErrorKind::DimensionMismatch, "one weight per reporter");
    }
    const double n = double(weights.size());
    double weighted = 0.0, uniform = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double s2 = sigmas[j] * sigmas[j];
        weighted += weights[j] * weights[j] * s2;
        uniform += s2 / (n * n);
    }
    return weighted <= uniform * (1.0 + 1e-12);
}

} // namespace repmech
