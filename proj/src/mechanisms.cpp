#include "repmech/mechanisms.hpp"

#include "repmech/error.hpp"

#include <cmath>
#include <numeric>

namespace repmech {

namespace {

std::size_t agent_count(const MessageProfile& msgs) { return msgs.self_reports.size(); }

const ReportMatrix& require_cross(const MessageProfile& msgs, const char* mechanism) {
    if (!msgs.cross_reports) {
        throw Error(ErrorKind::InvalidArgument, std::string(mechanism) + " requires cross-reports");
    }
    if (msgs.cross_reports->size() != agent_count(msgs)) {
        throw Error(ErrorKind::DimensionMismatch, "cross-report matrix does not match K");
    }
    return *msgs.cross_reports;
}

void require_system(const MechanismContext& ctx, std::size_t k) {
    if (ctx.system_observations.size() != k) {
        throw Error(ErrorKind::DimensionMismatch, "one system observation per agent is required");
    }
}

// t_i = d_i - (sum_j d_j - d_i - d_{succ(i)}) / (K - 2) over a ring.
std::vector<double> ring_layer(const std::vector<double>& discrepancy,
                               const std::vector<std::size_t>& succ) {
    const std::size_t k = discrepancy.size();
    const double total = std::accumulate(discrepancy.begin(), discrepancy.end(), 0.0);
    std::vector<double> tax(k);
    for (std::size_t i = 0; i < k; ++i) {
        tax[i] = discrepancy[i] - (total - discrepancy[i] - discrepancy[succ[i]]) / double(k - 2);
    }
    return tax;
}

struct RingLinks {
    std::vector<std::size_t> pred;
    std::vector<std::size_t> succ;
};

RingLinks links_of(const std::vector<std::size_t>& ring) {
    const std::size_t k = ring.size();
    RingLinks l{std::vector<std::size_t>(k), std::vector<std::size_t>(k)};
    for (std::size_t p = 0; p < k; ++p) {
        l.succ[ring[p]] = ring[(p + 1) % k];
        l.pred[ring[p]] = ring[(p + k - 1) % k];
    }
    return l;
}

} // namespace

double punish_reward(double self_report, double aggregate, double eps) {
    if (std::abs(self_report - aggregate) <= eps) return 0.5 * (aggregate + self_report);
    return aggregate - std::abs(aggregate - self_report);
}

double aggregate_with_system(const ReportMatrix& cross, double system_obs, std::size_t about) {
    const std::size_t k = cross.size();
    double sum = system_obs;
    for (std::size_t j = 0; j < k; ++j) {
        if (j != about) sum += cross(j, about);
    }
    return sum / double(k);
}

double weighted_aggregate(const ReportMatrix& cross, const std::vector<double>& weights,
                          std::size_t about) {
    const std::size_t k = cross.size();
    if (weights.size() != k) throw Error(ErrorKind::DimensionMismatch, "one weight per reporter");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == about) continue;
        num += weights[j] * cross(j, about);
        den += weights[j];
    }
    if (!(den > 0.0)) {
        throw Error(ErrorKind::ZeroWeightSum, "no positive weight among reporters on agent " + std::to_string(about));
    }
    return num / den;
}

Outcome run_as(const MessageProfile& msgs, const MechanismContext& ctx) {
    const std::size_t k = agent_count(msgs);
    if (k < 2) throw Error(ErrorKind::TooFewAgents, "AS requires K >= 2");
    require_system(ctx, k);
    std::vector<double> sq(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double d = msgs.self_reports[i] - ctx.system_observations[i];
        sq[i] = d * d;
    }
    const double total = std::accumulate(sq.begin(), sq.end(), 0.0);
    Outcome out{msgs.self_reports, std::vector<double>(k)};
    for (std::size_t i = 0; i < k; ++i) {
        out.taxes[i] = sq[i] - (total - sq[i]) / double(k - 1);
    }
    return out;
}

std::vector<std::vector<double>> extended_as_tax_layers(const MessageProfile& msgs,
                                                        const ExtendedAbsoluteScoring& spec) {
    const std::size_t k = agent_count(msgs);
    if (k < 3) throw Error(ErrorKind::TooFewAgents, "extended AS requires K >= 3");
    validate_mechanism(spec, k);
    const ReportMatrix& cross = require_cross(msgs, "extended AS");

    std::vector<std::vector<double>> layers;
    // Layer 1: self-report against the predecessor's cross-report.
    const RingLinks first = links_of(spec.ring);
    std::vector<double> d(k);
    for (std::size_t i = 0; i < k; ++i) {
        d[i] = std::abs(msgs.self_reports[i] - cross(first.pred[i], i));
    }
    layers.push_back(ring_layer(d, first.succ));

    if (spec.layers == 2) {
        // Layer 2: cross-report on the successor against the predecessor's
        // report on that same successor.
        const RingLinks second = links_of(spec.second_ring ? *spec.second_ring : spec.ring);
        std::vector<double> e(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t next = second.succ[i];
            e[i] = std::abs(cross(i, next) - cross(second.pred[i], next));
        }
        layers.push_back(ring_layer(e, second.succ));
    }
    return layers;
}

Outcome run_extended_as(const MessageProfile& msgs, const MechanismContext& ctx) {
    const auto* spec = std::get_if<ExtendedAbsoluteScoring>(&ctx.spec);
    if (!spec) throw Error(ErrorKind::InvalidArgument, "context does not hold an extended AS spec");
    const auto layers = extended_as_tax_layers(msgs, *spec);
    Outcome out{msgs.self_reports, std::vector<double>(agent_count(msgs), 0.0)};
    for (const auto& layer : layers) {
        for (std::size_t i = 0; i < layer.size(); ++i) out.taxes[i] += layer[i];
    }
    return out;
}

Outcome run_fr(const MessageProfile& msgs, const MechanismContext&) {
    const std::size_t k = agent_count(msgs);
    const double total = std::accumulate(msgs.self_reports.begin(), msgs.self_reports.end(), 0.0);
    Outcome out{std::vector<double>(k), std::vector<double>(k, 0.0)};
    for (std::size_t i = 0; i < k; ++i) {
        out.reputations[i] = total > 0.0 ? msgs.self_reports[i] / total : 1.0 / double(k);
    }
    return out;
}

Outcome run_simple_avg(const MessageProfile& msgs, const MechanismContext& ctx) {
    const std::size_t k = agent_count(msgs);
    const ReportMatrix& cross = require_cross(msgs, "simple averaging");
    require_system(ctx, k);
    Outcome out{std::vector<double>(k), std::vector<double>(k, 0.0)};
    for (std::size_t i = 0; i < k; ++i) {
        out.reputations[i] = aggregate_with_system(cross, ctx.system_observations[i], i);
    }
    return out;
}

Outcome run_pr(const MessageProfile& msgs, const MechanismContext& ctx) {
    const auto* spec = std::get_if<PunishReward>(&ctx.spec);
    if (!spec || !(spec->a > 0.0)) throw Error(ErrorKind::InvalidArgument, "PR requires a > 0");
    const std::size_t k = agent_count(msgs);
    const ReportMatrix& cross = require_cross(msgs, "PR");
    require_system(ctx, k);
    const double eps = spec->a * ctx.sigma_prime;
    Outcome out{std::vector<double>(k), std::vector<double>(k, 0.0)};
    for (std::size_t i = 0; i < k; ++i) {
        const double agg = aggregate_with_system(cross, ctx.system_observations[i], i);
        out.reputations[i] = punish_reward(msgs.self_reports[i], agg, eps);
    }
    return out;
}

Outcome run_weighted_pr(const MessageProfile& msgs, const MechanismContext& ctx) {
    const auto* spec = std::get_if<WeightedPunishReward>(&ctx.spec);
    if (!spec || !(spec->a > 0.0)) throw Error(ErrorKind::InvalidArgument, "weighted PR requires a > 0");
    const std::size_t k = agent_count(msgs);
    const ReportMatrix& cross = require_cross(msgs, "weighted PR");
    const double eps = spec->a * ctx.sigma_prime;
    Outcome out{std::vector<double>(k), std::vector<double>(k, 0.0)};
    for (std::size_t i = 0; i < k; ++i) {
        const double agg = weighted_aggregate(cross, spec->weights, i);
        out.reputations[i] = punish_reward(msgs.self_reports[i], agg, eps);
    }
    return out;
}

Outcome run_direct_observation(const MechanismContext& ctx) {
    const std::size_t k = ctx.system_observations.size();
    return Outcome{ctx.system_observations, std::vector<double>(k, 0.0)};
}

Outcome run_mechanism(const MessageProfile& msgs, const MechanismContext& ctx) {
    struct Visitor {
        const MessageProfile& msgs;
        const MechanismContext& ctx;
        Outcome operator()(const AbsoluteScoring&) const { return run_as(msgs, ctx); }
        Outcome operator()(const ExtendedAbsoluteScoring&) const { return run_extended_as(msgs, ctx); }
        Outcome operator()(const FairRanking&) const { return run_fr(msgs, ctx); }
        Outcome operator()(const SimpleAveraging&) const { return run_simple_avg(msgs, ctx); }
        Outcome operator()(const PunishReward&) const { return run_pr(msgs, ctx); }
        Outcome operator()(const WeightedPunishReward&) const { return run_weighted_pr(msgs, ctx); }
        Outcome operator()(const DirectObservation&) const { return run_direct_observation(ctx); }
    };
    return std::visit(Visitor{msgs, ctx}, ctx.spec);
}

} // namespace repmech
