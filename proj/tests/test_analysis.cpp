#include "doctest.h"

#include "helpers.hpp"
#include "repmech/analysis.hpp"
#include "repmech/error.hpp"
#include "repmech/mechanisms.hpp"
#include "repmech/strategies.hpp"

#include <cmath>
#include <random>

using namespace repmech;
using namespace testing_support;

namespace {

const double kRootTwoOverPi = std::sqrt(2.0 / M_PI);

// K agents: `images` image users (qualities <= 0.5) then truth users, all with noise sigma.
Environment hetero_env(std::size_t k, std::size_t images, double sigma, double first_quality = 0.3) {
    std::vector<Agent> agents;
    for (std::size_t i = 0; i < k; ++i) {
        const double q = i == 0 ? first_quality : 0.2 + 0.03 * double(i % 10);
        agents.push_back(i < images ? image(int(i), q, sigma) : truth(int(i), q, sigma));
    }
    return env_of(agents, sigma);
}

} // namespace

TEST_CASE("mae_total") {
    const Environment env = env_of({truth(0, 0.5), truth(1, 0.5)});
    CHECK(mae_total(Outcome{{0.6, 0.4}, {0, 0}}, env) == doctest::Approx(0.2));
    CHECK(mae_total(Outcome{centralized_solution(env), {0, 0}}, env) == 0.0);
    CHECK_THROWS_AS(mae_total(Outcome{{0.1}, {0}}, env), Error);
}

TEST_CASE("punish-reward error curve") {
    const double s = 0.1;
    const double a_star = pr_optimal_a(s);
    CHECK(a_star == doctest::Approx(1.7).epsilon(0.1 / 1.7));
    CHECK(pr_mae(1.7, s) < averaging_mae(s));
    // Linear in sigma', so the argmin does not move.
    CHECK(pr_mae(1.7, 0.3) == doctest::Approx(3.0 * pr_mae(1.7, 0.1)).epsilon(1e-9));
    CHECK(pr_optimal_a(0.05) == doctest::Approx(a_star).epsilon(1e-4));
    CHECK_THROWS_AS(pr_mae(0.0, s), Error);
}

TEST_CASE("pr_mae agrees with Monte Carlo") {
    const double a = 1.7, s = 0.1, eps = a * s;
    const double x = eps * solve_y(a);
    std::mt19937_64 eng(4);
    std::normal_distribution<double> agg(0.0, s);
    const int n = 1000000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double m = agg(eng);
        const double r = std::abs(x - m) <= eps ? 0.5 * (x + m) : m - std::abs(m - x);
        sum += std::abs(r);
        sq += r * r;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(pr_mae(a, s) - mean) <= 3 * se);
}

TEST_CASE("mutually beneficial region") {
    const auto region = pr_mutual_benefit_region(0.1, {0.1, 2.0, 2.25, 2.5});
    CHECK(std::find(region.begin(), region.end(), 2.25) != region.end());
    CHECK(std::find(region.begin(), region.end(), 0.1) == region.end());
    std::vector<double> fine;
    for (double a = 2.2; a <= 2.3; a += 0.005) fine.push_back(a);
    CHECK(pr_mutual_benefit_region(0.1, fine).size() == fine.size());
}

TEST_CASE("pr curve rows") {
    const auto rows = pr_curve({1.0, 1.7, 2.25}, 0.5, 0.1);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.y > 0.0);
        CHECK(r.y < 1.0);
        CHECK(r.baseline == 0.5);
        CHECK(r.averaging_mae == doctest::Approx(kRootTwoOverPi * 0.1));
    }
    CHECK(rows[2].expected_reputation > 0.5);
}

TEST_CASE("individual rationality gain") {
    Environment env = truth_env({0.2, 0.5, 0.9}, 0.0);
    CHECK(as_ir_gain(env.agents[0], env) == 0.0);
    env = truth_env({0.2, 0.5, 0.9}, 0.1);
    env.agents[0].utility.f = AbsPower{1.0};
    CHECK(as_ir_gain(env.agents[0], env) == doctest::Approx(2 * kRootTwoOverPi * 0.1));
    env.agents[0].utility.f = AbsPower{2.0};
    CHECK(as_ir_gain(env.agents[0], env) == doctest::Approx(0.02));
    env.agents[0].utility.f = AbsPower{3.0};
    // E|Z|^3 = 2 sqrt(2/pi) sigma^3
    CHECK(as_ir_gain(env.agents[0], env) == doctest::Approx(2 * 2 * kRootTwoOverPi * 1e-3).epsilon(1e-8));
    CHECK_THROWS_AS(as_ir_gain(image(9, 0.2), env), Error);
}

TEST_CASE("truth participation, worked example") {
    const Environment env = hetero_env(11, 4, 0.35, 0.3);
    const auto rep = hetero_truth_participation(env);
    CHECK(rep.u_out == doctest::Approx(-1.225));
    CHECK(rep.u_in == doctest::Approx(-0.9));
    CHECK(rep.participates);
    CHECK(rep.rho == doctest::Approx(0.4));
    CHECK(rep.u_in_exact == doctest::Approx(rep.u_in)); // image qualities <= 1/2, no clamping

    const auto none = hetero_truth_participation(hetero_env(6, 0, 0.2));
    CHECK(none.u_in == 0.0);
    CHECK(none.participates);

    const Environment boundary = hetero_env(11, 4, std::sqrt(0.1));
    const auto b = hetero_truth_participation(boundary);
    CHECK(std::abs(b.u_in_simplified - b.u_out) <= 1e-12);
}

TEST_CASE("truth participation Monte Carlo columns agree") {
    const Environment env = hetero_env(6, 2, 0.2);
    const auto rep = hetero_truth_participation(env, 2, MonteCarloOptions{40000, 3, 1});
    REQUIRE(rep.u_in_mc.has_value());
    CHECK(std::abs(*rep.u_in_mc - rep.u_in_exact) <= 4 * *rep.u_in_mc_stderr);
    CHECK(*rep.u_out_mc == doctest::Approx(rep.u_out).epsilon(0.02));
    CHECK(*rep.participates_mc == rep.participates);
}

TEST_CASE("image participation thresholds") {
    // Low quality always participates.
    for (std::size_t truths : {0u, 3u, 10u}) {
        std::vector<Agent> agents{image(0, 0.3, 0.1)};
        for (std::size_t j = 0; j < 10; ++j) agents.push_back(j < truths ? truth(int(j + 1), 0.5, 0.1) : image(int(j + 1), 0.4, 0.1));
        const auto rep = hetero_image_participation(env_of(agents, 0.1), 0);
        CHECK(rep.participates);
        CHECK(rep.participates_simplified);
    }
    const auto high = [](std::size_t truths) {
        std::vector<Agent> agents{image(0, 0.9, 0.1)};
        for (std::size_t j = 0; j < 10; ++j) agents.push_back(j < truths ? truth(int(j + 1), 0.5, 0.1) : image(int(j + 1), 0.4, 0.1));
        return hetero_image_participation(env_of(agents, 0.1), 0);
    };
    CHECK(high(5).gamma == doctest::Approx(0.5));
    CHECK_FALSE(high(5).participates);
    CHECK_FALSE(high(5).participates_simplified);
    CHECK(high(3).participates);
    CHECK(high(3).participates_simplified);
}

TEST_CASE("system gain") {
    const auto gains = hetero_system_gain(hetero_env(11, 3, 0.25));
    CHECK(gains.rho == doctest::Approx(0.3));
    CHECK(gains.gains);
    CHECK(gains.gains_simplified);
    const auto loses = hetero_system_gain(hetero_env(11, 5, 0.1));
    CHECK_FALSE(loses.gains);
    CHECK_FALSE(loses.gains_simplified);
    const auto none = hetero_system_gain(hetero_env(5, 0, 0.1));
    CHECK(none.as_mae == 0.0);
    CHECK(none.gains);
}

TEST_CASE("collusion tax") {
    const double s = 0.1;
    CHECK(collusion_expected_tax(1.0, 0.0, Quality(0.4), s) == doctest::Approx(std::sqrt(2.0) * s * kRootTwoOverPi));
    CHECK(collusion_expected_tax(1.0, 0.3, Quality(0.4), s) > collusion_expected_tax(1.0, 0.0, Quality(0.4), s));
    CHECK_THROWS_AS(collusion_expected_tax(1.0, 0.0, Quality(0.4), 0.0), Error);
}

TEST_CASE("weighted variance check") {
    CHECK_FALSE(weighted_variance_check({0.7, 0.3}, {0.2, 0.2}));
    CHECK(weighted_variance_check({0.9, 0.1}, {0.1, 0.4}));
    CHECK(weighted_variance_check({0.25, 0.25, 0.25, 0.25}, {0.1, 0.2, 0.3, 0.4}));
    CHECK_THROWS_AS(weighted_variance_check({0.5, 0.5}, {0.1}), Error);
}
