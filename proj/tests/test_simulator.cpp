#include "doctest.h"

#include "helpers.hpp"
#include "repmech/error.hpp"
#include "repmech/simulator.hpp"

#include <cmath>

using namespace repmech;
using namespace testing_support;

namespace {

ScenarioConfig scenario(const Environment& env, MechanismSpec spec, std::size_t trials = 4000, unsigned workers = 1) {
    ScenarioConfig c;
    c.env = env;
    c.mechanism = std::move(spec);
    c.trials = trials;
    c.seed = 11;
    c.workers = workers;
    return c;
}

Environment ten_truth(double sigma) {
    std::vector<double> q;
    for (int i = 0; i < 10; ++i) q.push_back(0.1 + 0.08 * i);
    return truth_env(q, sigma);
}

} // namespace

TEST_CASE("absolute scoring with truth users is exact and balanced") {
    const auto stats = run_trials(scenario(ten_truth(0.1), AbsoluteScoring{}));
    CHECK(stats.trials == 4000);
    CHECK(stats.mae_mean <= 1e-12);
    CHECK(stats.budget_max_abs <= 1e-10);
    CHECK(stats.per_agent_reputation_mean.size() == 10);
    CHECK(stats.per_agent_reputation_mean[3] == doctest::Approx(0.34));
}

TEST_CASE("direct observation error matches the folded normal mean") {
    const double sigma = 0.05;
    const auto stats = run_trials(scenario(ten_truth(sigma), DirectObservation{}, 20000));
    CHECK(stats.mae_mean == doctest::Approx(std::sqrt(2.0 / M_PI) * 10 * sigma).epsilon(0.02));
}

TEST_CASE("results do not depend on the worker count") {
    Environment env = ten_truth(0.1);
    env.agents[2] = image(2, 0.3, 0.1);
    const auto a = run_trials(scenario(env, SimpleAveraging{}, 3000, 1));
    const auto b = run_trials(scenario(env, SimpleAveraging{}, 3000, 3));
    CHECK(a.mae_mean == b.mae_mean);
    CHECK(a.per_agent_utility_mean == b.per_agent_utility_mean);
    CHECK(a.budget_mean == b.budget_mean);
}

TEST_CASE("scenario validation") {
    auto c = scenario(ten_truth(0.1), AbsoluteScoring{});
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = scenario(env_of({truth(0, 0.5)}), AbsoluteScoring{});
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("punish-reward sweep reports closed forms") {
    const auto rows = sweep(scenario(ten_truth(0.1), PunishReward{}, 500), SweepParameter::PrA, {1.0, 1.7, 2.25});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.y.has_value());
        CHECK(r.e_m.has_value());
        CHECK(r.expected_gain.has_value());
        CHECK(r.sigma_prime > 0.0);
    }
    CHECK(*rows[2].expected_gain > 0.0);
    CHECK_THROWS_AS(sweep(scenario(ten_truth(0.1), PunishReward{}, 10), SweepParameter::PrA, {}), Error);
    CHECK_THROWS_AS(sweep(scenario(ten_truth(0.1), PunishReward{}, 10), SweepParameter::PrA, {2.0, 1.0, 3.0}), Error);
}

TEST_CASE("sweep parameter names") {
    CHECK(parse_sweep_parameter("pr-a") == SweepParameter::PrA);
    CHECK(parse_sweep_parameter("sigma") == SweepParameter::Sigma);
    CHECK(parse_sweep_parameter("rho") == SweepParameter::Rho);
    CHECK_FALSE(parse_sweep_parameter("beta").has_value());
    const auto c = apply_sweep_value(scenario(ten_truth(0.1), AbsoluteScoring{}), SweepParameter::Rho, 1.0 / 3);
    int images = 0;
    for (const auto& a : c.env.agents) images += a.type == AgentType::image();
    CHECK(images == 3);
}

TEST_CASE("collusion scenarios") {
    const Environment env = ten_truth(0.1);
    const auto empty = run_collusion_scenario(env, {}, 2000, 5);
    CHECK(empty.clique_size == 0);
    CHECK(empty.two_layer.system_mae == doctest::Approx(empty.honest_two_layer.system_mae));

    const auto pair = run_collusion_scenario(env, {1, 2}, 4000, 5);
    CHECK(pair.clique_size == 2);
    CHECK(pair.two_layer.clique_tax_mean >= pair.honest_two_layer.clique_tax_mean);
    CHECK(pair.one_layer.clique_utility_mean > pair.two_layer.clique_utility_mean);

    std::vector<int> big{0, 1, 2, 3, 4, 5, 6, 7, 8};
    CHECK_THROWS_AS(run_collusion_scenario(env, big, 10, 5), Error);
    CHECK_THROWS_AS(run_collusion_scenario(env, {3, 42}, 10, 5), Error);
}

TEST_CASE("malicious reporters versus image users") {
    Environment env = ten_truth(0.1);
    const auto none = run_malicious_scenario(env, {}, 3000, 2);
    CHECK(none.malicious_mae == doctest::Approx(none.baseline_mae));
    const auto two = run_malicious_scenario(env, {0, 9}, 3000, 2);
    CHECK(two.slots == 2);
    CHECK(two.malicious_gross_tax > 0.0);
    CHECK(two.malicious_mae > two.baseline_mae);
    // Low-quality slots: image users inflate by a full half unit, uniform
    // reporters miss by (r^2 + (1 - r)^2) / 2 on average.
    const auto low = run_malicious_scenario(env, {0, 1}, 3000, 2);
    CHECK(low.image_mae >= low.malicious_mae);
}
