#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "aimdalloc/aimd.hpp"
#include "aimdalloc/cost_model.hpp"
#include "aimdalloc/rng.hpp"

using namespace aimdalloc;

namespace {

AimdParams paper_like_params(std::size_t m) {
    AimdParams p;
    p.alpha.assign(m, 0.025);
    p.beta.assign(m, 0.70);
    p.delta.assign(m, 1.0 / 90.0);
    p.gamma_norm = gamma_from_delta(p.delta);
    p.gamma_soft.assign(m, 1.0);
    return p;
}

}  // namespace

TEST_CASE("gamma_from_delta returns the class constant itself") {
    const std::vector<double> delta{1.0 / 90.0, 1.0 / 90.0, 1.0 / 90.0};
    const auto gamma = gamma_from_delta(delta);
    REQUIRE(gamma == delta);

    const auto single = gamma_from_delta(std::vector<double>{0.5});
    REQUIRE(single[0] == 0.5);
    REQUIRE(single[0] > 0.0);
    REQUIRE(single[0] <= 0.5);

    REQUIRE_THROWS_AS(gamma_from_delta(std::vector<double>{0.0}), ConfigError);
    REQUIRE_THROWS_AS(gamma_from_delta(std::vector<double>{1.0, -2.0}), ConfigError);
}

TEST_CASE("response_probability: quadratic cancellation gives 2 a gamma") {
    const CostFunction f(1, {{10.0, {2}}});
    const auto lambda = response_probability(f, std::vector<double>{0.5},
                                             std::vector<double>{1.0 / 90.0});
    REQUIRE(lambda[0] == Catch::Approx(2.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("response_probability: zero average guard") {
    const CostFunction f(1, {{10.0, {2}}});
    StepCounters counters;
    const auto lambda =
        response_probability(f, std::vector<double>{0.0}, std::vector<double>{1.0 / 90.0}, &counters);
    REQUIRE(lambda[0] == 0.0);
    REQUIRE(counters.zero_average_guards == 1);
    REQUIRE(counters.clamped == 0);
}

TEST_CASE("response_probability: out-of-range values are clamped and counted") {
    const CostFunction f(1, {{1e6, {2}}});  // lambda = 2e6/90 >> 1
    StepCounters counters;
    const auto lambda =
        response_probability(f, std::vector<double>{0.5}, std::vector<double>{1.0 / 90.0}, &counters);
    REQUIRE(counters.clamped == 1);
    REQUIRE(lambda[0] == Catch::Approx(1.0 - kLambdaMin));

    // Zero gradient with positive average clamps up to the floor.
    const CostFunction g(2, {{1.0, {0, 2}}});
    StepCounters counters2;
    const auto lambda2 = response_probability(g, std::vector<double>{0.5, 0.5},
                                              std::vector<double>{0.01, 0.01}, &counters2);
    REQUIRE(lambda2[0] == kLambdaMin);
    REQUIRE(counters2.clamped == 1);
}

TEST_CASE("agent_step: additive increase from the origin") {
    AimdParams params = paper_like_params(3);
    params.alpha = {0.025, 0.002, 0.0225};
    const CostFunction f(3, {{10.0, {2, 0, 0}}, {10.0, {0, 2, 0}}, {10.0, {0, 0, 2}}});
    AgentState state{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 0};
    Rng rng(1);
    const AgentState next = agent_step(state, CapacitySignals{{0, 0, 0}}, f, params, rng);
    REQUIRE(next.x == std::vector<double>{0.025, 0.002, 0.0225});
    REQUIRE(next.k == 1);
    // xbar(1) = (1 * 0 + x(1)) / 2
    REQUIRE(next.xbar[0] == Catch::Approx(0.0125));
    REQUIRE(next.xbar[1] == Catch::Approx(0.001));
    REQUIRE(next.xbar[2] == Catch::Approx(0.01125));
}

TEST_CASE("agent_step: certain response scales by beta, certain non-response holds") {
    AimdParams params = paper_like_params(1);
    AgentState state{{1.0}, {0.5}, 3};
    Rng rng(17);

    // lambda clamps to 1 - 1e-9: the Bernoulli draw responds.
    const CostFunction steep(1, {{1e9, {2}}});
    const AgentState down = agent_step(state, CapacitySignals{{1}}, steep, params, rng);
    REQUIRE(down.x[0] == Catch::Approx(0.70 * 1.0));

    // lambda ~ 4.4e-13: the draw never responds.
    const CostFunction flat(1, {{1e-11, {2}}});
    Rng rng2(17);
    const AgentState held = agent_step(state, CapacitySignals{{1}}, flat, params, rng2);
    REQUIRE(held.x[0] == 1.0);
}

TEST_CASE("agent_step: beta = 0 drops a responding agent to exactly zero") {
    AimdParams params = paper_like_params(1);
    params.beta = {0.0};
    AgentState state{{0.8}, {0.4}, 5};
    Rng rng(3);
    const CostFunction steep(1, {{1e9, {2}}});
    const AgentState next = agent_step(state, CapacitySignals{{1}}, steep, params, rng);
    REQUIRE(next.x[0] == 0.0);
}

TEST_CASE("agent_step consumes one Bernoulli draw per signaled resource, in order") {
    AimdParams params = paper_like_params(3);
    params.beta = {0.5, 0.6, 0.7};
    const CostFunction f(3, {{10.0, {2, 0, 0}}, {20.0, {0, 2, 0}}, {30.0, {0, 0, 2}}});
    const AgentState state{{1.0, 1.0, 1.0}, {0.5, 0.5, 0.5}, 9};
    const CapacitySignals signals{{1, 0, 1}};

    Rng rng(2718);
    Rng replica(2718);
    const AgentState next = agent_step(state, signals, f, params, rng);

    // Replay the documented stream discipline by hand.
    const auto grad = f.gradient(state.xbar);
    const double lam1 = params.gamma_norm[0] * grad[0] / state.xbar[0];
    const double lam3 = params.gamma_norm[2] * grad[2] / state.xbar[2];
    const double expected1 = replica.bernoulli(lam1) ? params.beta[0] * state.x[0] : state.x[0];
    const double expected3 = replica.bernoulli(lam3) ? params.beta[2] * state.x[2] : state.x[2];
    REQUIRE(next.x[0] == expected1);
    REQUIRE(next.x[1] == state.x[1] + params.alpha[1]);
    REQUIRE(next.x[2] == expected3);
    REQUIRE(rng == replica);  // nothing else was consumed
}

TEST_CASE("agent_step: under a signal the allocation never grows") {
    AimdParams params = paper_like_params(2);
    Rng rng(11);
    Rng cost_rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const CostFunction f(2, {{1.0 + 30.0 * cost_rng.next_double(), {2, 0}},
                                 {1.0 + 30.0 * cost_rng.next_double(), {0, 2}}});
        AgentState state{{rng.next_double() * 2.0, rng.next_double() * 2.0},
                         {0.1 + rng.next_double(), 0.1 + rng.next_double()},
                         trial};
        const CapacitySignals signals{{1, 1}};
        const AgentState next = agent_step(state, signals, f, params, rng);
        for (int j = 0; j < 2; ++j) {
            const bool held = next.x[j] == state.x[j];
            const bool scaled = next.x[j] == params.beta[j] * state.x[j];
            REQUIRE((held || scaled));
            REQUIRE(next.x[j] >= 0.0);
            REQUIRE(next.x[j] <= state.x[j]);
        }
    }
}

TEST_CASE("agent_step is deterministic given identical stream state") {
    AimdParams params = paper_like_params(1);
    const CostFunction f(1, {{12.0, {2}}});
    const AgentState state{{0.7}, {0.3}, 4};
    Rng a(5), b(5);
    REQUIRE(agent_step(state, CapacitySignals{{1}}, f, params, a) ==
            agent_step(state, CapacitySignals{{1}}, f, params, b));
}

TEST_CASE("update_average: first step and constants") {
    const auto first = update_average(std::vector<double>{0.0}, std::vector<double>{0.025}, 0);
    REQUIRE(first[0] == Catch::Approx(0.0125));

    std::vector<double> xbar{0.3};
    for (int k = 0; k < 50; ++k) xbar = update_average(xbar, std::vector<double>{0.3}, k);
    REQUIRE(xbar[0] == Catch::Approx(0.3).margin(1e-12));
}

TEST_CASE("update_average reproduces the batch mean of the whole sequence") {
    Rng rng(77);
    std::vector<double> sequence{rng.next_double()};
    std::vector<double> xbar{sequence[0]};  // xbar(0) = x(0)
    for (int k = 0; k < 200; ++k) {
        sequence.push_back(2.0 * rng.next_double());
        xbar = update_average(xbar, std::vector<double>{sequence.back()}, k);
        double mean = 0.0;
        for (double v : sequence) mean += v;
        mean /= static_cast<double>(sequence.size());
        REQUIRE(std::abs(xbar[0] - mean) < 1e-12);
    }
}

TEST_CASE("detect_capacity_events: strict threshold") {
    const std::vector<double> capacities{32.0, 20.0, 25.0};
    const std::vector<double> soft{1.0, 1.0, 1.0};
    const auto s = detect_capacity_events(std::vector<double>{33.0, 19.0, 26.0}, capacities, soft);
    REQUIRE(s.s == std::vector<std::uint8_t>{1, 0, 1});

    // Equality does not trigger.
    const auto at = detect_capacity_events(std::vector<double>{32.0, 20.0, 25.0}, capacities, soft);
    REQUIRE(at.s == std::vector<std::uint8_t>{0, 0, 0});

    // Softened capacity: 29 > 0.9 * 32 = 28.8.
    const auto softened = detect_capacity_events(std::vector<double>{29.0}, std::vector<double>{32.0},
                                                 std::vector<double>{0.9});
    REQUIRE(softened.s == std::vector<std::uint8_t>{1});
}

TEST_CASE("AimdParams validation catches every violation at once") {
    AimdParams params = paper_like_params(2);
    params.alpha[0] = 0.0;
    params.beta[1] = 1.0;
    params.gamma_norm[0] = params.delta[0] * 2.0;  // above the class constant
    params.gamma_soft[1] = 1.5;
    std::vector<std::string> violations;
    params.validate(2, "params", violations);
    REQUIRE(violations.size() == 4);
}
