#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "aimdalloc/aimd.hpp"
#include "aimdalloc/cost_model.hpp"
#include "aimdalloc/errors.hpp"
#include "aimdalloc/rng.hpp"

namespace aimdalloc {

/// When the control unit samples aggregate demand within a round.
///   fresh:   detect on the totals the agents just produced; the signal a
///            round computes reflects that round's allocations.
///   literal: detect on the totals from the start of the round, one step
///            staler, for fidelity experiments with a delayed control loop.
enum class SignalMode { fresh, literal };

inline std::string to_string(SignalMode mode) {
    return mode == SignalMode::fresh ? "fresh" : "literal";
}

/// Cost functions drawn from the three-branch camera family; each agent's
/// draw comes from a substream derived from (seed, agent index).
struct PaperCameraSpec {
    CoefficientRanges ranges;

    bool operator==(const PaperCameraSpec&) const = default;
};

/// Either the sampled camera family or an explicit per-agent list.
using CostSpec = std::variant<PaperCameraSpec, std::vector<CostFunction>>;

struct SimConfig {
    int n = 0;                        // agents
    int m = 0;                        // resources
    std::int64_t horizon = 0;         // total steps K
    std::vector<double> capacities;   // length m, > 0
    AimdParams params;
    std::uint64_t seed = 0;
    CostSpec cost_spec = PaperCameraSpec{};
    SignalMode signal_mode = SignalMode::fresh;
    std::int64_t snapshot_stride = 1;

    bool operator==(const SimConfig&) const = default;
};

/// All violations, each tagged with the offending field; empty means valid.
inline std::vector<std::string> validate(const SimConfig& config) {
    std::vector<std::string> violations;
    if (config.n < 1) violations.push_back("n: must be >= 1");
    if (config.m < 1) violations.push_back("m: must be >= 1");
    if (config.horizon < 1) violations.push_back("horizon: must be >= 1");
    if (config.capacities.size() != static_cast<std::size_t>(config.m))
        violations.push_back("capacities: expected length " + std::to_string(config.m) + ", got " +
                             std::to_string(config.capacities.size()));
    else
        for (std::size_t j = 0; j < config.capacities.size(); ++j)
            if (!(config.capacities[j] > 0.0))
                violations.push_back("capacities[" + std::to_string(j) + "]: must be > 0");
    if (config.m >= 1) config.params.validate(static_cast<std::size_t>(config.m), "params", violations);
    if (config.snapshot_stride < 1) violations.push_back("snapshot_stride: must be >= 1");

    if (const auto* camera = std::get_if<PaperCameraSpec>(&config.cost_spec)) {
        camera->ranges.validate("cost_spec.ranges", violations);
        if (config.m != 3)
            violations.push_back("cost_spec: the camera family is defined for m = 3, got m = " +
                                 std::to_string(config.m));
    } else {
        const auto& costs = std::get<std::vector<CostFunction>>(config.cost_spec);
        if (costs.size() != static_cast<std::size_t>(config.n))
            violations.push_back("cost_spec.agents: expected " + std::to_string(config.n) +
                                 " cost functions, got " + std::to_string(costs.size()));
        for (std::size_t i = 0; i < costs.size(); ++i)
            if (costs[i].resource_count() != config.m)
                violations.push_back("cost_spec.agents[" + std::to_string(i) +
                                     "]: resource_count " + std::to_string(costs[i].resource_count()) +
                                     " does not match m = " + std::to_string(config.m));
    }
    return violations;
}

/// The per-agent cost functions a config denotes. Deterministic in the seed;
/// used by both the simulator and the centralized solver so they always see
/// the same costs.
inline std::vector<CostFunction> instantiate_costs(const SimConfig& config) {
    if (const auto* camera = std::get_if<PaperCameraSpec>(&config.cost_spec)) {
        std::vector<CostFunction> costs;
        costs.reserve(static_cast<std::size_t>(config.n));
        for (int i = 0; i < config.n; ++i) {
            Rng stream(derive_stream_seed(config.seed, kCostStreamTag, static_cast<std::uint64_t>(i)));
            costs.push_back(sample_paper_cost(stream, camera->ranges));
        }
        return costs;
    }
    return std::get<std::vector<CostFunction>>(config.cost_spec);
}

struct SimState {
    std::vector<AgentState> agents;
    CapacitySignals signals;
    std::int64_t step = 0;
    std::int64_t clamp_count = 0;
    std::int64_t guard_count = 0;             // zero-average probability guards
    std::vector<std::int64_t> event_counts;   // cumulative signal bits per resource

    // Runtime companions of the observable state above.
    std::vector<CostFunction> costs;
    std::vector<Rng> streams;                  // one private substream per agent
    std::vector<std::vector<double>> xbar_peak;  // per agent, running max of xbar

    bool operator==(const SimState&) const = default;
};

/// Fresh state at step 0: x = xbar = 0 for every agent, all signals 0, and
/// per-agent substreams derived from (seed, agent index).
inline SimState init(const SimConfig& config) {
    if (auto violations = validate(config); !violations.empty())
        throw ConfigError(std::move(violations));

    SimState state;
    state.costs = instantiate_costs(config);
    state.agents.assign(static_cast<std::size_t>(config.n),
                        AgentState{std::vector<double>(static_cast<std::size_t>(config.m), 0.0),
                                   std::vector<double>(static_cast<std::size_t>(config.m), 0.0), 0});
    state.signals.s.assign(static_cast<std::size_t>(config.m), 0);
    state.event_counts.assign(static_cast<std::size_t>(config.m), 0);
    state.streams.reserve(static_cast<std::size_t>(config.n));
    for (int i = 0; i < config.n; ++i)
        state.streams.emplace_back(
            derive_stream_seed(config.seed, kAgentStreamTag, static_cast<std::uint64_t>(i)));
    state.xbar_peak.assign(static_cast<std::size_t>(config.n),
                           std::vector<double>(static_cast<std::size_t>(config.m), 0.0));
    return state;
}

namespace detail {

inline std::vector<double> column_totals(const std::vector<AgentState>& agents, std::size_t m,
                                         bool average) {
    std::vector<double> totals(m, 0.0);
    for (const auto& agent : agents) {
        const auto& v = average ? agent.xbar : agent.x;
        for (std::size_t j = 0; j < m; ++j) totals[j] += v[j];
    }
    return totals;
}

}  // namespace detail

/// One synchronous round: every agent steps against the current signal
/// vector, then the control unit recomputes the signals from the aggregate
/// demand (just-updated in fresh mode, start-of-round in literal mode) and
/// the event counters advance.
inline void round(SimState& state, const SimConfig& config) {
    const std::size_t m = static_cast<std::size_t>(config.m);

    std::vector<double> detect_totals;
    if (config.signal_mode == SignalMode::literal)
        detect_totals = detail::column_totals(state.agents, m, /*average=*/false);

    StepCounters counters;
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
        state.agents[i] = agent_step(state.agents[i], state.signals, state.costs[i], config.params,
                                     state.streams[i], &counters);
        auto& peak = state.xbar_peak[i];
        for (std::size_t j = 0; j < m; ++j)
            if (state.agents[i].xbar[j] > peak[j]) peak[j] = state.agents[i].xbar[j];
    }
    state.clamp_count += counters.clamped;
    state.guard_count += counters.zero_average_guards;

    if (config.signal_mode == SignalMode::fresh)
        detect_totals = detail::column_totals(state.agents, m, /*average=*/false);
    state.signals = detect_capacity_events(detect_totals, config.capacities, config.params.gamma_soft);
    for (std::size_t j = 0; j < m; ++j) state.event_counts[j] += state.signals.s[j];

    ++state.step;
}

/// Aggregate view of one completed step.
struct TraceRecord {
    std::int64_t step = 0;
    std::vector<double> total_x;     // per resource, sum over agents
    std::vector<double> total_xbar;  // per resource, sum over agents
    std::vector<std::uint8_t> signals;

    bool operator==(const TraceRecord&) const = default;
};

struct AgentSnapshot {
    std::int64_t step = 0;
    int agent = 0;
    std::vector<double> x;
    std::vector<double> xbar;

    bool operator==(const AgentSnapshot&) const = default;
};

/// Everything a run produces: one record per step, per-agent snapshots every
/// snapshot_stride steps, and the final full state.
struct Trace {
    std::vector<TraceRecord> records;
    std::vector<AgentSnapshot> snapshots;
    SimState final_state;

    bool operator==(const Trace&) const = default;
};

/// Runs the full horizon from a fresh init. A pure function of the config.
inline Trace run(const SimConfig& config) {
    SimState state = init(config);
    Trace trace;
    trace.records.reserve(static_cast<std::size_t>(config.horizon));

    const std::size_t m = static_cast<std::size_t>(config.m);
    for (std::int64_t r = 0; r < config.horizon; ++r) {
        round(state, config);
        TraceRecord record;
        record.step = state.step;
        record.total_x = detail::column_totals(state.agents, m, /*average=*/false);
        record.total_xbar = detail::column_totals(state.agents, m, /*average=*/true);
        record.signals = state.signals.s;
        trace.records.push_back(std::move(record));

        if (state.step % config.snapshot_stride == 0) {
            for (std::size_t i = 0; i < state.agents.size(); ++i)
                trace.snapshots.push_back(AgentSnapshot{state.step, static_cast<int>(i),
                                                        state.agents[i].x, state.agents[i].xbar});
        }
    }
    trace.final_state = std::move(state);
    return trace;
}

}  // namespace aimdalloc
