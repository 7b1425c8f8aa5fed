#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aimdalloc/cost_model.hpp"
#include "aimdalloc/errors.hpp"
#include "aimdalloc/rng.hpp"

namespace aimdalloc {

/// Per-resource AIMD parameters, broadcast once to every agent.
///
/// alpha:      additive increase per step (normalized resource units)
/// beta:       multiplicative decrease factor in [0, 1)
/// gamma_norm: normalization factor scaling the response probability;
///             valid probabilities require 0 < gamma_norm_j <= delta_j
/// delta:      class constant of the admissible cost set
/// gamma_soft: fraction of capacity at which the control unit already
///             signals (1 = signal only above capacity)
struct AimdParams {
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> gamma_norm;
    std::vector<double> delta;
    std::vector<double> gamma_soft;

    bool operator==(const AimdParams&) const = default;

    void validate(std::size_t m, const std::string& path, std::vector<std::string>& violations) const {
        const auto check_len = [&](const std::vector<double>& v, const char* name) {
            if (v.size() != m) {
                violations.push_back(path + "." + name + ": expected length " + std::to_string(m) +
                                     ", got " + std::to_string(v.size()));
                return false;
            }
            return true;
        };
        if (check_len(alpha, "alpha"))
            for (std::size_t j = 0; j < m; ++j)
                if (!(alpha[j] > 0.0))
                    violations.push_back(path + ".alpha[" + std::to_string(j) + "]: must be > 0");
        if (check_len(beta, "beta"))
            for (std::size_t j = 0; j < m; ++j)
                if (!(beta[j] >= 0.0 && beta[j] < 1.0))
                    violations.push_back(path + ".beta[" + std::to_string(j) + "]: must be in [0, 1)");
        const bool have_delta = check_len(delta, "delta");
        if (have_delta)
            for (std::size_t j = 0; j < m; ++j)
                if (!(delta[j] > 0.0))
                    violations.push_back(path + ".delta[" + std::to_string(j) + "]: must be > 0");
        if (check_len(gamma_norm, "gamma_norm") && have_delta)
            for (std::size_t j = 0; j < m; ++j)
                if (!(gamma_norm[j] > 0.0 && gamma_norm[j] <= delta[j]))
                    violations.push_back(path + ".gamma_norm[" + std::to_string(j) +
                                         "]: must satisfy 0 < gamma_norm <= delta (delta = " +
                                         std::to_string(delta[j]) + ")");
        if (check_len(gamma_soft, "gamma_soft"))
            for (std::size_t j = 0; j < m; ++j)
                if (!(gamma_soft[j] > 0.0 && gamma_soft[j] <= 1.0))
                    violations.push_back(path + ".gamma_soft[" + std::to_string(j) +
                                         "]: must be in (0, 1]");
    }
};

/// One agent's view of the system: instantaneous allocation x, running
/// average xbar, and the number of completed steps k.
struct AgentState {
    std::vector<double> x;
    std::vector<double> xbar;
    std::int64_t k = 0;

    bool operator==(const AgentState&) const = default;
};

/// Per-resource one-bit capacity event signals; the only channel from the
/// control unit to the agents.
struct CapacitySignals {
    std::vector<std::uint8_t> s;

    bool operator==(const CapacitySignals&) const = default;
};

/// Diagnostic counters filled in by the response-probability path.
struct StepCounters {
    std::int64_t clamped = 0;              // computed probability fell outside (0, 1)
    std::int64_t zero_average_guards = 0;  // xbar^j = 0, probability defined as 0
};

/// The largest admissible normalization factor for a given class constant:
/// within the admissible cost set, x^j / grad_j(x) > delta_j pointwise, so
/// the infimum over the class is delta_j itself.
inline std::vector<double> gamma_from_delta(std::span<const double> delta) {
    std::vector<std::string> violations;
    for (std::size_t j = 0; j < delta.size(); ++j)
        if (!(delta[j] > 0.0))
            violations.push_back("delta[" + std::to_string(j) + "]: must be > 0");
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return {delta.begin(), delta.end()};
}

inline constexpr double kLambdaMin = 1e-9;

namespace detail {

// lambda^j = gamma_norm_j * grad_j(xbar) / xbar^j, guarded at xbar^j = 0 and
// clamped into [kLambdaMin, 1 - kLambdaMin] when the raw value is not a valid
// probability. Clamping is counted rather than fatal so that runs with costs
// outside the admissible class remain observable.
inline double lambda_component(double gamma_norm_j, double grad_j, double xbar_j,
                               StepCounters* counters) {
    if (!(xbar_j > 0.0)) {
        if (counters) ++counters->zero_average_guards;
        return 0.0;
    }
    double lam = gamma_norm_j * grad_j / xbar_j;
    if (!(lam > 0.0 && lam < 1.0)) {
        if (counters) ++counters->clamped;
        if (!(lam >= kLambdaMin))
            lam = kLambdaMin;
        else if (!(lam <= 1.0 - kLambdaMin))
            lam = 1.0 - kLambdaMin;
    }
    return lam;
}

}  // namespace detail

/// Probability, per resource, that the agent responds to a capacity event by
/// shrinking its demand. Evaluated at the running average allocation.
inline std::vector<double> response_probability(const CostFunction& f,
                                                std::span<const double> xbar,
                                                std::span<const double> gamma_norm,
                                                StepCounters* counters = nullptr) {
    const std::vector<double> grad = f.gradient(xbar);
    std::vector<double> lambda(xbar.size(), 0.0);
    for (std::size_t j = 0; j < xbar.size(); ++j)
        lambda[j] = detail::lambda_component(gamma_norm[j], grad[j], xbar[j], counters);
    return lambda;
}

/// Running-average recursion: xbar(k+1) = ((k+1) * xbar(k) + x(k+1)) / (k+2).
/// Applied from xbar(0) = x(0) this reproduces the batch mean of x(0..k+1).
inline std::vector<double> update_average(std::span<const double> xbar_k,
                                          std::span<const double> x_next, std::int64_t k) {
    const double kk = static_cast<double>(k);
    std::vector<double> out(xbar_k.size());
    for (std::size_t j = 0; j < xbar_k.size(); ++j)
        out[j] = ((kk + 1.0) * xbar_k[j] + x_next[j]) / (kk + 2.0);
    return out;
}

/// One synchronous step of a single agent.
///
/// Per resource j, independently:
///   signal 0: additive increase,        x'^j = x^j + alpha^j
///   signal 1: Bernoulli response draw;  x'^j = beta^j * x^j on response,
///             unchanged otherwise
/// then the running average advances and k increments.
///
/// Stream discipline: exactly one Bernoulli variate is consumed per resource
/// whose signal bit is set, in resource order. The response probability is
/// computed only for signaled resources.
inline AgentState agent_step(const AgentState& state, const CapacitySignals& signals,
                             const CostFunction& f, const AimdParams& params, Rng& rng,
                             StepCounters* counters = nullptr) {
    const std::size_t m = state.x.size();
    if (signals.s.size() != m) throw DimensionError("signals", m, signals.s.size());

    AgentState next;
    next.x.resize(m);

    std::vector<double> grad;  // computed once, on first signaled resource
    for (std::size_t j = 0; j < m; ++j) {
        if (signals.s[j]) {
            if (grad.empty()) grad = f.gradient(state.xbar);
            const double lam =
                detail::lambda_component(params.gamma_norm[j], grad[j], state.xbar[j], counters);
            next.x[j] = rng.bernoulli(lam) ? params.beta[j] * state.x[j] : state.x[j];
        } else {
            next.x[j] = state.x[j] + params.alpha[j];
        }
    }

    next.xbar = update_average(state.xbar, next.x, state.k);
    next.k = state.k + 1;
    return next;
}

/// Control unit: signal bit j is set iff aggregate demand strictly exceeds
/// the (softened) capacity gamma_soft_j * C^j.
inline CapacitySignals detect_capacity_events(std::span<const double> total_demand,
                                              std::span<const double> capacities,
                                              std::span<const double> gamma_soft) {
    CapacitySignals out;
    out.s.resize(total_demand.size());
    for (std::size_t j = 0; j < total_demand.size(); ++j)
        out.s[j] = total_demand[j] > gamma_soft[j] * capacities[j] ? 1 : 0;
    return out;
}

}  // namespace aimdalloc
