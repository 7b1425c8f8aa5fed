#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "aimdalloc/errors.hpp"
#include "aimdalloc/oracle.hpp"
#include "aimdalloc/simulator.hpp"

namespace aimdalloc {

struct SpreadStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
    double min = 0.0;
    double max = 0.0;

    bool operator==(const SpreadStats&) const = default;
};

struct SpreadCheckpoint {
    std::int64_t step = 0;
    std::vector<SpreadStats> per_resource;

    bool operator==(const SpreadCheckpoint&) const = default;
};

struct MetricsReport {
    std::vector<std::vector<double>> abs_error;  // n x m, |xbar_i^j(K) - x*_i^j|
    std::vector<double> rel_error;               // per resource
    double cost_ratio = 0.0;
    std::vector<SpreadCheckpoint> gradient_spread_series;
    std::vector<double> utilization;             // per resource
    std::vector<std::int64_t> event_counts;      // per resource
    std::vector<double> event_count_r2;          // per resource
    std::int64_t clamp_count = 0;

    bool operator==(const MetricsReport&) const = default;
};

namespace detail {

inline void check_same_shape(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b, const char* context) {
    if (a.size() != b.size()) throw DimensionError(context, a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].size() != b[i].size()) throw DimensionError(context, a[i].size(), b[i].size());
}

}  // namespace detail

/// Per resource: sum_i |xbar_i^j - x*_i^j| / sum_i x*_i^j.
inline std::vector<double> relative_error(const std::vector<std::vector<double>>& xbar_final,
                                          const std::vector<std::vector<double>>& x_star) {
    detail::check_same_shape(xbar_final, x_star, "relative_error");
    const std::size_t m = x_star.empty() ? 0 : x_star.front().size();
    std::vector<double> num(m, 0.0), den(m, 0.0);
    for (std::size_t i = 0; i < x_star.size(); ++i)
        for (std::size_t j = 0; j < m; ++j) {
            num[j] += std::abs(xbar_final[i][j] - x_star[i][j]);
            den[j] += x_star[i][j];
        }
    std::vector<double> out(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (!(den[j] > 0.0))
            throw std::invalid_argument("relative_error: optimal allocations for resource " +
                                        std::to_string(j + 1) + " sum to zero");
        out[j] = num[j] / den[j];
    }
    return out;
}

/// Total cost at the average allocations over total cost at the optimum.
inline double cost_ratio(const std::vector<CostFunction>& costs,
                         const std::vector<std::vector<double>>& xbar_final,
                         const std::vector<std::vector<double>>& x_star) {
    detail::check_same_shape(xbar_final, x_star, "cost_ratio");
    double at_average = 0.0, at_optimum = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        at_average += costs[i].evaluate(xbar_final[i]);
        at_optimum += costs[i].evaluate(x_star[i]);
    }
    if (!(at_optimum > 0.0)) throw std::invalid_argument("cost_ratio: optimal total cost is zero");
    return at_average / at_optimum;
}

/// Statistics of the per-agent partial derivatives at the given averages,
/// one entry per resource.
inline std::vector<SpreadStats> gradient_spread(const std::vector<CostFunction>& costs,
                                                const std::vector<std::vector<double>>& xbar) {
    const std::size_t n = costs.size();
    if (xbar.size() != n) throw DimensionError("gradient_spread", n, xbar.size());
    const std::size_t m = xbar.empty() ? 0 : xbar.front().size();

    std::vector<std::vector<double>> grads(n);
    for (std::size_t i = 0; i < n; ++i) grads[i] = costs[i].gradient(xbar[i]);

    std::vector<SpreadStats> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            sum += grads[i][j];
            lo = std::min(lo, grads[i][j]);
            hi = std::max(hi, grads[i][j]);
        }
        const double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = grads[i][j] - mean;
            var += d * d;
        }
        out[j] = SpreadStats{mean, std::sqrt(var / static_cast<double>(n)), lo, hi};
    }
    return out;
}

/// Coefficient of determination of a least-squares line through the
/// (step, cumulative count) checkpoints. A constant series fits exactly and
/// yields 1.
inline double event_count_linearity(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& checkpoints) {
    if (checkpoints.size() < 3)
        throw std::invalid_argument("event_count_linearity: need at least 3 checkpoints");
    const double n = static_cast<double>(checkpoints.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [step, count] : checkpoints) {
        const double x = static_cast<double>(step);
        const double y = static_cast<double>(count);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / n;

    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (const auto& [step, count] : checkpoints) {
        const double y = static_cast<double>(count);
        const double fit = slope * static_cast<double>(step) + intercept;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    if (ss_tot == 0.0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

/// Per resource: sum_i xbar_i^j / C^j.
inline std::vector<double> utilization(const std::vector<std::vector<double>>& xbar_final,
                                       std::span<const double> capacities) {
    const std::size_t m = capacities.size();
    std::vector<double> out(m, 0.0);
    for (const auto& row : xbar_final) {
        if (row.size() != m) throw DimensionError("utilization", m, row.size());
        for (std::size_t j = 0; j < m; ++j) out[j] += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) out[j] /= capacities[j];
    return out;
}

/// Assembles the full report from a finished run and its oracle solution.
/// Pure in its inputs; recomputation reproduces the report bit for bit.
///
/// Gradient-spread checkpoints are the trace's snapshot steps. Event-count
/// checkpoints sit at multiples of checkpoint_stride; short runs fall back to
/// every step, and a run too short for a line fit reports 1.
inline MetricsReport build_metrics_report(const Trace& trace,
                                          const std::vector<CostFunction>& costs,
                                          const OracleSolution& solution,
                                          std::span<const double> capacities,
                                          std::int64_t checkpoint_stride) {
    if (checkpoint_stride < 1)
        throw std::invalid_argument("build_metrics_report: checkpoint_stride must be >= 1");
    const std::size_t n = trace.final_state.agents.size();
    const std::size_t m = capacities.size();

    std::vector<std::vector<double>> xbar_final(n);
    for (std::size_t i = 0; i < n; ++i) xbar_final[i] = trace.final_state.agents[i].xbar;

    MetricsReport report;
    report.abs_error.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            report.abs_error[i][j] = std::abs(xbar_final[i][j] - solution.x_star[i][j]);

    report.rel_error = relative_error(xbar_final, solution.x_star);
    report.cost_ratio = cost_ratio(costs, xbar_final, solution.x_star);
    report.utilization = utilization(xbar_final, capacities);
    report.event_counts = trace.final_state.event_counts;
    report.clamp_count = trace.final_state.clamp_count;

    // One spread checkpoint per snapshot step.
    std::size_t pos = 0;
    while (pos < trace.snapshots.size()) {
        const std::int64_t step = trace.snapshots[pos].step;
        std::vector<std::vector<double>> xbar_at;
        while (pos < trace.snapshots.size() && trace.snapshots[pos].step == step)
            xbar_at.push_back(trace.snapshots[pos++].xbar);
        report.gradient_spread_series.push_back(
            SpreadCheckpoint{step, gradient_spread(costs, xbar_at)});
    }

    std::vector<std::int64_t> cumulative(m, 0);
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> checkpoints(m);
    const bool per_step = static_cast<std::int64_t>(trace.records.size()) < 3 * checkpoint_stride;
    for (const auto& record : trace.records) {
        for (std::size_t j = 0; j < m; ++j) {
            cumulative[j] += record.signals[j];
            if (per_step || record.step % checkpoint_stride == 0)
                checkpoints[j].emplace_back(record.step, cumulative[j]);
        }
    }
    report.event_count_r2.assign(m, 1.0);
    for (std::size_t j = 0; j < m; ++j)
        if (checkpoints[j].size() >= 3)
            report.event_count_r2[j] = event_count_linearity(checkpoints[j]);

    return report;
}

}  // namespace aimdalloc
