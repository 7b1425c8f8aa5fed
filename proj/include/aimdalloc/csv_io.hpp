#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "aimdalloc/metrics.hpp"
#include "aimdalloc/oracle.hpp"
#include "aimdalloc/simulator.hpp"

namespace aimdalloc {

/// Shortest decimal form that round-trips the exact double. Keeps output
/// files byte-stable across runs.
inline std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), result.ptr);
}

/// Writes content to path via a sibling temp file and an atomic rename, so a
/// failed run never leaves a partial output file behind.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

/// One row per step: step, then per resource j the triple
/// total_x_j, total_xbar_j, signal_j.
inline std::string trace_csv(const Trace& trace) {
    const std::size_t m = trace.records.empty() ? 0 : trace.records.front().total_x.size();
    std::string out = "step";
    for (std::size_t j = 1; j <= m; ++j) {
        const std::string suffix = std::to_string(j);
        out += ",total_x_" + suffix + ",total_xbar_" + suffix + ",signal_" + suffix;
    }
    out += "\n";
    for (const auto& record : trace.records) {
        out += std::to_string(record.step);
        for (std::size_t j = 0; j < m; ++j) {
            out += ",";
            out += format_double(record.total_x[j]);
            out += ",";
            out += format_double(record.total_xbar[j]);
            out += ",";
            out += std::to_string(static_cast<int>(record.signals[j]));
        }
        out += "\n";
    }
    return out;
}

/// One row per (snapshot step, agent): step, agent, x_1..x_m, xbar_1..xbar_m.
inline std::string snapshots_csv(const Trace& trace) {
    const std::size_t m = trace.snapshots.empty() ? 0 : trace.snapshots.front().x.size();
    std::string out = "step,agent";
    for (std::size_t j = 1; j <= m; ++j) out += ",x_" + std::to_string(j);
    for (std::size_t j = 1; j <= m; ++j) out += ",xbar_" + std::to_string(j);
    out += "\n";
    for (const auto& snap : trace.snapshots) {
        out += std::to_string(snap.step);
        out += ",";
        out += std::to_string(snap.agent);
        for (std::size_t j = 0; j < m; ++j) {
            out += ",";
            out += format_double(snap.x[j]);
        }
        for (std::size_t j = 0; j < m; ++j) {
            out += ",";
            out += format_double(snap.xbar[j]);
        }
        out += "\n";
    }
    return out;
}

/// Long form: agent, resource (1-based), x_star.
inline std::string oracle_csv(const OracleSolution& solution) {
    std::string out = "agent,resource,x_star\n";
    for (std::size_t i = 0; i < solution.x_star.size(); ++i)
        for (std::size_t j = 0; j < solution.x_star[i].size(); ++j) {
            out += std::to_string(i);
            out += ",";
            out += std::to_string(j + 1);
            out += ",";
            out += format_double(solution.x_star[i][j]);
            out += "\n";
        }
    return out;
}

inline std::string oracle_summary_csv(const OracleSolution& solution) {
    std::string out = "iterations,converged";
    for (std::size_t j = 1; j <= solution.kkt_residual.size(); ++j)
        out += ",kkt_residual_" + std::to_string(j);
    out += "\n";
    out += std::to_string(solution.iterations);
    out += ",";
    out += solution.converged ? "1" : "0";
    for (double r : solution.kkt_residual) {
        out += ",";
        out += format_double(r);
    }
    out += "\n";
    return out;
}

/// Flat long form for plotting: metric,resource,agent,step,value with empty
/// fields where a dimension does not apply. Resources are 1-based.
inline std::string metrics_csv(const MetricsReport& report) {
    std::string out = "metric,resource,agent,step,value\n";
    const auto row = [&out](const std::string& metric, const std::string& resource,
                            const std::string& agent, const std::string& step,
                            const std::string& value) {
        out += metric + "," + resource + "," + agent + "," + step + "," + value + "\n";
    };
    for (std::size_t j = 0; j < report.rel_error.size(); ++j)
        row("rel_error", std::to_string(j + 1), "", "", format_double(report.rel_error[j]));
    row("cost_ratio", "", "", "", format_double(report.cost_ratio));
    for (std::size_t j = 0; j < report.utilization.size(); ++j)
        row("utilization", std::to_string(j + 1), "", "", format_double(report.utilization[j]));
    for (std::size_t j = 0; j < report.event_counts.size(); ++j)
        row("event_count", std::to_string(j + 1), "", "", std::to_string(report.event_counts[j]));
    for (std::size_t j = 0; j < report.event_count_r2.size(); ++j)
        row("event_count_r2", std::to_string(j + 1), "", "",
            format_double(report.event_count_r2[j]));
    row("clamp_count", "", "", "", std::to_string(report.clamp_count));
    for (std::size_t i = 0; i < report.abs_error.size(); ++i)
        for (std::size_t j = 0; j < report.abs_error[i].size(); ++j)
            row("abs_error", std::to_string(j + 1), std::to_string(i), "",
                format_double(report.abs_error[i][j]));
    for (const auto& checkpoint : report.gradient_spread_series)
        for (std::size_t j = 0; j < checkpoint.per_resource.size(); ++j) {
            const auto& stats = checkpoint.per_resource[j];
            const std::string resource = std::to_string(j + 1);
            const std::string step = std::to_string(checkpoint.step);
            row("gradient_spread_mean", resource, "", step, format_double(stats.mean));
            row("gradient_spread_stddev", resource, "", step, format_double(stats.stddev));
            row("gradient_spread_min", resource, "", step, format_double(stats.min));
            row("gradient_spread_max", resource, "", step, format_double(stats.max));
        }
    return out;
}

/// The same report as a structured document, field names as in MetricsReport.
inline nlohmann::json metrics_json(const MetricsReport& report) {
    nlohmann::json spread = nlohmann::json::array();
    for (const auto& checkpoint : report.gradient_spread_series) {
        nlohmann::json per_resource = nlohmann::json::array();
        for (const auto& stats : checkpoint.per_resource)
            per_resource.push_back({{"mean", stats.mean},
                                    {"stddev", stats.stddev},
                                    {"min", stats.min},
                                    {"max", stats.max}});
        spread.push_back({{"step", checkpoint.step}, {"per_resource", per_resource}});
    }
    return nlohmann::json{{"abs_error", report.abs_error},
                          {"rel_error", report.rel_error},
                          {"cost_ratio", report.cost_ratio},
                          {"gradient_spread_series", spread},
                          {"utilization", report.utilization},
                          {"event_counts", report.event_counts},
                          {"event_count_r2", report.event_count_r2},
                          {"clamp_count", report.clamp_count}};
}

}  // namespace aimdalloc
