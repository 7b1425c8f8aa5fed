// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one [PASS]/[FAIL] line per criterion. Exits nonzero if any fail.
//
// argv[1] (optional): path to the CLI binary, used by the end-to-end
// determinism criterion; that criterion is skipped as a failure if absent.

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "aimdalloc/csv_io.hpp"
#include "aimdalloc/metrics.hpp"
#include "aimdalloc/oracle.hpp"
#include "aimdalloc/scenario.hpp"
#include "aimdalloc/simulator.hpp"

namespace fs = std::filesystem;
using namespace aimdalloc;

namespace {

constexpr std::uint64_t kScenarioSeed = 123;  // pinned; criteria 1-5 are seed-fixed

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// Shared paper-scenario artifacts for criteria 1-5, 8, 10.
struct ScenarioRun {
    ScenarioSpec spec;
    std::vector<CostFunction> costs;
    Trace trace;
    OracleSolution solution;
    MetricsReport report;
};

ScenarioRun run_paper_scenario() {
    ScenarioRun ctx;
    ctx.spec = generate_paper_scenario(kScenarioSeed);
    ctx.spec.config.snapshot_stride = 1000;  // spread checkpoints at 1000, 2000, ...
    ctx.costs = instantiate_costs(ctx.spec.config);
    ctx.trace = run(ctx.spec.config);
    ctx.solution = solve_centralized(ctx.costs, ctx.spec.config.capacities, ctx.spec.oracle_tol,
                                     ctx.spec.oracle_max_iter);
    ctx.report = build_metrics_report(ctx.trace, ctx.costs, ctx.solution,
                                      ctx.spec.config.capacities,
                                      ctx.spec.metrics_checkpoint_stride);
    return ctx;
}

Outcome criterion1_relative_error(const ScenarioRun& ctx) {
    Outcome out{true, "rel_error ="};
    for (double e : ctx.report.rel_error) {
        out.passed = out.passed && e < 0.07;
        out.detail += " " + fmt(e);
    }
    out.detail += " (< 0.07)";
    return out;
}

Outcome criterion2_utilization(const ScenarioRun& ctx) {
    Outcome out{true, "utilization ="};
    for (double u : ctx.report.utilization) {
        out.passed = out.passed && u >= 0.98 && u <= 1.02;
        out.detail += " " + fmt(u);
    }
    out.detail += " (in [0.98, 1.02])";
    return out;
}

Outcome criterion3_cost_ratio(const ScenarioRun& ctx) {
    const double ratio = ctx.report.cost_ratio;
    return Outcome{ratio >= 0.999 && ratio <= 1.10,
                   "cost_ratio = " + fmt(ratio) + " (in [0.999, 1.10])"};
}

Outcome criterion4_gradient_consensus(const ScenarioRun& ctx) {
    const SpreadCheckpoint* early = nullptr;
    const SpreadCheckpoint* last = nullptr;
    for (const auto& checkpoint : ctx.report.gradient_spread_series) {
        if (checkpoint.step == 1000) early = &checkpoint;
        if (checkpoint.step == ctx.spec.config.horizon) last = &checkpoint;
    }
    if (!early || !last) return Outcome{false, "missing spread checkpoints at 1000 or K"};
    Outcome out{true, "CoV(K)/CoV(1000) ="};
    for (std::size_t j = 0; j < last->per_resource.size(); ++j) {
        const double cov_early = early->per_resource[j].stddev / early->per_resource[j].mean;
        const double cov_final = last->per_resource[j].stddev / last->per_resource[j].mean;
        const double ratio = cov_final / cov_early;
        out.passed = out.passed && ratio < 0.25;
        out.detail += " " + fmt(ratio);
    }
    out.detail += " (< 0.25)";
    return out;
}

Outcome criterion5_event_counts(const ScenarioRun& ctx) {
    Outcome out{true, "counts ="};
    for (std::int64_t count : ctx.report.event_counts) {
        out.passed = out.passed && count >= 3000 && count <= 36000;
        out.detail += " " + std::to_string(count);
    }
    out.detail += " (in [3000, 36000]), r2 =";
    for (double r2 : ctx.report.event_count_r2) {
        out.passed = out.passed && r2 >= 0.98;
        out.detail += " " + fmt(r2);
    }
    out.detail += " (>= 0.98)";
    return out;
}

Outcome criterion6_probability_range() {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ScenarioSpec spec = generate_paper_scenario(seed);
        spec.config.snapshot_stride = spec.config.horizon;
        const Trace trace = run(spec.config);
        if (trace.final_state.clamp_count != 0 || trace.final_state.guard_count != 0)
            return Outcome{false, "seed " + std::to_string(seed) + ": clamp_count = " +
                                      std::to_string(trace.final_state.clamp_count) +
                                      ", guard_count = " +
                                      std::to_string(trace.final_state.guard_count)};
        // The class condition must hold on each agent's observed average range.
        for (std::size_t i = 0; i < trace.final_state.costs.size(); ++i) {
            const MembershipReport membership =
                check_membership(trace.final_state.costs[i], spec.config.params.delta,
                                 trace.final_state.xbar_peak[i], 8);
            if (!membership.holds)
                return Outcome{false, "seed " + std::to_string(seed) + ": agent " +
                                          std::to_string(i) +
                                          " fails membership on its observed box (margin " +
                                          fmt(membership.worst_margin) + ")"};
        }
    }
    return Outcome{true,
                   "100 seeds x 30000 steps: all response probabilities in (0,1), clamp and "
                   "guard counts 0, membership holds on every agent's observed average range"};
}

Outcome criterion7_average_recursion() {
    Rng rng(9001);
    double worst = 0.0;
    for (int trace_index = 0; trace_index < 1000; ++trace_index) {
        const int m = 1 + static_cast<int>(rng.next_int(0, 2));
        std::vector<std::vector<double>> history;
        history.push_back(std::vector<double>(m));
        for (auto& v : history.back()) v = 2.0 * rng.next_double();
        std::vector<double> xbar = history[0];
        for (int k = 0; k < 499; ++k) {
            std::vector<double> next(m);
            for (auto& v : next) v = 2.0 * rng.next_double();
            history.push_back(next);
            xbar = update_average(xbar, next, k);
            // Batch mean per the defining sum.
        }
        std::vector<double> mean(m, 0.0);
        for (const auto& x : history)
            for (int j = 0; j < m; ++j) mean[j] += x[j];
        for (int j = 0; j < m; ++j) {
            mean[j] /= static_cast<double>(history.size());
            worst = std::max(worst, std::abs(mean[j] - xbar[j]));
        }
    }
    return Outcome{worst < 1e-12,
                   "1000 traces x 500 steps, worst |recursive - batch| = " + fmt(worst)};
}

Outcome criterion8_oracle_exactness(const ScenarioRun& ctx) {
    Outcome out{true, ""};

    const std::vector<CostFunction> two{CostFunction(1, {{1.0, {2}}}),
                                        CostFunction(1, {{3.0, {2}}})};
    const auto sol2 = solve_centralized(two, std::vector<double>{4.0});
    out.passed = out.passed && std::abs(sol2.x_star[0][0] - 3.0) < 1e-6 &&
                 std::abs(sol2.x_star[1][0] - 1.0) < 1e-6;

    const std::vector<CostFunction> three{CostFunction(1, {{1.0, {2}}}),
                                          CostFunction(1, {{2.0, {2}}}),
                                          CostFunction(1, {{4.0, {2}}})};
    const auto sol3 = solve_centralized(three, std::vector<double>{7.0});
    out.passed = out.passed && std::abs(sol3.x_star[0][0] - 4.0) < 1e-6 &&
                 std::abs(sol3.x_star[1][0] - 2.0) < 1e-6 &&
                 std::abs(sol3.x_star[2][0] - 1.0) < 1e-6;

    double worst_residual = 0.0;
    for (const auto* sol : {&sol2, &sol3, &ctx.solution})
        for (double r : sol->kkt_residual) worst_residual = std::max(worst_residual, r);
    out.passed = out.passed && worst_residual < 1e-6;

    double worst_feasibility = 0.0;
    const auto feasibility = [&](const OracleSolution& sol, const std::vector<double>& caps) {
        for (std::size_t j = 0; j < caps.size(); ++j) {
            double sum = 0.0;
            for (const auto& row : sol.x_star) sum += row[j];
            worst_feasibility = std::max(worst_feasibility, std::abs(sum - caps[j]) / caps[j]);
        }
    };
    feasibility(sol2, {4.0});
    feasibility(sol3, {7.0});
    feasibility(ctx.solution, ctx.spec.config.capacities);
    out.passed = out.passed && worst_feasibility < 1e-8;

    out.detail = "closed forms to 1e-6, worst kkt = " + fmt(worst_residual) +
                 " (< 1e-6), worst feasibility gap = " + fmt(worst_feasibility) + " (< 1e-8)";
    return out;
}

Outcome criterion9_gradient_correctness() {
    Rng rng(5150);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const CostFunction f = sample_paper_cost(rng, CoefficientRanges{});
        for (int point = 0; point < 100; ++point) {
            std::vector<double> x(3);
            for (auto& v : x) v = 0.2 + 0.8 * rng.next_double();
            const auto analytic = f.gradient(x);
            const auto fd = finite_diff_gradient(f, x, 1e-6);
            for (int j = 0; j < 3; ++j)
                worst = std::max(worst, std::abs(analytic[j] - fd[j]) / std::abs(fd[j]));
        }
    }
    return Outcome{worst < 1e-5,
                   "100 costs x 100 points, worst relative deviation = " + fmt(worst)};
}

Outcome criterion10_overshoot_bound(const ScenarioRun& ctx) {
    const auto& config = ctx.spec.config;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (const auto& record : ctx.trace.records)
        for (int j = 0; j < config.m; ++j) {
            const double bound = config.params.gamma_soft[j] * config.capacities[j] +
                                 config.n * config.params.alpha[j];
            worst_slack = std::min(worst_slack, bound - record.total_x[j]);
        }
    return Outcome{worst_slack >= -1e-9,
                   "min(bound - total) over all steps/resources = " + fmt(worst_slack)};
}

Outcome criterion11_determinism(const std::string& cli) {
    if (cli.empty()) return Outcome{false, "no CLI binary path supplied"};
    const fs::path dir =
        fs::temp_directory_path() / ("aimdalloc_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto sh = [&](const std::string& command) {
        return std::system((command + " > /dev/null 2>&1").c_str()) == 0;
    };
    const std::string cfg = (dir / "scenario.json").string();
    if (!sh("'" + cli + "' scenario --seed " + std::to_string(kScenarioSeed) + " -o '" + cfg + "'"))
        return Outcome{false, "scenario generation failed"};
    for (const char* which : {"a", "b"})
        if (!sh("'" + cli + "' compare -c '" + cfg + "' -o '" + (dir / which).string() +
                "' --snapshot-stride 1000"))
            return Outcome{false, std::string("compare run ") + which + " failed"};

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    for (const char* file : {"trace.csv", "snapshots.csv", "oracle.csv", "oracle_summary.csv",
                             "metrics.csv", "metrics.json"}) {
        const std::string a = slurp(dir / "a" / file);
        const std::string b = slurp(dir / "b" / file);
        if (a.empty() || a != b) {
            return Outcome{false, std::string(file) + " differs between identical runs"};
        }
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return Outcome{true, "two CLI runs produced byte-identical trace and metrics files"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    std::cout << "running paper scenario (seed " << kScenarioSeed << ", 30000 steps)...\n";
    const ScenarioRun ctx = run_paper_scenario();

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"relative error below 7% per resource", [&] { return criterion1_relative_error(ctx); }},
        {"capacity utilization in [0.98, 1.02]", [&] { return criterion2_utilization(ctx); }},
        {"cost ratio in [0.999, 1.10]", [&] { return criterion3_cost_ratio(ctx); }},
        {"gradient consensus tightens 4x from step 1000",
         [&] { return criterion4_gradient_consensus(ctx); }},
        {"event counts in band with linear growth", [&] { return criterion5_event_counts(ctx); }},
        {"response probabilities in (0,1) over 100 seeds", criterion6_probability_range},
        {"recursive average equals batch mean to 1e-12", criterion7_average_recursion},
        {"oracle exactness, consensus, feasibility", [&] { return criterion8_oracle_exactness(ctx); }},
        {"analytic gradients match finite differences", criterion9_gradient_correctness},
        {"aggregate demand respects the structural bound",
         [&] { return criterion10_overshoot_bound(ctx); }},
        {"byte-identical outputs across identical runs", [&] { return criterion11_determinism(cli); }},
    };

    int passed = 0;
    for (std::size_t index = 0; index < criteria.size(); ++index) {
        Outcome outcome;
        try {
            outcome = criteria[index].second();
        } catch (const std::exception& e) {
            outcome = Outcome{false, std::string("exception: ") + e.what()};
        }
        passed += outcome.passed ? 1 : 0;
        std::cout << (outcome.passed ? "[PASS]" : "[FAIL]") << " criterion " << index + 1 << ": "
                  << criteria[index].first << " -- " << outcome.detail << "\n";
    }

    std::cout << passed << "/" << criteria.size() << " criteria passed\n";
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
