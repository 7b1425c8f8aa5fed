// Command-line front end: simulate the distributed AIMD allocation dynamics,
// solve the centralized problem, and compare the two.
//
// Subcommands:
//   scenario   emit the built-in 60-camera scenario config
//   run        simulate and write trace.csv + snapshots.csv
//   oracle     solve the centralized problem and write oracle*.csv
//   compare    run + oracle + metrics.{csv,json}
//   validate   sampled cost-class membership check per agent
//
// Exit codes: 0 success, 2 config error, 3 runtime/solver failure. Errors go
// to stderr as one-line JSON records.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aimdalloc/csv_io.hpp"
#include "aimdalloc/metrics.hpp"
#include "aimdalloc/oracle.hpp"
#include "aimdalloc/scenario.hpp"
#include "aimdalloc/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> steps;
    std::optional<std::string> signal_mode;
    std::optional<std::int64_t> snapshot_stride;
};

void add_override_flags(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--seed", opts.seed, "Override the config seed");
    cmd->add_option("--steps", opts.steps, "Override the horizon");
    cmd->add_option("--signal-mode", opts.signal_mode, "Override the signal mode (fresh|literal)")
        ->check(CLI::IsMember({"fresh", "literal"}));
    cmd->add_option("--snapshot-stride", opts.snapshot_stride, "Override the snapshot stride");
}

aimdalloc::ScenarioSpec load_spec(const CommonOptions& opts) {
    aimdalloc::ScenarioSpec spec = aimdalloc::load_config(opts.config_path);
    if (opts.seed) spec.config.seed = *opts.seed;
    if (opts.steps) spec.config.horizon = *opts.steps;
    if (opts.signal_mode)
        spec.config.signal_mode = *opts.signal_mode == "literal" ? aimdalloc::SignalMode::literal
                                                                 : aimdalloc::SignalMode::fresh;
    if (opts.snapshot_stride) spec.config.snapshot_stride = *opts.snapshot_stride;
    if (auto violations = aimdalloc::validate(spec.config); !violations.empty())
        throw aimdalloc::ConfigError(std::move(violations));
    return spec;
}

fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw aimdalloc::ConfigError({"--out: an output directory is required"});
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_trace_files(const fs::path& dir, const aimdalloc::Trace& trace) {
    aimdalloc::atomic_write_file(dir / "trace.csv", aimdalloc::trace_csv(trace));
    aimdalloc::atomic_write_file(dir / "snapshots.csv", aimdalloc::snapshots_csv(trace));
}

void write_oracle_files(const fs::path& dir, const aimdalloc::OracleSolution& solution) {
    aimdalloc::atomic_write_file(dir / "oracle.csv", aimdalloc::oracle_csv(solution));
    aimdalloc::atomic_write_file(dir / "oracle_summary.csv",
                                 aimdalloc::oracle_summary_csv(solution));
    if (!solution.converged)
        std::cerr << json{{"warning", "oracle did not reach tolerance"},
                          {"iterations", solution.iterations}}
                         .dump()
                  << "\n";
}

int cmd_scenario(std::uint64_t seed, const std::string& out) {
    const aimdalloc::ScenarioSpec spec = aimdalloc::generate_paper_scenario(seed);
    if (out.empty()) {
        std::cout << aimdalloc::to_json(spec).dump(2) << "\n";
    } else {
        aimdalloc::save_config(spec, out);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int cmd_run(const CommonOptions& opts) {
    const aimdalloc::ScenarioSpec spec = load_spec(opts);
    const fs::path dir = prepare_out_dir(opts.out_path);
    const aimdalloc::Trace trace = aimdalloc::run(spec.config);
    write_trace_files(dir, trace);
    std::cout << "simulated " << spec.config.horizon << " steps, n=" << spec.config.n
              << ", m=" << spec.config.m << "\nevent counts:";
    for (auto count : trace.final_state.event_counts) std::cout << " " << count;
    std::cout << "\nclamped probabilities: " << trace.final_state.clamp_count << "\nwrote "
              << (dir / "trace.csv").string() << ", " << (dir / "snapshots.csv").string() << "\n";
    return 0;
}

int cmd_oracle(const CommonOptions& opts) {
    const aimdalloc::ScenarioSpec spec = load_spec(opts);
    const fs::path dir = prepare_out_dir(opts.out_path);
    const auto costs = aimdalloc::instantiate_costs(spec.config);
    const aimdalloc::OracleSolution solution = aimdalloc::solve_centralized(
        costs, spec.config.capacities, spec.oracle_tol, spec.oracle_max_iter);
    write_oracle_files(dir, solution);
    std::cout << "solved in " << solution.iterations << " iterations, converged="
              << (solution.converged ? "yes" : "no") << "\nwrote " << (dir / "oracle.csv").string()
              << ", " << (dir / "oracle_summary.csv").string() << "\n";
    return 0;
}

int cmd_compare(const CommonOptions& opts) {
    const aimdalloc::ScenarioSpec spec = load_spec(opts);
    const fs::path dir = prepare_out_dir(opts.out_path);

    const auto costs = aimdalloc::instantiate_costs(spec.config);
    const aimdalloc::Trace trace = aimdalloc::run(spec.config);
    const aimdalloc::OracleSolution solution = aimdalloc::solve_centralized(
        costs, spec.config.capacities, spec.oracle_tol, spec.oracle_max_iter);
    const aimdalloc::MetricsReport report = aimdalloc::build_metrics_report(
        trace, costs, solution, spec.config.capacities, spec.metrics_checkpoint_stride);

    write_trace_files(dir, trace);
    write_oracle_files(dir, solution);
    aimdalloc::atomic_write_file(dir / "metrics.csv", aimdalloc::metrics_csv(report));
    aimdalloc::atomic_write_file(dir / "metrics.json",
                                 aimdalloc::metrics_json(report).dump(2) + "\n");

    std::cout << "relative error per resource:";
    for (double e : report.rel_error) std::cout << " " << e;
    std::cout << "\nutilization per resource:";
    for (double u : report.utilization) std::cout << " " << u;
    std::cout << "\ncost ratio: " << report.cost_ratio << "\nevent counts:";
    for (auto count : report.event_counts) std::cout << " " << count;
    std::cout << "\nwrote trace.csv, snapshots.csv, oracle.csv, oracle_summary.csv, "
                 "metrics.csv, metrics.json under "
              << dir.string() << "\n";
    return 0;
}

int cmd_validate(const CommonOptions& opts, double box_scale, int grid) {
    const aimdalloc::ScenarioSpec spec = load_spec(opts);
    const auto costs = aimdalloc::instantiate_costs(spec.config);

    // Default membership box: the per-agent operating range, a headroom
    // factor above the uniform share C^j / n.
    std::vector<double> box(spec.config.capacities.size());
    for (std::size_t j = 0; j < box.size(); ++j)
        box[j] = box_scale * spec.config.capacities[j] / static_cast<double>(spec.config.n);

    bool all_hold = true;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        const aimdalloc::MembershipReport report =
            aimdalloc::check_membership(costs[i], spec.config.params.delta, box, grid);
        all_hold = all_hold && report.holds;
        std::cout << "agent " << i << ": holds=" << (report.holds ? "yes" : "no")
                  << " worst_margin=" << report.worst_margin << " at (";
        for (std::size_t j = 0; j < report.worst_point.size(); ++j)
            std::cout << (j ? ", " : "") << report.worst_point[j];
        std::cout << ")\n";
    }
    std::cout << (all_hold ? "all agents pass membership" : "membership violated") << " on box";
    for (double b : box) std::cout << " " << b;
    std::cout << " (grid " << grid << ")\n";
    return all_hold ? 0 : 3;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const aimdalloc::ConfigError& e) {
        std::cerr << json{{"error", "config"}, {"violations", e.violations()}}.dump() << "\n";
        return 2;
    } catch (const aimdalloc::SolverError& e) {
        std::cerr << json{{"error", "solver"}, {"message", e.what()}, {"point", e.point()}}.dump()
                  << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed AIMD multi-resource allocation simulator"};
    app.require_subcommand(1);

    std::uint64_t scenario_seed = 1;
    std::string scenario_out;
    CLI::App* scenario = app.add_subcommand("scenario", "Emit the built-in camera scenario");
    scenario->add_option("--seed", scenario_seed, "Seed embedded in the scenario");
    scenario->add_option("-o,--out", scenario_out, "Output file (stdout if omitted)");

    CommonOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "Simulate and write trace CSVs");
    run->add_option("-c,--config", run_opts.config_path, "Scenario file")->required();
    run->add_option("-o,--out", run_opts.out_path, "Output directory")->required();
    add_override_flags(run, run_opts);

    CommonOptions oracle_opts;
    CLI::App* oracle = app.add_subcommand("oracle", "Solve the centralized problem");
    oracle->add_option("-c,--config", oracle_opts.config_path, "Scenario file")->required();
    oracle->add_option("-o,--out", oracle_opts.out_path, "Output directory")->required();
    add_override_flags(oracle, oracle_opts);

    CommonOptions compare_opts;
    CLI::App* compare = app.add_subcommand("compare", "Run, solve, and write the metrics report");
    compare->add_option("-c,--config", compare_opts.config_path, "Scenario file")->required();
    compare->add_option("-o,--out", compare_opts.out_path, "Output directory")->required();
    add_override_flags(compare, compare_opts);

    CommonOptions validate_opts;
    double box_scale = 1.5;
    int grid = 24;
    CLI::App* validate = app.add_subcommand("validate", "Check cost-class membership per agent");
    validate->add_option("-c,--config", validate_opts.config_path, "Scenario file")->required();
    validate->add_option("--box-scale", box_scale, "Box headroom over the uniform share C^j/n");
    validate->add_option("--grid", grid, "Grid points per axis")->check(CLI::Range(2, 1000));
    add_override_flags(validate, validate_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "config"}, {"violations", {e.what()}}}.dump() << "\n";
        return 2;
    }

    if (scenario->parsed()) return guarded([&] { return cmd_scenario(scenario_seed, scenario_out); });
    if (run->parsed()) return guarded([&] { return cmd_run(run_opts); });
    if (oracle->parsed()) return guarded([&] { return cmd_oracle(oracle_opts); });
    if (compare->parsed()) return guarded([&] { return cmd_compare(compare_opts); });
    return guarded([&] { return cmd_validate(validate_opts, box_scale, grid); });
}
