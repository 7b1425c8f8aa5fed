#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aimdalloc/csv_io.hpp"
#include "aimdalloc/errors.hpp"
#include "aimdalloc/simulator.hpp"

namespace aimdalloc {

/// A complete experiment description: simulation config plus the solver
/// tolerance and the metrics checkpoint stride.
///
/// On disk this is a JSON document:
///
///   {
///     "name": "camera-60",
///     "n": 60, "m": 3, "horizon": 30000,
///     "capacities": [32, 20, 25],
///     "params": { "alpha": [...], "beta": [...], "gamma_norm": [...],
///                 "delta": [...], "gamma_soft": [...] },
///     "seed": 42,
///     "cost_spec": { "scenario": "paper-camera",
///                    "ranges": { "a": [10, 20], "b": [25, 35],
///                                "c": [22, 32], "d": [1, 5] } },
///     "signal_mode": "fresh",
///     "snapshot_stride": 30,
///     "oracle": { "tol": 1e-6, "max_iter": 200000 },
///     "metrics": { "checkpoint_stride": 1000 }
///   }
///
/// An explicit cost list replaces the ranges with
///   "cost_spec": { "scenario": "explicit",
///                  "agents": [ { "terms": [ { "coefficient": 10,
///                                             "exponents": [2, 0, 0] } ] } ] }
struct ScenarioSpec {
    std::string name;
    SimConfig config;
    double oracle_tol = 1e-6;
    std::int64_t oracle_max_iter = 200000;
    std::int64_t metrics_checkpoint_stride = 1000;

    bool operator==(const ScenarioSpec&) const = default;
};

/// The 60-camera scenario: three resources (memory in GB, storage in units
/// of 10 GB, bandwidth in units of 10 Mbps), capacities (32, 20, 25),
/// additive increases (0.025, 0.002, 0.0225), decrease factors
/// (0.70, 0.85, 0.75), class constant and normalization factor both 1/90,
/// and a 30000-step horizon.
inline ScenarioSpec generate_paper_scenario(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.name = "camera-60";
    spec.config.n = 60;
    spec.config.m = 3;
    spec.config.horizon = 30000;
    spec.config.capacities = {32.0, 20.0, 25.0};
    spec.config.params.alpha = {0.025, 0.002, 0.0225};
    spec.config.params.beta = {0.70, 0.85, 0.75};
    spec.config.params.delta = {1.0 / 90.0, 1.0 / 90.0, 1.0 / 90.0};
    spec.config.params.gamma_norm = gamma_from_delta(spec.config.params.delta);
    spec.config.params.gamma_soft = {1.0, 1.0, 1.0};
    spec.config.seed = seed;
    spec.config.cost_spec = PaperCameraSpec{};
    spec.config.signal_mode = SignalMode::fresh;
    spec.config.snapshot_stride = 30;
    spec.oracle_tol = 1e-6;
    spec.oracle_max_iter = 200000;
    spec.metrics_checkpoint_stride = 1000;
    return spec;
}

namespace detail {

template <typename T>
T json_get(const nlohmann::json& obj, const std::string& path, const char* key, T fallback,
           std::vector<std::string>& errors, bool required = true) {
    if (!obj.is_object() || !obj.contains(key)) {
        if (required) errors.push_back(path + key + ": missing");
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        errors.push_back(path + key + ": " + e.what());
        return fallback;
    }
}

}  // namespace detail

inline nlohmann::json to_json(const ScenarioSpec& spec) {
    nlohmann::json cost_spec;
    if (const auto* camera = std::get_if<PaperCameraSpec>(&spec.config.cost_spec)) {
        cost_spec = {{"scenario", "paper-camera"},
                     {"ranges",
                      {{"a", {camera->ranges.a.lo, camera->ranges.a.hi}},
                       {"b", {camera->ranges.b.lo, camera->ranges.b.hi}},
                       {"c", {camera->ranges.c.lo, camera->ranges.c.hi}},
                       {"d", {camera->ranges.d.lo, camera->ranges.d.hi}}}}};
    } else {
        nlohmann::json agents = nlohmann::json::array();
        for (const auto& cost : std::get<std::vector<CostFunction>>(spec.config.cost_spec)) {
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& term : cost.terms())
                terms.push_back({{"coefficient", term.coefficient}, {"exponents", term.exponents}});
            agents.push_back({{"terms", terms}});
        }
        cost_spec = {{"scenario", "explicit"}, {"agents", agents}};
    }
    return nlohmann::json{{"name", spec.name},
                          {"n", spec.config.n},
                          {"m", spec.config.m},
                          {"horizon", spec.config.horizon},
                          {"capacities", spec.config.capacities},
                          {"params",
                           {{"alpha", spec.config.params.alpha},
                            {"beta", spec.config.params.beta},
                            {"gamma_norm", spec.config.params.gamma_norm},
                            {"delta", spec.config.params.delta},
                            {"gamma_soft", spec.config.params.gamma_soft}}},
                          {"seed", spec.config.seed},
                          {"cost_spec", cost_spec},
                          {"signal_mode", to_string(spec.config.signal_mode)},
                          {"snapshot_stride", spec.config.snapshot_stride},
                          {"oracle", {{"tol", spec.oracle_tol}, {"max_iter", spec.oracle_max_iter}}},
                          {"metrics", {{"checkpoint_stride", spec.metrics_checkpoint_stride}}}};
}

/// Builds and fully validates a spec from a parsed document. Structural
/// problems (missing or mistyped fields) and semantic violations are all
/// collected before throwing, so one round of editing fixes everything.
inline ScenarioSpec scenario_from_json(const nlohmann::json& doc) {
    std::vector<std::string> errors;
    ScenarioSpec spec;

    spec.name = detail::json_get<std::string>(doc, "", "name", "", errors, /*required=*/false);
    spec.config.n = detail::json_get<int>(doc, "", "n", 0, errors);
    spec.config.m = detail::json_get<int>(doc, "", "m", 0, errors);
    spec.config.horizon = detail::json_get<std::int64_t>(doc, "", "horizon", 0, errors);
    spec.config.capacities =
        detail::json_get<std::vector<double>>(doc, "", "capacities", {}, errors);
    spec.config.seed = detail::json_get<std::uint64_t>(doc, "", "seed", 0, errors);
    spec.config.snapshot_stride =
        detail::json_get<std::int64_t>(doc, "", "snapshot_stride", 1, errors, /*required=*/false);

    const nlohmann::json params =
        detail::json_get<nlohmann::json>(doc, "", "params", nlohmann::json::object(), errors);
    spec.config.params.alpha =
        detail::json_get<std::vector<double>>(params, "params.", "alpha", {}, errors);
    spec.config.params.beta =
        detail::json_get<std::vector<double>>(params, "params.", "beta", {}, errors);
    spec.config.params.gamma_norm =
        detail::json_get<std::vector<double>>(params, "params.", "gamma_norm", {}, errors);
    spec.config.params.delta =
        detail::json_get<std::vector<double>>(params, "params.", "delta", {}, errors);
    spec.config.params.gamma_soft = detail::json_get<std::vector<double>>(
        params, "params.", "gamma_soft",
        std::vector<double>(static_cast<std::size_t>(std::max(spec.config.m, 0)), 1.0), errors,
        /*required=*/false);

    const std::string mode =
        detail::json_get<std::string>(doc, "", "signal_mode", "fresh", errors, /*required=*/false);
    if (mode == "fresh")
        spec.config.signal_mode = SignalMode::fresh;
    else if (mode == "literal")
        spec.config.signal_mode = SignalMode::literal;
    else
        errors.push_back("signal_mode: expected \"fresh\" or \"literal\", got \"" + mode + "\"");

    const nlohmann::json cost_spec =
        detail::json_get<nlohmann::json>(doc, "", "cost_spec", nlohmann::json::object(), errors);
    const std::string scenario =
        detail::json_get<std::string>(cost_spec, "cost_spec.", "scenario", "", errors);
    if (scenario == "paper-camera") {
        PaperCameraSpec camera;
        const nlohmann::json ranges = detail::json_get<nlohmann::json>(
            cost_spec, "cost_spec.", "ranges", nlohmann::json::object(), errors);
        const auto read_range = [&](const char* key, IntRange fallback) {
            const auto pair = detail::json_get<std::vector<std::int64_t>>(
                ranges, "cost_spec.ranges.", key, {fallback.lo, fallback.hi}, errors);
            if (pair.size() != 2) {
                errors.push_back(std::string("cost_spec.ranges.") + key + ": expected [lo, hi]");
                return fallback;
            }
            return IntRange{pair[0], pair[1]};
        };
        camera.ranges.a = read_range("a", camera.ranges.a);
        camera.ranges.b = read_range("b", camera.ranges.b);
        camera.ranges.c = read_range("c", camera.ranges.c);
        camera.ranges.d = read_range("d", camera.ranges.d);
        spec.config.cost_spec = camera;
    } else if (scenario == "explicit") {
        std::vector<CostFunction> costs;
        const nlohmann::json agents = detail::json_get<nlohmann::json>(
            cost_spec, "cost_spec.", "agents", nlohmann::json::array(), errors);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const std::string path = "cost_spec.agents[" + std::to_string(i) + "].";
            std::vector<MonomialTerm> terms;
            const nlohmann::json term_docs = detail::json_get<nlohmann::json>(
                agents[i], path, "terms", nlohmann::json::array(), errors);
            for (std::size_t t = 0; t < term_docs.size(); ++t) {
                const std::string term_path = path + "terms[" + std::to_string(t) + "].";
                MonomialTerm term;
                term.coefficient =
                    detail::json_get<double>(term_docs[t], term_path, "coefficient", 0.0, errors);
                term.exponents =
                    detail::json_get<std::vector<int>>(term_docs[t], term_path, "exponents", {}, errors);
                terms.push_back(std::move(term));
            }
            CostFunction::validate_terms(spec.config.m, terms, path + "terms", errors);
            if (errors.empty()) costs.emplace_back(spec.config.m, std::move(terms));
        }
        if (errors.empty()) spec.config.cost_spec = std::move(costs);
    } else {
        errors.push_back("cost_spec.scenario: expected \"paper-camera\" or \"explicit\", got \"" +
                         scenario + "\"");
    }

    const nlohmann::json oracle = detail::json_get<nlohmann::json>(
        doc, "", "oracle", nlohmann::json::object(), errors, /*required=*/false);
    spec.oracle_tol =
        detail::json_get<double>(oracle, "oracle.", "tol", 1e-6, errors, /*required=*/false);
    spec.oracle_max_iter = detail::json_get<std::int64_t>(oracle, "oracle.", "max_iter", 200000,
                                                          errors, /*required=*/false);
    const nlohmann::json metrics = detail::json_get<nlohmann::json>(
        doc, "", "metrics", nlohmann::json::object(), errors, /*required=*/false);
    spec.metrics_checkpoint_stride = detail::json_get<std::int64_t>(
        metrics, "metrics.", "checkpoint_stride", 1000, errors, /*required=*/false);

    if (errors.empty()) {
        for (auto& violation : validate(spec.config)) errors.push_back(std::move(violation));
        if (!(spec.oracle_tol > 0.0)) errors.push_back("oracle.tol: must be > 0");
        if (spec.oracle_max_iter < 1) errors.push_back("oracle.max_iter: must be >= 1");
        if (spec.metrics_checkpoint_stride < 1)
            errors.push_back("metrics.checkpoint_stride: must be >= 1");
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return spec;
}

/// Loads and validates a scenario file. Parse failures carry the parser's
/// line/column diagnostics; validation failures list every violation.
inline ScenarioSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"config file not found: " + path.string()});
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({path.string() + ": " + e.what()});
    }
    return scenario_from_json(doc);
}

inline void save_config(const ScenarioSpec& spec, const std::filesystem::path& path) {
    atomic_write_file(path, to_json(spec).dump(2) + "\n");
}

}  // namespace aimdalloc
