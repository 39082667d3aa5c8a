#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qoct/krotov.hpp"
#include "qoct/qsl.hpp"

namespace qoct {

enum class ExperimentKind {
    lz_convergence,
    lz_qsl_compare,
    chain_threshold_scan,
    chain_bound_compare,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from(const std::string& name);

// How many steps to give a duration-T grid.  Exactly one selector is active:
// a fixed count, a per-unit-time density, or a cap on ||H|| dt with ||H||
// estimated from the guess pulse.
struct GridPolicy {
    std::optional<Index> fixed_steps;
    std::optional<double> steps_per_unit_time;
    std::optional<double> norm_dt_cap;
    Index min_steps = 64;
    Index max_steps = 2000000;
};

Index grid_steps(const GridPolicy& policy, const ControlledModel& model, double total_time);

struct LZParams {
    double omega = 1.0;
    double gamma0 = -500.0;
};

struct ChainParams {
    Index length = 21;
    double coupling = 1.0;
    std::optional<double> guess_trap_strength;  // default 2 * coupling
};

struct OptimizerParams {
    std::vector<double> step_weights;  // empty selects the heuristic default
    std::string shape = "sin_squared";
    Index max_iterations = 2000;
    double target_infidelity = 1e-5;
    Index stall_window = 500;
    double stall_threshold = 1e-6;
    Index max_weight_doublings = 30;
    std::optional<std::vector<double>> bounds_lower;
    std::optional<std::vector<double>> bounds_upper;

    KrotovConfig to_krotov_config() const;
};

// Threshold-scan controls.  The candidate duration grid for a chain of
// length N spans per-site times [per_site_from, per_site_to] * (N - 1).
struct ScanParams {
    double infidelity_target = 1e-3;
    Index iteration_budget = 5000;
    double per_site_from = 0.3;
    double per_site_to = 1.1;
    Index per_site_points = 6;
    Index bisection_depth = 8;
};

// Duration grid for the curvature criterion, relative to the analytic
// estimate: t_eq2 * linspace(rel_from, rel_to, points).
struct CurvatureParams {
    double rel_from = 0.88;
    double rel_to = 1.16;
    Index points = 5;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::lz_convergence;
    std::optional<std::string> output_dir;
    LZParams lz;
    ChainParams chain;
    GridPolicy grid;
    OptimizerParams optimizer;
    ScanParams scan;
    CurvatureParams curvature;
    std::vector<double> durations;  // lz-convergence
    std::vector<double> ratios;     // lz-qsl-compare: values of -gamma0/omega
    std::vector<Index> lengths;     // chain experiments
    Index fit_min_length = 9;       // smaller chains are excluded from the fit
};

// Strict parse: unknown keys and type mismatches raise ConfigError, and the
// parameters referenced by the experiment kind are validated up front.
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::filesystem::path& path);

struct RunOptions {
    std::filesystem::path output_dir;
    std::size_t jobs = 1;
    bool quiet = false;
};

struct ExperimentResult {
    int exit_code = 0;  // 0 success, 3 when every run of the experiment failed
    std::vector<std::string> messages;
};

ExperimentResult run_lz_convergence(const ExperimentConfig& config, const RunOptions& options);
ExperimentResult run_lz_qsl_compare(const ExperimentConfig& config, const RunOptions& options);
ExperimentResult run_chain_threshold_scan(const ExperimentConfig& config,
                                          const RunOptions& options);
ExperimentResult run_chain_bound_compare(const ExperimentConfig& config,
                                         const RunOptions& options);
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Quantified "almost constant except near the final time" test for an
// evolving-state spread profile: the relative std over the central 80% of
// [0, T] stays below 25%, and the largest excursion from the central mean
// falls in the final 10%.
struct ProfileShapeCheck {
    bool nearly_constant_center = false;
    bool max_excursion_at_end = false;
    double center_mean = 0.0;
    double center_std = 0.0;
    double max_excursion_time = 0.0;

    bool passed() const { return nearly_constant_center && max_excursion_at_end; }
};

ProfileShapeCheck check_profile_shape(const EnergySpreadProfile& profile);

} // namespace qoct
