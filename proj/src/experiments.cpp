#include "qoct/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "qoct/io.hpp"
#include "qoct/lz.hpp"
#include "qoct/parallel.hpp"
#include "qoct/spin_chain.hpp"

namespace qoct {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

Index as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    return v.get<Index>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_number(e, where + " entry"));
    return out;
}

std::vector<Index> as_integer_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array of integers");
    std::vector<Index> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_integer(e, where + " entry"));
    return out;
}

template <typename T>
void require_strictly_increasing(const std::vector<T>& values, const std::string& where) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw ConfigError(where + " must be strictly increasing");
        }
    }
}

std::vector<double> linspace(double from, double to, Index count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] =
            from + (to - from) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

double inf_norm(const CMatrix& m) {
    double best = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        double acc = 0.0;
        for (Index j = 0; j < m.cols(); ++j) acc += std::abs(m(i, j));
        best = std::max(best, acc);
    }
    return best;
}

class StageClock {
public:
    StageClock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::filesystem::path prepare_output_dir(const RunOptions& options) {
    if (options.output_dir.empty()) throw ConfigError("no output directory configured");
    std::error_code ec;
    std::filesystem::create_directories(options.output_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + options.output_dir.string() + ": " +
                      ec.message());
    }
    return options.output_dir;
}

void say(const RunOptions& options, ExperimentResult& result, const std::string& line) {
    result.messages.push_back(line);
    if (!options.quiet) std::cout << line << std::endl;
}

// Shared outcome of one chain threshold scan.
struct ChainScanRow {
    Index length = 0;
    bool ok = false;
    double t_star = kNaN;
    double iterations = kNaN;
    double infidelity = kNaN;
    std::string note;
    double seconds = 0.0;
};

ChainScanRow scan_one_chain(const ExperimentConfig& config, Index length) {
    ChainScanRow row;
    row.length = length;
    const StageClock clock;
    const SpinChainModel model(length, config.chain.coupling, config.chain.guess_trap_strength);
    ThresholdScanConfig scan_config;
    scan_config.infidelity_target = config.scan.infidelity_target;
    scan_config.iteration_budget = config.scan.iteration_budget;
    scan_config.bisection_depth = config.scan.bisection_depth;
    const double sites = static_cast<double>(length - 1);
    scan_config.t_grid = linspace(config.scan.per_site_from * sites,
                                  config.scan.per_site_to * sites, config.scan.per_site_points);
    const StepRule rule = [&](double total_time) {
        return grid_steps(config.grid, model, total_time);
    };
    try {
        const QSLEstimate est =
            threshold_time_scan(model, scan_config, rule, config.optimizer.to_krotov_config());
        row.ok = true;
        row.t_star = est.t_qsl;
        row.iterations = est.details.at("iterations_at_result");
        row.infidelity = est.details.at("infidelity_at_result");
        for (const auto& w : est.warnings) {
            row.note += (row.note.empty() ? "" : "; ") + w;
        }
    } catch (const ScanFailedError& e) {
        row.infidelity = e.best_infidelity;
        row.note = e.what();
    }
    row.seconds = clock.seconds();
    return row;
}

std::string duration_tag(double value) { return format_double_compact(value); }

} // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::lz_convergence: return "lz-convergence";
    case ExperimentKind::lz_qsl_compare: return "lz-qsl-compare";
    case ExperimentKind::chain_threshold_scan: return "chain-threshold-scan";
    case ExperimentKind::chain_bound_compare: return "chain-bound-compare";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from(const std::string& name) {
    if (name == "lz-convergence") return ExperimentKind::lz_convergence;
    if (name == "lz-qsl-compare") return ExperimentKind::lz_qsl_compare;
    if (name == "chain-threshold-scan") return ExperimentKind::chain_threshold_scan;
    if (name == "chain-bound-compare") return ExperimentKind::chain_bound_compare;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

Index grid_steps(const GridPolicy& policy, const ControlledModel& model, double total_time) {
    if (!(total_time > 0.0) || !std::isfinite(total_time)) {
        throw ValidationError("grid_steps requires a positive duration");
    }
    if (policy.fixed_steps) return *policy.fixed_steps;
    Index steps = 0;
    if (policy.steps_per_unit_time) {
        steps = static_cast<Index>(std::ceil(total_time * *policy.steps_per_unit_time));
    } else {
        const double cap = policy.norm_dt_cap.value_or(0.1);
        // Estimate max ||H|| over the guess pulse on a coarse probe grid.
        const TimeGrid probe(total_time, 256);
        const ControlPulse guess = model.guess_pulse(probe);
        double scale = 0.0;
        for (Index j = 0; j < probe.num_nodes(); ++j) {
            scale = std::max(scale, inf_norm(model.hamiltonian(guess.samples().col(j)).matrix()));
        }
        steps = static_cast<Index>(std::ceil(total_time * scale / cap));
    }
    return std::clamp(steps, policy.min_steps, policy.max_steps);
}

KrotovConfig OptimizerParams::to_krotov_config() const {
    KrotovConfig k;
    if (!step_weights.empty()) {
        k.step_weights = Eigen::Map<const RVector>(step_weights.data(),
                                                   static_cast<Index>(step_weights.size()));
    }
    if (shape == "sin_squared") {
        k.shape = ShapeFunction::sin_squared;
    } else if (shape == "flat") {
        k.shape = ShapeFunction::flat;
    } else {
        throw ConfigError("unknown shape '" + shape + "' (expected sin_squared or flat)");
    }
    k.max_iterations = max_iterations;
    k.target_infidelity = target_infidelity;
    k.stall_window = stall_window;
    k.stall_threshold = stall_threshold;
    k.max_weight_doublings = max_weight_doublings;
    if (bounds_lower && bounds_upper) {
        ControlBounds b;
        b.lower = Eigen::Map<const RVector>(bounds_lower->data(),
                                            static_cast<Index>(bounds_lower->size()));
        b.upper = Eigen::Map<const RVector>(bounds_upper->data(),
                                            static_cast<Index>(bounds_upper->size()));
        k.control_bounds = std::move(b);
    }
    return k;
}

ExperimentConfig parse_config(const json& doc) {
    require_object(doc, "config");
    reject_unknown_keys(doc, "config",
                        {"experiment", "output_dir", "model", "grid", "optimizer", "scan",
                         "curvature", "durations", "ratios", "lengths", "fit_min_length"});
    ExperimentConfig c;
    const json* kind = find(doc, "experiment");
    if (!kind) throw ConfigError("missing 'experiment'");
    c.kind = experiment_kind_from(as_string(*kind, "experiment"));
    const bool is_chain = c.kind == ExperimentKind::chain_threshold_scan ||
                          c.kind == ExperimentKind::chain_bound_compare;

    if (const json* od = find(doc, "output_dir")) {
        c.output_dir = as_string(*od, "output_dir");
        if (c.output_dir->empty()) throw ConfigError("output_dir must not be empty");
    }

    if (const json* m = find(doc, "model")) {
        require_object(*m, "model");
        if (is_chain) {
            reject_unknown_keys(*m, "model", {"length", "coupling", "guess_trap_strength"});
            if (const json* v = find(*m, "length")) c.chain.length = as_integer(*v, "model.length");
            if (const json* v = find(*m, "coupling")) {
                c.chain.coupling = as_number(*v, "model.coupling");
            }
            if (const json* v = find(*m, "guess_trap_strength")) {
                c.chain.guess_trap_strength = as_number(*v, "model.guess_trap_strength");
            }
            if (c.chain.length < 3) throw ConfigError("model.length must be >= 3");
            if (!(c.chain.coupling > 0.0)) throw ConfigError("model.coupling must be > 0");
            if (c.chain.guess_trap_strength && !(*c.chain.guess_trap_strength > 0.0)) {
                throw ConfigError("model.guess_trap_strength must be > 0");
            }
        } else {
            reject_unknown_keys(*m, "model", {"omega", "gamma0"});
            if (const json* v = find(*m, "omega")) c.lz.omega = as_number(*v, "model.omega");
            if (const json* v = find(*m, "gamma0")) c.lz.gamma0 = as_number(*v, "model.gamma0");
            if (!(c.lz.omega > 0.0)) throw ConfigError("model.omega must be > 0");
            if (!(c.lz.gamma0 < 0.0)) throw ConfigError("model.gamma0 must be < 0");
        }
    }

    if (const json* g = find(doc, "grid")) {
        require_object(*g, "grid");
        reject_unknown_keys(
            *g, "grid", {"steps", "steps_per_unit_time", "norm_dt_cap", "min_steps", "max_steps"});
        int selectors = 0;
        if (const json* v = find(*g, "steps")) {
            c.grid.fixed_steps = as_integer(*v, "grid.steps");
            if (*c.grid.fixed_steps < 1) throw ConfigError("grid.steps must be >= 1");
            ++selectors;
        }
        if (const json* v = find(*g, "steps_per_unit_time")) {
            c.grid.steps_per_unit_time = as_number(*v, "grid.steps_per_unit_time");
            if (!(*c.grid.steps_per_unit_time > 0.0)) {
                throw ConfigError("grid.steps_per_unit_time must be > 0");
            }
            ++selectors;
        }
        if (const json* v = find(*g, "norm_dt_cap")) {
            c.grid.norm_dt_cap = as_number(*v, "grid.norm_dt_cap");
            if (!(*c.grid.norm_dt_cap > 0.0)) throw ConfigError("grid.norm_dt_cap must be > 0");
            ++selectors;
        }
        if (selectors != 1) {
            throw ConfigError("grid needs exactly one of steps, steps_per_unit_time, norm_dt_cap");
        }
        if (const json* v = find(*g, "min_steps")) c.grid.min_steps = as_integer(*v, "grid.min_steps");
        if (const json* v = find(*g, "max_steps")) c.grid.max_steps = as_integer(*v, "grid.max_steps");
        if (c.grid.min_steps < 1 || c.grid.max_steps < c.grid.min_steps) {
            throw ConfigError("grid limits need 1 <= min_steps <= max_steps");
        }
    } else {
        // Exact exponentials tolerate large ||H|| dt on the chain, where the
        // 0.1 cap would demand hundreds of thousands of steps; the chain
        // default fixes the control resolution per unit time instead.
        if (is_chain) {
            c.grid.steps_per_unit_time = 40.0;
        } else {
            c.grid.norm_dt_cap = 0.1;
        }
    }

    if (const json* o = find(doc, "optimizer")) {
        require_object(*o, "optimizer");
        reject_unknown_keys(*o, "optimizer",
                            {"step_weights", "shape", "max_iterations", "target_infidelity",
                             "stall_window", "stall_threshold", "max_weight_doublings",
                             "bounds_lower", "bounds_upper"});
        if (const json* v = find(*o, "step_weights")) {
            c.optimizer.step_weights = as_number_list(*v, "optimizer.step_weights");
            for (double w : c.optimizer.step_weights) {
                if (!(w > 0.0)) throw ConfigError("optimizer.step_weights must be positive");
            }
        }
        if (const json* v = find(*o, "shape")) c.optimizer.shape = as_string(*v, "optimizer.shape");
        if (c.optimizer.shape != "sin_squared" && c.optimizer.shape != "flat") {
            throw ConfigError("optimizer.shape must be sin_squared or flat");
        }
        if (const json* v = find(*o, "max_iterations")) {
            c.optimizer.max_iterations = as_integer(*v, "optimizer.max_iterations");
            if (c.optimizer.max_iterations < 0) {
                throw ConfigError("optimizer.max_iterations must be >= 0");
            }
        }
        if (const json* v = find(*o, "target_infidelity")) {
            c.optimizer.target_infidelity = as_number(*v, "optimizer.target_infidelity");
        }
        if (!(c.optimizer.target_infidelity > 0.0) || !(c.optimizer.target_infidelity < 1.0)) {
            throw ConfigError("optimizer.target_infidelity must lie in (0, 1)");
        }
        if (const json* v = find(*o, "stall_window")) {
            c.optimizer.stall_window = as_integer(*v, "optimizer.stall_window");
            if (c.optimizer.stall_window < 0) throw ConfigError("optimizer.stall_window must be >= 0");
        }
        if (const json* v = find(*o, "stall_threshold")) {
            c.optimizer.stall_threshold = as_number(*v, "optimizer.stall_threshold");
            if (!(c.optimizer.stall_threshold >= 0.0)) {
                throw ConfigError("optimizer.stall_threshold must be >= 0");
            }
        }
        if (const json* v = find(*o, "max_weight_doublings")) {
            c.optimizer.max_weight_doublings = as_integer(*v, "optimizer.max_weight_doublings");
            if (c.optimizer.max_weight_doublings < 0) {
                throw ConfigError("optimizer.max_weight_doublings must be >= 0");
            }
        }
        const json* bl = find(*o, "bounds_lower");
        const json* bu = find(*o, "bounds_upper");
        if ((bl == nullptr) != (bu == nullptr)) {
            throw ConfigError("optimizer bounds need both bounds_lower and bounds_upper");
        }
        if (bl && bu) {
            c.optimizer.bounds_lower = as_number_list(*bl, "optimizer.bounds_lower");
            c.optimizer.bounds_upper = as_number_list(*bu, "optimizer.bounds_upper");
            if (c.optimizer.bounds_lower->size() != c.optimizer.bounds_upper->size()) {
                throw ConfigError("optimizer bounds must have equal lengths");
            }
            for (std::size_t i = 0; i < c.optimizer.bounds_lower->size(); ++i) {
                if (!((*c.optimizer.bounds_lower)[i] <= (*c.optimizer.bounds_upper)[i])) {
                    throw ConfigError("optimizer bounds must satisfy lower <= upper");
                }
            }
        }
    }

    if (const json* s = find(doc, "scan")) {
        require_object(*s, "scan");
        reject_unknown_keys(*s, "scan",
                            {"infidelity_target", "iteration_budget", "per_site_from",
                             "per_site_to", "per_site_points", "bisection_depth"});
        if (const json* v = find(*s, "infidelity_target")) {
            c.scan.infidelity_target = as_number(*v, "scan.infidelity_target");
        }
        if (!(c.scan.infidelity_target > 0.0) || !(c.scan.infidelity_target < 1.0)) {
            throw ConfigError("scan.infidelity_target must lie in (0, 1)");
        }
        if (const json* v = find(*s, "iteration_budget")) {
            c.scan.iteration_budget = as_integer(*v, "scan.iteration_budget");
            if (c.scan.iteration_budget < 1) throw ConfigError("scan.iteration_budget must be >= 1");
        }
        if (const json* v = find(*s, "per_site_from")) {
            c.scan.per_site_from = as_number(*v, "scan.per_site_from");
        }
        if (const json* v = find(*s, "per_site_to")) {
            c.scan.per_site_to = as_number(*v, "scan.per_site_to");
        }
        if (!(c.scan.per_site_from > 0.0) || !(c.scan.per_site_to > c.scan.per_site_from)) {
            throw ConfigError("scan per-site range needs 0 < per_site_from < per_site_to");
        }
        if (const json* v = find(*s, "per_site_points")) {
            c.scan.per_site_points = as_integer(*v, "scan.per_site_points");
            if (c.scan.per_site_points < 2) throw ConfigError("scan.per_site_points must be >= 2");
        }
        if (const json* v = find(*s, "bisection_depth")) {
            c.scan.bisection_depth = as_integer(*v, "scan.bisection_depth");
            if (c.scan.bisection_depth < 0) throw ConfigError("scan.bisection_depth must be >= 0");
        }
    }

    if (const json* cv = find(doc, "curvature")) {
        require_object(*cv, "curvature");
        reject_unknown_keys(*cv, "curvature", {"rel_from", "rel_to", "points"});
        if (const json* v = find(*cv, "rel_from")) c.curvature.rel_from = as_number(*v, "curvature.rel_from");
        if (const json* v = find(*cv, "rel_to")) c.curvature.rel_to = as_number(*v, "curvature.rel_to");
        if (!(c.curvature.rel_from > 0.0) || !(c.curvature.rel_to > c.curvature.rel_from)) {
            throw ConfigError("curvature range needs 0 < rel_from < rel_to");
        }
        if (const json* v = find(*cv, "points")) {
            c.curvature.points = as_integer(*v, "curvature.points");
            if (c.curvature.points < 2) throw ConfigError("curvature.points must be >= 2");
        }
    }

    if (const json* v = find(doc, "durations")) {
        c.durations = as_number_list(*v, "durations");
        for (double t : c.durations) {
            if (!(t > 0.0)) throw ConfigError("durations must be positive");
        }
        require_strictly_increasing(c.durations, "durations");
    }
    if (const json* v = find(doc, "ratios")) {
        c.ratios = as_number_list(*v, "ratios");
        for (double r : c.ratios) {
            if (!(r > 0.0)) throw ConfigError("ratios must be positive");
        }
        require_strictly_increasing(c.ratios, "ratios");
    }
    if (const json* v = find(doc, "lengths")) {
        c.lengths = as_integer_list(*v, "lengths");
        for (Index n : c.lengths) {
            if (n < 3) throw ConfigError("lengths must be >= 3");
        }
        require_strictly_increasing(c.lengths, "lengths");
    }
    if (const json* v = find(doc, "fit_min_length")) {
        c.fit_min_length = as_integer(*v, "fit_min_length");
        if (c.fit_min_length < 2) throw ConfigError("fit_min_length must be >= 2");
    }

    switch (c.kind) {
    case ExperimentKind::lz_convergence:
        if (c.durations.empty()) throw ConfigError("lz-convergence needs a durations list");
        break;
    case ExperimentKind::lz_qsl_compare:
        if (c.ratios.empty()) throw ConfigError("lz-qsl-compare needs a ratios list");
        break;
    case ExperimentKind::chain_threshold_scan:
    case ExperimentKind::chain_bound_compare:
        if (c.lengths.empty()) throw ConfigError("chain experiments need a lengths list");
        break;
    }
    return c;
}

json to_json(const ExperimentConfig& config) {
    json doc;
    doc["experiment"] = to_string(config.kind);
    if (config.output_dir) doc["output_dir"] = *config.output_dir;

    const bool is_chain = config.kind == ExperimentKind::chain_threshold_scan ||
                          config.kind == ExperimentKind::chain_bound_compare;
    json model;
    if (is_chain) {
        model["length"] = config.chain.length;
        model["coupling"] = config.chain.coupling;
        if (config.chain.guess_trap_strength) {
            model["guess_trap_strength"] = *config.chain.guess_trap_strength;
        }
    } else {
        model["omega"] = config.lz.omega;
        model["gamma0"] = config.lz.gamma0;
    }
    doc["model"] = model;

    json grid;
    if (config.grid.fixed_steps) grid["steps"] = *config.grid.fixed_steps;
    if (config.grid.steps_per_unit_time) {
        grid["steps_per_unit_time"] = *config.grid.steps_per_unit_time;
    }
    if (config.grid.norm_dt_cap) grid["norm_dt_cap"] = *config.grid.norm_dt_cap;
    grid["min_steps"] = config.grid.min_steps;
    grid["max_steps"] = config.grid.max_steps;
    doc["grid"] = grid;

    json opt;
    opt["step_weights"] = config.optimizer.step_weights;
    opt["shape"] = config.optimizer.shape;
    opt["max_iterations"] = config.optimizer.max_iterations;
    opt["target_infidelity"] = config.optimizer.target_infidelity;
    opt["stall_window"] = config.optimizer.stall_window;
    opt["stall_threshold"] = config.optimizer.stall_threshold;
    opt["max_weight_doublings"] = config.optimizer.max_weight_doublings;
    if (config.optimizer.bounds_lower) opt["bounds_lower"] = *config.optimizer.bounds_lower;
    if (config.optimizer.bounds_upper) opt["bounds_upper"] = *config.optimizer.bounds_upper;
    doc["optimizer"] = opt;

    json scan;
    scan["infidelity_target"] = config.scan.infidelity_target;
    scan["iteration_budget"] = config.scan.iteration_budget;
    scan["per_site_from"] = config.scan.per_site_from;
    scan["per_site_to"] = config.scan.per_site_to;
    scan["per_site_points"] = config.scan.per_site_points;
    scan["bisection_depth"] = config.scan.bisection_depth;
    doc["scan"] = scan;

    json curvature;
    curvature["rel_from"] = config.curvature.rel_from;
    curvature["rel_to"] = config.curvature.rel_to;
    curvature["points"] = config.curvature.points;
    doc["curvature"] = curvature;

    if (!config.durations.empty()) doc["durations"] = config.durations;
    if (!config.ratios.empty()) doc["ratios"] = config.ratios;
    if (!config.lengths.empty()) doc["lengths"] = config.lengths;
    doc["fit_min_length"] = config.fit_min_length;
    return doc;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

ExperimentResult run_lz_convergence(const ExperimentConfig& config, const RunOptions& options) {
    const auto out = prepare_output_dir(options);
    const LZModel model(config.lz.omega, config.lz.gamma0);
    const KrotovConfig krotov_config = config.optimizer.to_krotov_config();

    struct Row {
        std::vector<double> trace;
        bool converged = false;
        Index iterations = 0;
        std::string stop_reason;
        CurvatureSeries series;
        bool has_series = false;
        double statistic = kNaN;
        double seconds = 0.0;
    };
    std::vector<Row> rows(config.durations.size());
    run_indexed_tasks(rows.size(), options.jobs, [&](std::size_t i) {
        const StageClock clock;
        const double total_time = config.durations[i];
        const TimeGrid grid(total_time, grid_steps(config.grid, model, total_time));
        OptimizationRecord record =
            optimize(model, model.guess_pulse(grid), grid, krotov_config);
        Row& row = rows[i];
        row.trace = std::move(record.infidelity_trace);
        row.converged = record.converged;
        row.iterations = record.iterations_used;
        row.stop_reason = record.stop_reason;
        try {
            row.series = loglog_second_derivative(row.trace);
            row.statistic = curvature_statistic(row.series);
            row.has_series = true;
        } catch (const ValidationError&) {
            // trace too short for the curvature criterion; reported as such
        }
        row.seconds = clock.seconds();
    });

    ExperimentResult result;
    RunManifest manifest(to_string(config.kind), to_json(config));
    json summary;
    summary["experiment"] = to_string(config.kind);
    summary["per_duration"] = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& row = rows[i];
        const double total_time = config.durations[i];
        const std::string tag = duration_tag(total_time);

        std::vector<std::vector<double>> trace_rows;
        trace_rows.reserve(row.trace.size());
        for (std::size_t n = 0; n < row.trace.size(); ++n) {
            trace_rows.push_back({static_cast<double>(n), row.trace[n]});
        }
        const auto trace_path = out / ("convergence_T" + tag + ".csv");
        write_csv(trace_path, "time unit 1/omega (hbar = 1); iteration and infidelity dimensionless",
                  {"iteration", "infidelity"}, trace_rows);
        manifest.add_output(trace_path);

        std::vector<std::vector<double>> curvature_rows;
        for (std::size_t k = 0; k < row.series.d2.size(); ++k) {
            curvature_rows.push_back({row.series.log_n[k], row.series.d2[k]});
        }
        const auto curvature_path = out / ("curvature_T" + tag + ".csv");
        write_csv(curvature_path, "log_n = ln(iteration), d2 = d^2(log I)/d(log n)^2; dimensionless",
                  {"log_n", "d2"}, curvature_rows);
        manifest.add_output(curvature_path);
        manifest.add_stage("optimize_T" + tag, row.seconds);

        std::string regime = "unavailable";
        if (row.has_series) {
            regime = row.statistic < -0.05 ? "converging"
                                           : (row.statistic > 0.05 ? "saturating" : "near_zero");
        }
        summary["per_duration"].push_back({
            {"total_time", total_time},
            {"final_infidelity", row.trace.back()},
            {"iterations", row.iterations},
            {"converged", row.converged},
            {"stop_reason", row.stop_reason},
            {"curvature_statistic", row.has_series ? json(row.statistic) : json(nullptr)},
            {"regime", regime},
        });
        say(options, result,
            "T=" + tag + ": I=" + format_double_compact(row.trace.back()) + " after " +
                std::to_string(row.iterations) + " iterations (" + row.stop_reason +
                "), curvature " + (row.has_series ? format_double_compact(row.statistic) : "n/a"));
    }
    const auto summary_path = out / "summary.json";
    write_json_file(summary_path, summary);
    manifest.add_output(summary_path);
    manifest.write(out);
    return result;
}

ExperimentResult run_lz_qsl_compare(const ExperimentConfig& config, const RunOptions& options) {
    const auto out = prepare_output_dir(options);
    const KrotovConfig krotov_config = config.optimizer.to_krotov_config();

    struct Row {
        double ratio = 0.0;
        double t_eq2 = kNaN;
        double t_curvature = kNaN;
        bool bracketed = false;
        std::string note;
        double seconds = 0.0;
    };
    std::vector<Row> rows(config.ratios.size());
    run_indexed_tasks(rows.size(), options.jobs, [&](std::size_t i) {
        const StageClock clock;
        Row& row = rows[i];
        row.ratio = config.ratios[i];
        const LZModel model(config.lz.omega, -row.ratio * config.lz.omega);
        const auto [psi0, psi_goal] = model_boundary_states(model);
        row.t_eq2 = bhattacharyya_static_tqsl(model.hamiltonian_for(0.0), psi0, psi_goal).t_qsl;
        const std::vector<double> t_grid = linspace(
            config.curvature.rel_from * row.t_eq2, config.curvature.rel_to * row.t_eq2,
            config.curvature.points);
        const StepRule rule = [&](double total_time) {
            return grid_steps(config.grid, model, total_time);
        };
        try {
            row.t_curvature =
                detect_tqsl_curvature(model, t_grid, rule, krotov_config).t_qsl;
            row.bracketed = true;
        } catch (const UnbracketedError& e) {
            row.note = e.what();
        }
        row.seconds = clock.seconds();
    });

    ExperimentResult result;
    RunManifest manifest(to_string(config.kind), to_json(config));
    std::vector<std::vector<double>> csv_rows;
    for (const Row& row : rows) {
        const double gap = row.bracketed ? std::abs(row.t_curvature - row.t_eq2) / row.t_eq2 : kNaN;
        csv_rows.push_back({-row.ratio, row.t_eq2, row.t_curvature, gap});
        manifest.add_stage("ratio_" + format_double_compact(row.ratio), row.seconds);
        if (!row.bracketed) {
            manifest.add_note("ratio " + format_double_compact(row.ratio) + " unbracketed: " +
                              row.note);
        }
        say(options, result,
            "-gamma0/omega=" + format_double_compact(row.ratio) + ": t_eq2=" +
                format_double_compact(row.t_eq2) +
                (row.bracketed ? ", t_curvature=" + format_double_compact(row.t_curvature) +
                                     ", gap=" + format_double_compact(gap)
                               : ", curvature crossing unbracketed"));
    }
    const auto csv_path = out / "qsl_compare.csv";
    write_csv(csv_path, "times in 1/omega (hbar = 1); gamma0_over_omega and relative_gap dimensionless",
              {"gamma0_over_omega", "t_eq2", "t_curvature", "relative_gap"}, csv_rows);
    manifest.add_output(csv_path);
    manifest.write(out);
    return result;
}

ExperimentResult run_chain_threshold_scan(const ExperimentConfig& config,
                                          const RunOptions& options) {
    const auto out = prepare_output_dir(options);
    std::vector<ChainScanRow> rows(config.lengths.size());
    run_indexed_tasks(rows.size(), options.jobs, [&](std::size_t i) {
        rows[i] = scan_one_chain(config, config.lengths[i]);
    });

    ExperimentResult result;
    RunManifest manifest(to_string(config.kind), to_json(config));
    std::vector<std::vector<double>> csv_rows;
    std::vector<double> fit_x, fit_y;
    std::vector<Index> excluded;
    for (const ChainScanRow& row : rows) {
        csv_rows.push_back({static_cast<double>(row.length), row.t_star, row.iterations,
                            row.infidelity});
        manifest.add_stage("scan_N" + std::to_string(row.length), row.seconds);
        if (!row.note.empty()) {
            manifest.add_note("N=" + std::to_string(row.length) + ": " + row.note);
        }
        if (row.ok && row.length >= config.fit_min_length) {
            fit_x.push_back(static_cast<double>(row.length));
            fit_y.push_back(row.t_star);
        } else {
            excluded.push_back(row.length);
        }
        say(options, result,
            "N=" + std::to_string(row.length) + ": " +
                (row.ok ? "T*=" + format_double_compact(row.t_star) + " (I=" +
                              format_double_compact(row.infidelity) + ")"
                        : "failed (best I=" + format_double_compact(row.infidelity) + ")"));
    }
    const auto csv_path = out / "scaling.csv";
    write_csv(csv_path, "time unit 1/J (hbar = 1); N and iterations dimensionless",
              {"N", "T_star", "converged_iterations", "I_reached"}, csv_rows);
    manifest.add_output(csv_path);

    json fit_doc;
    fit_doc["points_used"] = fit_x.size();
    fit_doc["excluded_lengths"] = excluded;
    if (fit_x.size() >= 2) {
        const LineFit fit = fit_line(fit_x, fit_y);
        fit_doc["defined"] = true;
        fit_doc["slope"] = fit.slope;
        fit_doc["intercept"] = fit.intercept;
        fit_doc["r_squared"] = fit.r_squared;
        say(options, result,
            "fit: T* = " + format_double_compact(fit.slope) + " * N + " +
                format_double_compact(fit.intercept) +
                " (R^2 = " + format_double_compact(fit.r_squared) + ")");
    } else {
        fit_doc["defined"] = false;
        if (fit_x.size() == 1) {
            fit_doc["point"] = {{"N", fit_x[0]}, {"T_star", fit_y[0]}};
        }
        say(options, result, "fit undefined: fewer than two usable scan points");
    }
    const auto fit_path = out / "fit.json";
    write_json_file(fit_path, fit_doc);
    manifest.add_output(fit_path);
    manifest.write(out);

    const bool all_failed =
        std::none_of(rows.begin(), rows.end(), [](const ChainScanRow& r) { return r.ok; });
    result.exit_code = all_failed ? 3 : 0;
    return result;
}

ExperimentResult run_chain_bound_compare(const ExperimentConfig& config,
                                         const RunOptions& options) {
    const auto out = prepare_output_dir(options);
    const KrotovConfig krotov_config = config.optimizer.to_krotov_config();

    struct Row {
        ChainScanRow scan;
        double bound1 = kNaN;
        double bound2 = kNaN;
        double eta = kNaN;
        EnergySpreadProfile profile2;
        ProfileShapeCheck shape;
        double final_infidelity = kNaN;
    };
    std::vector<Row> rows(config.lengths.size());
    run_indexed_tasks(rows.size(), options.jobs, [&](std::size_t i) {
        Row& row = rows[i];
        row.scan = scan_one_chain(config, config.lengths[i]);
        if (!row.scan.ok) return;
        const Index length = config.lengths[i];
        const SpinChainModel model(length, config.chain.coupling,
                                   config.chain.guess_trap_strength);
        const double t_star = row.scan.t_star;
        const TimeGrid grid(t_star, grid_steps(config.grid, model, t_star));
        KrotovConfig rerun = krotov_config;
        rerun.max_iterations = config.scan.iteration_budget;
        rerun.target_infidelity = config.scan.infidelity_target;
        const OptimizationRecord record =
            optimize(model, model.guess_pulse(grid), grid, rerun);
        row.final_infidelity = record.infidelity_trace.back();
        const EnergySpreadProfile profile1 = mean_energy_spread(
            model, record.final_pulse, grid, SpreadReference::fixed_endpoint);
        row.profile2 =
            mean_energy_spread(model, record.final_pulse, grid, SpreadReference::evolving);
        const QSLEstimate bound = per_site_bound(profile1, row.profile2, length);
        row.bound1 = bound.details.at("bound_1");
        row.bound2 = bound.details.at("bound_2");
        // eta measures how far the achieved time beats the per-site estimate
        row.eta = bound.t_qsl / t_star;
        row.shape = check_profile_shape(row.profile2);
    });

    ExperimentResult result;
    RunManifest manifest(to_string(config.kind), to_json(config));
    std::vector<std::vector<double>> csv_rows;
    json summary;
    summary["experiment"] = to_string(config.kind);
    summary["per_length"] = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& row = rows[i];
        const Index length = config.lengths[i];
        csv_rows.push_back({static_cast<double>(length), row.bound1, row.bound2,
                            row.scan.t_star, row.eta});
        manifest.add_stage("bounds_N" + std::to_string(length), row.scan.seconds);
        if (!row.scan.note.empty()) {
            manifest.add_note("N=" + std::to_string(length) + ": " + row.scan.note);
        }
        if (row.scan.ok) {
            std::vector<std::vector<double>> profile_rows;
            for (std::size_t j = 0; j < row.profile2.times.size(); ++j) {
                profile_rows.push_back({row.profile2.times[j], row.profile2.spread_values[j]});
            }
            const auto profile_path =
                out / ("spread_profile_N" + std::to_string(length) + ".csv");
            write_csv(profile_path, "t in 1/J (hbar = 1); dE2 in J (evolving-state energy spread)",
                      {"t", "dE2"}, profile_rows);
            manifest.add_output(profile_path);
        }
        summary["per_length"].push_back({
            {"N", length},
            {"ok", row.scan.ok},
            {"t_star", row.scan.ok ? json(row.scan.t_star) : json(nullptr)},
            {"eta", row.scan.ok ? json(row.eta) : json(nullptr)},
            {"final_infidelity", row.scan.ok ? json(row.final_infidelity) : json(nullptr)},
            {"profile_center_rel_std",
             row.scan.ok && row.shape.center_mean > 0.0
                 ? json(row.shape.center_std / row.shape.center_mean)
                 : json(nullptr)},
            {"profile_nearly_constant_center", row.scan.ok ? json(row.shape.nearly_constant_center) : json(nullptr)},
            {"profile_max_excursion_at_end", row.scan.ok ? json(row.shape.max_excursion_at_end) : json(nullptr)},
        });
        say(options, result,
            "N=" + std::to_string(length) + ": " +
                (row.scan.ok
                     ? "T*=" + format_double_compact(row.scan.t_star) + ", eta=" +
                           format_double_compact(row.eta) + ", profile " +
                           (row.shape.passed() ? "flat-then-oscillating" : "atypical")
                     : "failed (best I=" + format_double_compact(row.scan.infidelity) + ")"));
    }
    const auto csv_path = out / "bounds.csv";
    write_csv(csv_path, "time unit 1/J (hbar = 1); eta dimensionless",
              {"N", "bound1", "bound2", "t_star", "eta"}, csv_rows);
    manifest.add_output(csv_path);
    const auto summary_path = out / "summary.json";
    write_json_file(summary_path, summary);
    manifest.add_output(summary_path);
    manifest.write(out);

    const bool all_failed = std::none_of(rows.begin(), rows.end(),
                                         [](const Row& r) { return r.scan.ok; });
    result.exit_code = all_failed ? 3 : 0;
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    switch (config.kind) {
    case ExperimentKind::lz_convergence: return run_lz_convergence(config, options);
    case ExperimentKind::lz_qsl_compare: return run_lz_qsl_compare(config, options);
    case ExperimentKind::chain_threshold_scan: return run_chain_threshold_scan(config, options);
    case ExperimentKind::chain_bound_compare: return run_chain_bound_compare(config, options);
    }
    throw ConfigError("unknown experiment kind");
}

ProfileShapeCheck check_profile_shape(const EnergySpreadProfile& profile) {
    if (profile.reference != SpreadReference::evolving) {
        throw ValidationError("profile shape check expects an evolving-state profile");
    }
    if (profile.times.size() < 10) {
        throw ValidationError("profile too short for a shape check");
    }
    ProfileShapeCheck check;
    const double total_time = profile.times.back();
    double acc = 0.0, acc2 = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < profile.times.size(); ++j) {
        const double t = profile.times[j];
        if (t >= 0.1 * total_time && t <= 0.9 * total_time) {
            acc += profile.spread_values[j];
            acc2 += profile.spread_values[j] * profile.spread_values[j];
            ++count;
        }
    }
    if (count < 2) throw ValidationError("profile too short for a shape check");
    check.center_mean = acc / static_cast<double>(count);
    const double var =
        std::max(0.0, acc2 / static_cast<double>(count) - check.center_mean * check.center_mean);
    check.center_std = std::sqrt(var);
    check.nearly_constant_center = check.center_std < 0.25 * check.center_mean;

    double best = -1.0;
    for (std::size_t j = 0; j < profile.times.size(); ++j) {
        const double excursion = std::abs(profile.spread_values[j] - check.center_mean);
        if (excursion > best) {
            best = excursion;
            check.max_excursion_time = profile.times[j];
        }
    }
    check.max_excursion_at_end = check.max_excursion_time >= 0.9 * total_time;
    return check;
}

} // namespace qoct
