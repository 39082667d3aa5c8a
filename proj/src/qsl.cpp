#include "qoct/qsl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qoct {

namespace {

constexpr double kTraceFloor = 1e-16;
constexpr double kResampleRatio = 1.05;
constexpr int kSmoothingWindow = 9;  // centered, must be odd

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of empty range");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

double trapezoidal_mean(const std::vector<double>& values) {
    // Average over a uniform grid spanning the whole interval.
    const std::size_t m = values.size() - 1;
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t j = 1; j < m; ++j) acc += values[j];
    return acc / static_cast<double>(m);
}

} // namespace

std::string to_string(QSLMethod method) {
    switch (method) {
    case QSLMethod::bhattacharyya_static: return "bhattacharyya_static";
    case QSLMethod::curvature: return "curvature";
    case QSLMethod::threshold_scan: return "threshold_scan";
    case QSLMethod::mean_spread_bound_1: return "mean_spread_bound_1";
    case QSLMethod::mean_spread_bound_2: return "mean_spread_bound_2";
    }
    return "unknown";
}

QSLEstimate bhattacharyya_static_tqsl(const HermitianOperator& h0, const QuantumState& psi0,
                                      const QuantumState& psi_goal) {
    if (!psi0.is_normalized() || !psi_goal.is_normalized()) {
        throw ValidationError("bhattacharyya_static_tqsl requires normalized states");
    }
    const EnergyStats stats = energy_stats(h0, psi0);
    if (stats.spread < 1e-12 * std::max(1.0, std::abs(stats.mean))) {
        throw ZeroSpreadError("initial state has zero energy spread under H0");
    }
    const double o = std::min(std::abs(overlap(psi0, psi_goal)), 1.0);
    if (o >= 1.0 - 1e-15) {
        throw ValidationError("initial and goal states coincide; no finite bound");
    }
    QSLEstimate est;
    est.method = QSLMethod::bhattacharyya_static;
    est.t_qsl = std::acos(o) / stats.spread;
    est.details["overlap"] = o;
    est.details["spread"] = stats.spread;
    return est;
}

EnergySpreadProfile mean_energy_spread(const ControlledModel& model, const ControlPulse& pulse,
                                       const TimeGrid& grid, SpreadReference reference,
                                       PropagatorBackend backend) {
    if (!pulse.matches(grid) || pulse.num_controls() != model.num_controls()) {
        throw DimensionError("mean_energy_spread: pulse/grid/model mismatch");
    }
    if (backend == PropagatorBackend::automatic) backend = model.backend();
    const Index nodes = grid.num_nodes();

    EnergySpreadProfile profile;
    profile.reference = reference;
    profile.times.resize(nodes);
    for (Index j = 0; j < nodes; ++j) profile.times[j] = grid.node_time(j);

    const auto profile_for_fixed = [&](const QuantumState& phi) {
        std::vector<double> values(nodes);
        for (Index j = 0; j < nodes; ++j) {
            values[j] = energy_stats(hamiltonian_at_node(model, pulse, j), phi).spread;
        }
        return values;
    };

    if (reference == SpreadReference::fixed_endpoint) {
        std::vector<double> on_initial = profile_for_fixed(model.initial_state());
        std::vector<double> on_target = profile_for_fixed(model.goal_state());
        const double mean_initial = trapezoidal_mean(on_initial);
        const double mean_target = trapezoidal_mean(on_target);
        // Smaller mean wins (it gives the tighter bound), but a zero-mean
        // profile (endpoint is an eigenstate throughout) is only taken when
        // the other one is zero too, so downstream bounds stay finite.
        const bool pick_initial = (mean_target <= 0.0) ||
                                  (mean_initial > 0.0 && mean_initial <= mean_target);
        if (pick_initial) {
            profile.spread_values = std::move(on_initial);
            profile.mean = mean_initial;
            profile.fixed_state = FixedStateChoice::initial;
        } else {
            profile.spread_values = std::move(on_target);
            profile.mean = mean_target;
            profile.fixed_state = FixedStateChoice::target;
        }
    } else {
        Trajectory trajectory;
        propagate(model.initial_state(), pulse_node_supplier(model, pulse), grid,
                  Direction::forward, &trajectory, backend);
        profile.spread_values.resize(nodes);
        for (Index j = 0; j < nodes; ++j) {
            profile.spread_values[j] =
                energy_stats(hamiltonian_at_node(model, pulse, j),
                             QuantumState(trajectory.states[j]))
                    .spread;
        }
        profile.mean = trapezoidal_mean(profile.spread_values);
        profile.fixed_state = FixedStateChoice::not_applicable;
    }
    return profile;
}

QSLEstimate per_site_bound(const EnergySpreadProfile& profile1,
                           const EnergySpreadProfile& profile2, Index n_sites) {
    if (profile1.reference != SpreadReference::fixed_endpoint ||
        profile2.reference != SpreadReference::evolving) {
        throw ValidationError(
            "per_site_bound expects a fixed-endpoint profile and an evolving-state profile");
    }
    if (n_sites < 2) throw ValidationError("per_site_bound requires n_sites >= 2");
    if (!(profile1.mean > 0.0) || !(profile2.mean > 0.0)) {
        throw ZeroSpreadError("per_site_bound requires positive mean spreads");
    }
    const double sites = static_cast<double>(n_sites - 1);
    const double bound1 = sites * std::numbers::pi / (2.0 * profile1.mean);
    const double bound2 = sites * std::numbers::pi / (2.0 * profile2.mean);
    QSLEstimate est;
    est.t_qsl = std::max(bound1, bound2);
    est.method = bound1 >= bound2 ? QSLMethod::mean_spread_bound_1
                                  : QSLMethod::mean_spread_bound_2;
    est.details["mean_spread_1"] = profile1.mean;
    est.details["mean_spread_2"] = profile2.mean;
    est.details["bound_1"] = bound1;
    est.details["bound_2"] = bound2;
    return est;
}

CurvatureSeries loglog_second_derivative(const std::vector<double>& infidelity_trace) {
    // Entry 0 is the guess (iteration 0) and has no log; usable points start
    // at iteration 1.
    if (infidelity_trace.size() < 2) {
        throw ValidationError("trace too short for curvature analysis");
    }
    CurvatureSeries series;
    const std::size_t last_n = infidelity_trace.size() - 1;
    std::vector<double> log_i(infidelity_trace.size());
    for (std::size_t n = 0; n < infidelity_trace.size(); ++n) {
        double v = infidelity_trace[n];
        if (v < kTraceFloor) {
            v = kTraceFloor;
            series.clamped = true;
        }
        log_i[n] = std::log(v);
    }

    const double h = std::log(kResampleRatio);
    const std::size_t num_samples =
        static_cast<std::size_t>(std::floor(std::log(static_cast<double>(last_n)) / h)) + 1;
    if (num_samples < static_cast<std::size_t>(kSmoothingWindow) + 3) {
        throw ValidationError("trace too short for curvature analysis (needs " +
                              std::to_string(kSmoothingWindow + 3) + " log-spaced samples, has " +
                              std::to_string(num_samples) + ")");
    }
    std::vector<double> x(num_samples), y(num_samples);
    for (std::size_t k = 0; k < num_samples; ++k) {
        x[k] = static_cast<double>(k) * h;
        const double n = std::exp(x[k]);
        const auto lo = std::min(static_cast<std::size_t>(n), last_n - 1);
        const auto hi = lo + 1;
        if (n <= static_cast<double>(lo) || lo == 0) {
            y[k] = log_i[lo == 0 ? 1 : lo];
            continue;
        }
        const double t = (x[k] - std::log(static_cast<double>(lo))) /
                         (std::log(static_cast<double>(hi)) - std::log(static_cast<double>(lo)));
        y[k] = (1.0 - t) * log_i[lo] + t * log_i[hi];
    }

    const std::size_t half = kSmoothingWindow / 2;
    std::vector<double> smoothed(num_samples);
    for (std::size_t k = half; k + half < num_samples; ++k) {
        double acc = 0.0;
        for (std::size_t i = k - half; i <= k + half; ++i) acc += y[i];
        smoothed[k] = acc / kSmoothingWindow;
    }
    for (std::size_t k = half + 1; k + half + 1 < num_samples; ++k) {
        series.log_n.push_back(x[k]);
        series.d2.push_back((smoothed[k + 1] - 2.0 * smoothed[k] + smoothed[k - 1]) / (h * h));
    }
    return series;
}

double curvature_statistic(const CurvatureSeries& series) {
    if (series.d2.empty()) throw ValidationError("empty curvature series");
    const double cutoff = series.log_n.back() - std::log(10.0);
    std::vector<double> tail;
    for (std::size_t k = 0; k < series.d2.size(); ++k) {
        if (series.log_n[k] >= cutoff) tail.push_back(series.d2[k]);
    }
    return median(std::move(tail));
}

QSLEstimate detect_tqsl_curvature_with(const TraceRunner& run_trace,
                                       const std::vector<double>& t_grid,
                                       std::vector<CurvaturePoint>* points) {
    if (t_grid.size() < 2) throw ValidationError("duration grid needs at least two points");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
        std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end()) {
        throw ValidationError("duration grid must be strictly increasing");
    }
    std::vector<CurvaturePoint> local;
    std::vector<CurvaturePoint>& pts = points ? *points : local;
    pts.clear();
    bool clamped_any = false;
    for (const double t : t_grid) {
        const CurvatureSeries series = loglog_second_derivative(run_trace(t));
        clamped_any = clamped_any || series.clamped;
        pts.push_back({t, curvature_statistic(series)});
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i].statistic >= 0.0 && pts[i + 1].statistic < 0.0) {
            const double s0 = pts[i].statistic;
            const double s1 = pts[i + 1].statistic;
            QSLEstimate est;
            est.method = QSLMethod::curvature;
            est.t_qsl = pts[i].total_time +
                        s0 / (s0 - s1) * (pts[i + 1].total_time - pts[i].total_time);
            est.details["t_below"] = pts[i].total_time;
            est.details["t_above"] = pts[i + 1].total_time;
            est.details["statistic_below"] = s0;
            est.details["statistic_above"] = s1;
            if (clamped_any) est.warnings.push_back("some trace values clamped at 1e-16");
            return est;
        }
    }
    throw UnbracketedError("curvature statistic does not change sign over the duration grid (" +
                           std::to_string(pts.front().statistic) + " at T=" +
                           std::to_string(pts.front().total_time) + " to " +
                           std::to_string(pts.back().statistic) + " at T=" +
                           std::to_string(pts.back().total_time) + ")");
}

QSLEstimate detect_tqsl_curvature(const ControlledModel& model,
                                  const std::vector<double>& t_grid, const StepRule& steps_for,
                                  const KrotovConfig& optimizer_config,
                                  std::vector<CurvaturePoint>* points) {
    const TraceRunner runner = [&](double total_time) {
        const TimeGrid grid(total_time, steps_for(total_time));
        return optimize(model, model.guess_pulse(grid), grid, optimizer_config)
            .infidelity_trace;
    };
    return detect_tqsl_curvature_with(runner, t_grid, points);
}

QSLEstimate threshold_time_scan_with(const ScanRunner& runner,
                                     const ThresholdScanConfig& config) {
    if (!(config.infidelity_target > 0.0) || !(config.infidelity_target < 1.0)) {
        throw ValidationError("scan infidelity target must lie in (0, 1)");
    }
    if (config.t_grid.empty()) throw ValidationError("scan needs a duration grid");
    if (!std::is_sorted(config.t_grid.begin(), config.t_grid.end()) ||
        std::adjacent_find(config.t_grid.begin(), config.t_grid.end()) !=
            config.t_grid.end()) {
        throw ValidationError("scan duration grid must be strictly increasing");
    }
    if (config.bisection_depth < 0) throw ValidationError("bisection depth must be >= 0");

    Index runs = 0;
    const auto evaluate = [&](double t) {
        ++runs;
        return runner(t);
    };

    QSLEstimate est;
    est.method = QSLMethod::threshold_scan;

    // Coarse pass, walking down from the longest duration; failing runs are
    // the expensive ones (they exhaust the iteration budget), so under the
    // monotone-reachability assumption at most one occurs here.
    double best_success_t = 0.0;
    ScanOutcome best_success;
    bool have_failure = false;
    double failure_t = 0.0;
    for (std::size_t i = config.t_grid.size(); i-- > 0;) {
        const double t = config.t_grid[i];
        const ScanOutcome outcome = evaluate(t);
        if (outcome.reached) {
            best_success_t = t;
            best_success = outcome;
        } else {
            if (i + 1 == config.t_grid.size()) {
                throw ScanFailedError("largest grid duration failed to reach the target", t,
                                      outcome.infidelity);
            }
            have_failure = true;
            failure_t = t;
            break;
        }
    }
    if (!have_failure) {
        est.warnings.push_back(
            "every grid duration reached the target; the threshold may lie below the grid");
        est.t_qsl = best_success_t;
        est.details["infidelity_at_result"] = best_success.infidelity;
        est.details["iterations_at_result"] = static_cast<double>(best_success.iterations);
        est.details["runs"] = static_cast<double>(runs);
        est.details["bracket_low"] = 0.0;
        est.details["bracket_high"] = best_success_t;
        return est;
    }

    double lo = failure_t;
    double hi = best_success_t;
    for (Index depth = 0; depth < config.bisection_depth; ++depth) {
        const double mid = 0.5 * (lo + hi);
        const ScanOutcome outcome = evaluate(mid);
        if (outcome.reached) {
            hi = mid;
            best_success_t = mid;
            best_success = outcome;
        } else {
            lo = mid;
        }
    }
    est.t_qsl = hi;
    est.details["infidelity_at_result"] = best_success.infidelity;
    est.details["iterations_at_result"] = static_cast<double>(best_success.iterations);
    est.details["runs"] = static_cast<double>(runs);
    est.details["bracket_low"] = lo;
    est.details["bracket_high"] = hi;
    return est;
}

QSLEstimate threshold_time_scan(const ControlledModel& model, const ThresholdScanConfig& config,
                                const StepRule& steps_for,
                                const KrotovConfig& optimizer_config) {
    const ScanRunner runner = [&](double total_time) {
        const TimeGrid grid(total_time, steps_for(total_time));
        KrotovConfig run_config = optimizer_config;
        run_config.max_iterations = config.iteration_budget;
        run_config.target_infidelity = config.infidelity_target;
        const OptimizationRecord record =
            optimize(model, model.guess_pulse(grid), grid, run_config);
        return ScanOutcome{record.converged, record.infidelity_trace.back(),
                           record.iterations_used};
    };
    return threshold_time_scan_with(runner, config);
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ValidationError("line fit needs at least two (x, y) pairs");
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw ValidationError("line fit needs distinct x values");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

} // namespace qoct
