#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qoct/krotov.hpp"
#include "qoct/model.hpp"

namespace qoct {

enum class QSLMethod {
    bhattacharyya_static,
    curvature,
    threshold_scan,
    mean_spread_bound_1,
    mean_spread_bound_2,
};

std::string to_string(QSLMethod method);

struct QSLEstimate {
    double t_qsl = 0.0;
    QSLMethod method = QSLMethod::bhattacharyya_static;
    // Method-specific numbers (overlaps, spreads, bracketing statistics ...).
    std::map<std::string, double> details;
    std::vector<std::string> warnings;
};

/// Time-independent bound: t >= arccos|<psi0|psiG>| / spread(H0, psi0).
QSLEstimate bhattacharyya_static_tqsl(const HermitianOperator& h0, const QuantumState& psi0,
                                      const QuantumState& psi_goal);

// Which state the instantaneous spread is evaluated on.
enum class SpreadReference {
    fixed_endpoint,  // a fixed boundary state (the smaller of the two means)
    evolving,        // the forward-propagated state psi(t)
};

enum class FixedStateChoice { initial, target, not_applicable };

struct EnergySpreadProfile {
    std::vector<double> times;
    std::vector<double> spread_values;
    double mean = 0.0;  // (1/T) integral of the profile, trapezoidal rule
    SpreadReference reference = SpreadReference::fixed_endpoint;
    FixedStateChoice fixed_state = FixedStateChoice::not_applicable;
};

EnergySpreadProfile mean_energy_spread(const ControlledModel& model, const ControlPulse& pulse,
                                       const TimeGrid& grid, SpreadReference reference,
                                       PropagatorBackend backend = PropagatorBackend::automatic);

// Transfer-time bound (N-1) * max(pi/(2 mean1), pi/(2 mean2)) from one
// fixed-endpoint profile and one evolving-state profile.
QSLEstimate per_site_bound(const EnergySpreadProfile& profile1,
                           const EnergySpreadProfile& profile2, Index n_sites);

struct CurvatureSeries {
    std::vector<double> log_n;  // uniform grid in ln(iteration)
    std::vector<double> d2;     // smoothed d^2(log I)/d(log n)^2
    bool clamped = false;       // some nonpositive trace values were clamped
};

// Resamples log I onto a uniform log-n grid (geometric ratio 1.05, linear
// interpolation), smooths with a centered 9-sample moving average, then
// takes centered second differences.
CurvatureSeries loglog_second_derivative(const std::vector<double>& infidelity_trace);

// Median of the series over the last decade of n: positive for saturating
// traces, negative for exponentially converging ones.
double curvature_statistic(const CurvatureSeries& series);

// Convergence trace produced for one candidate duration.
using TraceRunner = std::function<std::vector<double>(double total_time)>;
// Grid resolution chosen for one candidate duration.
using StepRule = std::function<Index(double total_time)>;

struct CurvaturePoint {
    double total_time = 0.0;
    double statistic = 0.0;
};

// Locates the sign change of the curvature statistic over an increasing
// duration grid; the estimate interpolates linearly between the bracketing
// grid points.  Throws UnbracketedError when no sign change occurs.
QSLEstimate detect_tqsl_curvature_with(const TraceRunner& run_trace,
                                       const std::vector<double>& t_grid,
                                       std::vector<CurvaturePoint>* points = nullptr);

QSLEstimate detect_tqsl_curvature(const ControlledModel& model,
                                  const std::vector<double>& t_grid, const StepRule& steps_for,
                                  const KrotovConfig& optimizer_config,
                                  std::vector<CurvaturePoint>* points = nullptr);

struct ThresholdScanConfig {
    double infidelity_target = 5e-5;  // I*
    Index iteration_budget = 100000;  // iterations allowed per duration
    std::vector<double> t_grid;       // strictly increasing candidate durations
    Index bisection_depth = 10;
};

struct ScanOutcome {
    bool reached = false;     // hit the target within the budget
    double infidelity = 1.0;  // final infidelity of the run
    Index iterations = 0;
};
using ScanRunner = std::function<ScanOutcome(double total_time)>;

// Smallest duration whose optimization reaches the target, assuming
// reachability is monotone in T: the coarse pass walks the grid downward
// from the largest duration and stops at the first failure, then bisection
// refines the bracket.  Throws ScanFailedError when the largest grid
// duration already fails.
QSLEstimate threshold_time_scan_with(const ScanRunner& runner,
                                     const ThresholdScanConfig& config);

QSLEstimate threshold_time_scan(const ControlledModel& model, const ThresholdScanConfig& config,
                                const StepRule& steps_for,
                                const KrotovConfig& optimizer_config);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace qoct
