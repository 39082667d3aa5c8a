#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qoct/model.hpp"

namespace qoct {

// Multiplier on the pulse update, pinning the endpoints by default.
enum class ShapeFunction {
    sin_squared,  // sin^2(pi t / T): zero at t = 0 and t = T
    flat,         // identically 1
};

double shape_value(ShapeFunction shape, double t, double total_time);

// Box constraint applied to every control sample after each update.
struct ControlBounds {
    RVector lower;  // one entry per control
    RVector upper;
};

struct KrotovConfig {
    // Per-control step weights lambda_k > 0.  Empty selects the default
    // heuristic lambda_k = 1 / (2 max_j |guess_k(t_j)|).
    RVector step_weights;
    ShapeFunction shape = ShapeFunction::sin_squared;
    Index max_iterations = 1000;
    double target_infidelity = 1e-5;
    // Stop when the relative improvement of I over `stall_window` iterations
    // falls below `stall_threshold` while still above the target.  A window
    // of 0 disables the check.
    Index stall_window = 500;
    double stall_threshold = 1e-6;
    // A sweep that fails to decrease I is retried against the same backward
    // pass with the effective step weights doubled, at most this many times
    // per sweep.  The doubling is a transient trust-region multiplier; the
    // base weights are never mutated.
    Index max_weight_doublings = 30;
    std::optional<ControlBounds> control_bounds;
    PropagatorBackend backend = PropagatorBackend::automatic;
};

struct OptimizationRecord {
    // I(n) for n = 0..iterations_used; entry 0 is the guess infidelity.
    std::vector<double> infidelity_trace;
    ControlPulse final_pulse;
    bool converged = false;
    Index iterations_used = 0;
    // "target", "iteration_limit", or "stalled".
    std::string stop_reason;
    // The base step weights the run used: the config's, or the defaults
    // derived from the guess pulse.
    RVector final_step_weights;
};

RVector default_step_weights(const ControlPulse& guess);

// One optimization iteration: forward pass under `pulse`, backward costate
// pass, then the node-by-node update sweep with immediate feedback.  No
// step-weight adaptation happens here; monotonicity is only guaranteed for
// large enough lambda.
std::pair<ControlPulse, double> krotov_sweep(const ControlledModel& model,
                                             const ControlPulse& pulse, const TimeGrid& grid,
                                             const KrotovConfig& config);

// Full optimization loop with monotonicity enforcement via transient
// step-weight doubling, target/stall/iteration-limit termination, and a
// per-iteration infidelity trace.  Deterministic for identical inputs.
OptimizationRecord optimize(const ControlledModel& model, const ControlPulse& guess,
                            const TimeGrid& grid, const KrotovConfig& config);

struct GradientProbe {
    double analytic;  // Im <chi(t_j)| dH/dx_k |psi(t_j)> on the frozen pulse
    double numeric;   // central finite difference of the infidelity, rescaled
};

// Compares the update direction against -dI/dx_k(t_j) / (2 dt) obtained by
// re-propagating with the control sample perturbed by +-eps.
GradientProbe gradient_check(const ControlledModel& model, const ControlPulse& pulse,
                             const TimeGrid& grid, Index node, Index control,
                             double eps = 1e-6,
                             PropagatorBackend backend = PropagatorBackend::automatic);

} // namespace qoct
