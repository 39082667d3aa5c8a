#include "qoct/krotov.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qoct {

namespace {

// Tolerated infidelity increase when deciding whether a sweep was monotone;
// well inside the 1e-9 budget the trace invariant allows.
constexpr double kMonotoneSlack = 1e-12;

class Engine {
public:
    Engine(const ControlledModel& model, const ControlPulse& guess, const TimeGrid& grid,
           const KrotovConfig& config)
        : model_(model),
          grid_(grid),
          config_(config),
          pulse_(guess),
          psi0_(model.initial_state().amplitudes()),
          goal_(model.goal_state().amplitudes()) {
        if (!guess.matches(grid)) {
            throw DimensionError("pulse has " + std::to_string(guess.num_nodes()) +
                                 " nodes, grid expects " + std::to_string(grid.num_nodes()));
        }
        if (guess.num_controls() != model.num_controls()) {
            throw DimensionError("pulse/model control count mismatch");
        }
        if (!(config.target_infidelity > 0.0) || !(config.target_infidelity < 1.0)) {
            throw ValidationError("target_infidelity must lie in (0, 1)");
        }
        if (config.step_weights.size() == 0) {
            lambda_ = default_step_weights(guess);
        } else {
            if (config.step_weights.size() != model.num_controls()) {
                throw ValidationError("need one step weight per control");
            }
            if (!(config.step_weights.minCoeff() > 0.0) || !config.step_weights.allFinite()) {
                throw ValidationError("step weights must be positive and finite");
            }
            lambda_ = config.step_weights;
        }
        if (config.control_bounds) {
            const auto& b = *config.control_bounds;
            if (b.lower.size() != model.num_controls() || b.upper.size() != model.num_controls()) {
                throw ValidationError("control bounds need one entry per control");
            }
            if (((b.upper - b.lower).array() < 0.0).any()) {
                throw ValidationError("control bounds must satisfy lower <= upper");
            }
        }
        backend_ = config.backend == PropagatorBackend::automatic ? model.backend()
                                                                  : config.backend;
        const Index steps = grid.steps();
        shape_.resize(steps);
        for (Index j = 0; j < steps; ++j) {
            shape_[j] = shape_value(config.shape, grid.node_time(j), grid.total_time());
        }
        psi_nodes_.resize(steps + 1);
        chi_nodes_.resize(steps + 1);
        forward_pass();
    }

    double infidelity() const { return infidelity_; }
    const ControlPulse& pulse() const { return pulse_; }
    const RVector& step_weights() const { return lambda_; }

    // One iteration: backward costate pass, then the update sweep.  With
    // monotonicity enforcement, a sweep that raises I is retried against the
    // same backward pass with the effective step weights doubled.  The
    // multiplier is transient trust-region state: it decays by half on every
    // accepted sweep, so one hard sweep does not slow the rest of the run.
    double iterate(bool enforce_monotone) {
        backward_pass();
        double mult = std::max(1.0, 0.5 * accepted_mult_);
        Index doublings_left = config_.max_weight_doublings;
        for (;;) {
            double new_infidelity;
            bool candidate_ok = true;
            try {
                new_infidelity = update_sweep(mult);
            } catch (const ValidationError&) {
                // runaway candidate (propagator range overflow): reject the
                // sweep exactly like a non-monotone one
                if (!enforce_monotone) throw;
                candidate_ok = false;
                new_infidelity = std::numeric_limits<double>::infinity();
            }
            if (candidate_ok &&
                (!enforce_monotone || new_infidelity <= infidelity_ + kMonotoneSlack)) {
                pulse_.samples().swap(candidate_samples_);
                units_.swap(candidate_units_);
                psi_nodes_.swap(candidate_psi_);
                infidelity_ = new_infidelity;
                accepted_mult_ = mult;
                return new_infidelity;
            }
            if (doublings_left == 0) {
                throw UpdateError("sweep not monotone after " +
                                  std::to_string(config_.max_weight_doublings) +
                                  " step-weight doublings (I " + std::to_string(infidelity_) +
                                  " -> " + std::to_string(new_infidelity) + ")");
            }
            mult *= 2.0;
            --doublings_left;
        }
    }

private:
    const ControlledModel& model_;
    const TimeGrid& grid_;
    const KrotovConfig& config_;
    ControlPulse pulse_;
    CVector psi0_;
    CVector goal_;
    RVector lambda_;
    PropagatorBackend backend_ = PropagatorBackend::automatic;
    std::vector<double> shape_;
    std::vector<StepUnitary> units_;  // per node, for the current pulse
    std::vector<CVector> psi_nodes_;
    std::vector<CVector> chi_nodes_;
    double infidelity_ = 1.0;
    double accepted_mult_ = 1.0;

    RMatrix candidate_samples_;
    std::vector<StepUnitary> candidate_units_;
    std::vector<CVector> candidate_psi_;

    double goal_infidelity(const CVector& psi_final) const {
        const Complex o = goal_.dot(psi_final);
        return std::clamp(1.0 - std::norm(o), 0.0, 1.0);
    }

    void forward_pass() {
        const Index steps = grid_.steps();
        const double dt = grid_.dt();
        units_.clear();
        units_.reserve(steps);
        CVector psi = psi0_;
        psi_nodes_[0] = psi;
        for (Index j = 0; j < steps; ++j) {
            units_.emplace_back(model_.hamiltonian(pulse_.samples().col(j)), dt, backend_);
            units_.back().apply(psi);
            psi_nodes_[j + 1] = psi;
        }
        infidelity_ = goal_infidelity(psi);
    }

    void backward_pass() {
        const Index steps = grid_.steps();
        // Unit-magnitude costate seed: same descent direction as the raw
        // overlap-weighted seed, but the step size no longer collapses when
        // the guess barely overlaps the goal (long chains).  <chi(T)|psi(T)>
        // = |<goal|psi(T)>| stays real, keeping global-phase immunity.
        const Complex o = goal_.dot(psi_nodes_[steps]);
        const double mag = std::abs(o);
        CVector chi = (mag > 0.0 ? o / mag : Complex(0.0, 0.0)) * goal_;
        chi_nodes_[steps] = chi;
        for (Index j = steps - 1; j >= 0; --j) {
            units_[j].apply_adjoint(chi);
            chi_nodes_[j] = chi;
        }
    }

    // Sweeps nodes in time order, updating every control at a node and
    // immediately propagating the fresh state through the updated step.
    double update_sweep(double mult) {
        const Index steps = grid_.steps();
        const Index num_controls = model_.num_controls();
        const double dt = grid_.dt();
        candidate_samples_ = pulse_.samples();
        candidate_units_.clear();
        candidate_units_.reserve(steps);
        if (candidate_psi_.size() != static_cast<std::size_t>(steps + 1)) {
            candidate_psi_.resize(steps + 1);
        }
        CVector psi = psi0_;
        candidate_psi_[0] = psi;
        RVector controls(num_controls);
        for (Index j = 0; j < steps; ++j) {
            controls = candidate_samples_.col(j);
            if (shape_[j] != 0.0) {
                for (Index k = 0; k < num_controls; ++k) {
                    const double direction =
                        model_.update_direction(k, controls, chi_nodes_[j], psi);
                    double value = controls[k] + (shape_[j] / (lambda_[k] * mult)) * direction;
                    if (!std::isfinite(value)) {
                        throw UpdateError("non-finite control update at node " +
                                          std::to_string(j) + " (step weight too small)");
                    }
                    if (config_.control_bounds) {
                        value = std::clamp(value, config_.control_bounds->lower[k],
                                           config_.control_bounds->upper[k]);
                    }
                    controls[k] = value;
                }
                candidate_samples_.col(j) = controls;
            }
            candidate_units_.emplace_back(model_.hamiltonian(controls), dt, backend_);
            candidate_units_.back().apply(psi);
            candidate_psi_[j + 1] = psi;
        }
        return goal_infidelity(psi);
    }
};

} // namespace

double shape_value(ShapeFunction shape, double t, double total_time) {
    switch (shape) {
    case ShapeFunction::sin_squared: {
        const double s = std::sin(std::numbers::pi * t / total_time);
        return s * s;
    }
    case ShapeFunction::flat:
        return 1.0;
    }
    throw ValidationError("unknown shape function");
}

RVector default_step_weights(const ControlPulse& guess) {
    RVector weights(guess.num_controls());
    for (Index k = 0; k < guess.num_controls(); ++k) {
        const double scale = guess.samples().row(k).cwiseAbs().maxCoeff();
        weights[k] = scale > 0.0 ? 1.0 / (2.0 * scale) : 1.0;
    }
    return weights;
}

std::pair<ControlPulse, double> krotov_sweep(const ControlledModel& model,
                                             const ControlPulse& pulse, const TimeGrid& grid,
                                             const KrotovConfig& config) {
    Engine engine(model, pulse, grid, config);
    const double new_infidelity = engine.iterate(false);
    return {engine.pulse(), new_infidelity};
}

OptimizationRecord optimize(const ControlledModel& model, const ControlPulse& guess,
                            const TimeGrid& grid, const KrotovConfig& config) {
    Engine engine(model, guess, grid, config);
    OptimizationRecord record{
        {}, engine.pulse(), false, 0, "", engine.step_weights()};
    record.infidelity_trace.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
    record.infidelity_trace.push_back(engine.infidelity());

    std::string reason;
    while (record.iterations_used < config.max_iterations) {
        const double current = record.infidelity_trace.back();
        if (current <= config.target_infidelity) {
            reason = "target";
            break;
        }
        if (config.stall_window > 0 &&
            record.infidelity_trace.size() > static_cast<std::size_t>(config.stall_window)) {
            const double before =
                record.infidelity_trace[record.infidelity_trace.size() - 1 -
                                        static_cast<std::size_t>(config.stall_window)];
            if (before > 0.0 && before - current < config.stall_threshold * before) {
                reason = "stalled";
                break;
            }
        }
        record.infidelity_trace.push_back(engine.iterate(true));
        ++record.iterations_used;
    }
    if (reason.empty()) {
        reason = record.infidelity_trace.back() <= config.target_infidelity ? "target"
                                                                            : "iteration_limit";
    }
    record.stop_reason = reason;
    record.converged = record.infidelity_trace.back() <= config.target_infidelity;
    record.final_pulse = engine.pulse();
    record.final_step_weights = engine.step_weights();
    return record;
}

GradientProbe gradient_check(const ControlledModel& model, const ControlPulse& pulse,
                             const TimeGrid& grid, Index node, Index control, double eps,
                             PropagatorBackend backend) {
    if (!pulse.matches(grid) || pulse.num_controls() != model.num_controls()) {
        throw DimensionError("gradient_check: pulse/grid/model mismatch");
    }
    if (node < 0 || node >= grid.steps()) {
        throw ValidationError("gradient_check: node must drive a step (0..M-1)");
    }
    if (control < 0 || control >= model.num_controls()) {
        throw ValidationError("gradient_check: control index out of range");
    }
    if (!(eps > 0.0)) throw ValidationError("gradient_check: eps must be positive");
    if (backend == PropagatorBackend::automatic) backend = model.backend();

    const double dt = grid.dt();
    const Index steps = grid.steps();
    const CVector goal = model.goal_state().amplitudes();
    const auto supplier = pulse_node_supplier(model, pulse);

    CVector psi = model.initial_state().amplitudes();
    for (Index j = 0; j < node; ++j) StepUnitary(supplier(j), dt, backend).apply(psi);
    const CVector psi_node = psi;
    for (Index j = node; j < steps; ++j) StepUnitary(supplier(j), dt, backend).apply(psi);
    CVector chi = goal.dot(psi) * goal;
    for (Index j = steps - 1; j >= node; --j) {
        StepUnitary(supplier(j), dt, backend).apply_adjoint(chi);
    }
    const double analytic =
        model.update_direction(control, controls_at_node(pulse, node), chi, psi_node);

    const QuantumState initial = model.initial_state();
    const QuantumState goal_state = model.goal_state();
    const auto perturbed_infidelity = [&](double delta) {
        ControlPulse shifted = pulse;
        shifted.samples()(control, node) += delta;
        const QuantumState out =
            propagate(initial, pulse_node_supplier(model, shifted), grid, Direction::forward,
                      nullptr, backend);
        return infidelity(out, goal_state);
    };
    const double plus = perturbed_infidelity(eps);
    const double minus = perturbed_infidelity(-eps);
    // I depends on the sample through exp(-i H dt), so to first order in dt
    // dI/dx_k(t_j) = -2 dt Im<chi(t_j)|dH/dx_k|psi(t_j)>; the central
    // difference (plus-minus)/(2 eps) therefore gets divided by -2 dt.
    const double numeric = -(plus - minus) / (4.0 * eps * dt);
    return {analytic, numeric};
}

} // namespace qoct
