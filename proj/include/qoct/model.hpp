#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qoct/propagation.hpp"
#include "qoct/types.hpp"

namespace qoct {

// A controlled quantum system: Hamiltonian builder, control derivatives,
// boundary states, and a guess pulse to seed the optimizer.
class ControlledModel {
public:
    virtual ~ControlledModel() = default;

    virtual Index dim() const = 0;
    virtual Index num_controls() const = 0;
    virtual const std::vector<std::string>& control_names() const = 0;

    // H(x) for one set of control values (one per control, model units).
    virtual HermitianOperator hamiltonian(const RVector& controls) const = 0;
    // dH/dx_k at the given control values.
    virtual HermitianOperator control_derivative(Index k, const RVector& controls) const = 0;

    // Im <chi| dH/dx_k |psi>, the pulse-update direction.  The default goes
    // through control_derivative; models may shortcut it (the derivative
    // operators here are diagonal or +-1 diagonal, so the dense product is
    // avoidable on the optimizer's inner loop).
    virtual double update_direction(Index k, const RVector& controls, const CVector& chi,
                                    const CVector& psi) const;

    virtual QuantumState initial_state() const = 0;
    virtual QuantumState goal_state() const = 0;

    virtual ControlPulse guess_pulse(const TimeGrid& grid) const = 0;

    // Propagator choice suited to this model's Hamiltonian structure.
    virtual PropagatorBackend backend() const { return PropagatorBackend::automatic; }
};

RVector controls_at_node(const ControlPulse& pulse, Index node);

HermitianOperator hamiltonian_at_node(const ControlledModel& model, const ControlPulse& pulse,
                                      Index node);

// Supplier view over (model, pulse); both must outlive the returned callable.
HamiltonianSupplier pulse_node_supplier(const ControlledModel& model, const ControlPulse& pulse);

std::pair<QuantumState, QuantumState> model_boundary_states(const ControlledModel& model);

} // namespace qoct
