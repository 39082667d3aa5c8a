#include "qoct/model.hpp"

namespace qoct {

double ControlledModel::update_direction(Index k, const RVector& controls, const CVector& chi,
                                         const CVector& psi) const {
    const HermitianOperator d = control_derivative(k, controls);
    if (chi.size() != d.dim() || psi.size() != d.dim()) {
        throw DimensionError("update_direction: state dim mismatch");
    }
    return chi.dot(d.matrix() * psi).imag();
}

RVector controls_at_node(const ControlPulse& pulse, Index node) {
    if (node < 0 || node >= pulse.num_nodes()) {
        throw ValidationError("control node index out of range");
    }
    return pulse.samples().col(node);
}

HermitianOperator hamiltonian_at_node(const ControlledModel& model, const ControlPulse& pulse,
                                      Index node) {
    if (pulse.num_controls() != model.num_controls()) {
        throw DimensionError("pulse has " + std::to_string(pulse.num_controls()) +
                             " controls, model expects " + std::to_string(model.num_controls()));
    }
    return model.hamiltonian(controls_at_node(pulse, node));
}

HamiltonianSupplier pulse_node_supplier(const ControlledModel& model, const ControlPulse& pulse) {
    return [&model, &pulse](Index node) { return hamiltonian_at_node(model, pulse, node); };
}

std::pair<QuantumState, QuantumState> model_boundary_states(const ControlledModel& model) {
    return {model.initial_state(), model.goal_state()};
}

} // namespace qoct
