#include "qoct/spin_chain.hpp"

#include <cmath>

namespace qoct {

SpinChainModel::SpinChainModel(Index length, double coupling,
                               std::optional<double> guess_trap_strength)
    : length_(length),
      coupling_(coupling),
      guess_c0_(guess_trap_strength.value_or(2.0 * coupling)) {
    if (length < 3) throw ValidationError("SpinChainModel requires length >= 3");
    if (!(coupling > 0.0) || !std::isfinite(coupling)) {
        throw ValidationError("SpinChainModel requires coupling > 0");
    }
    if (!(guess_c0_ > 0.0) || !std::isfinite(guess_c0_)) {
        throw ValidationError("guess trap strength must be > 0");
    }
}

HermitianOperator SpinChainModel::hamiltonian_for(double trap_strength,
                                                  double trap_center) const {
    if (!std::isfinite(trap_strength) || !std::isfinite(trap_center)) {
        throw ValidationError("non-finite control value");
    }
    RVector diag(length_);
    for (Index m = 0; m < length_; ++m) {
        const double bonds = (m == 0 || m == length_ - 1) ? 1.0 : 2.0;
        const double off = m - trap_center;
        diag[m] = trap_strength * off * off + coupling_ * bonds;
    }
    RVector sub = RVector::Constant(length_ - 1, -coupling_);
    return HermitianOperator::real_tridiagonal(diag, sub);
}

const std::vector<std::string>& SpinChainModel::control_names() const {
    static const std::vector<std::string> names{"trap_strength", "trap_center"};
    return names;
}

HermitianOperator SpinChainModel::hamiltonian(const RVector& controls) const {
    if (controls.size() != 2) throw DimensionError("SpinChainModel takes two controls");
    return hamiltonian_for(controls[0], controls[1]);
}

HermitianOperator SpinChainModel::control_derivative(Index k, const RVector& controls) const {
    if (controls.size() != 2) throw DimensionError("SpinChainModel takes two controls");
    if (k != 0 && k != 1) throw ValidationError("control index out of range");
    const double c = controls[0];
    const double d = controls[1];
    if (!std::isfinite(c) || !std::isfinite(d)) {
        throw ValidationError("non-finite control value");
    }
    RVector diag(length_);
    for (Index m = 0; m < length_; ++m) {
        const double off = m - d;
        diag[m] = (k == 0) ? off * off : -2.0 * c * off;
    }
    return HermitianOperator::real_tridiagonal(diag, RVector::Zero(length_ - 1));
}

double SpinChainModel::update_direction(Index k, const RVector& controls, const CVector& chi,
                                        const CVector& psi) const {
    if (controls.size() != 2) throw DimensionError("SpinChainModel takes two controls");
    if (k != 0 && k != 1) throw ValidationError("control index out of range");
    if (chi.size() != length_ || psi.size() != length_) {
        throw DimensionError("update_direction: state dim mismatch");
    }
    const double c = controls[0];
    const double d = controls[1];
    double acc = 0.0;
    for (Index m = 0; m < length_; ++m) {
        const double off = m - d;
        const double weight = (k == 0) ? off * off : -2.0 * c * off;
        acc += weight * (std::conj(chi[m]) * psi[m]).imag();
    }
    return acc;
}

QuantumState SpinChainModel::initial_state() const {
    return QuantumState::basis_state(length_, 0);
}

QuantumState SpinChainModel::goal_state() const {
    return QuantumState::basis_state(length_, length_ - 1);
}

ControlPulse SpinChainModel::guess_pulse(const TimeGrid& grid) const {
    RMatrix samples(2, grid.num_nodes());
    const double slope = static_cast<double>(length_ - 1) / grid.total_time();
    for (Index j = 0; j < grid.num_nodes(); ++j) {
        samples(0, j) = guess_c0_;
        samples(1, j) = slope * grid.node_time(j);
    }
    samples(1, grid.num_nodes() - 1) = static_cast<double>(length_ - 1);
    return ControlPulse(control_names(), std::move(samples));
}

} // namespace qoct
