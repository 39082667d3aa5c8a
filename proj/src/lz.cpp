#include "qoct/lz.hpp"

#include <cmath>

namespace qoct {

LZModel::LZModel(double omega, double gamma0) : omega_(omega), gamma0_(gamma0) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw ValidationError("LZModel requires omega > 0");
    }
    if (!(gamma0 < 0.0) || !std::isfinite(gamma0)) {
        throw ValidationError("LZModel requires gamma0 < 0");
    }
}

double LZModel::gap(double gamma) const {
    return 2.0 * std::hypot(omega_, gamma);
}

double LZModel::guess_rate(double total_time) const {
    if (!(total_time > 0.0)) throw ValidationError("guess_rate requires total_time > 0");
    return (std::atan(gamma_final() / omega_) - std::atan(gamma0_ / omega_)) /
           (4.0 * total_time * omega_);
}

HermitianOperator LZModel::hamiltonian_for(double gamma) const {
    if (!std::isfinite(gamma)) throw ValidationError("non-finite control value");
    CMatrix h(2, 2);
    h << Complex(gamma, 0.0), Complex(omega_, 0.0), Complex(omega_, 0.0), Complex(-gamma, 0.0);
    return HermitianOperator(std::move(h));
}

const std::vector<std::string>& LZModel::control_names() const {
    static const std::vector<std::string> names{"gamma"};
    return names;
}

HermitianOperator LZModel::hamiltonian(const RVector& controls) const {
    if (controls.size() != 1) throw DimensionError("LZModel takes exactly one control");
    return hamiltonian_for(controls[0]);
}

HermitianOperator LZModel::control_derivative(Index k, const RVector& controls) const {
    if (k != 0) throw ValidationError("LZModel has a single control");
    if (controls.size() != 1) throw DimensionError("LZModel takes exactly one control");
    CMatrix dz(2, 2);
    dz << Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(-1.0, 0.0);
    return HermitianOperator(std::move(dz));
}

double LZModel::update_direction(Index k, const RVector& controls, const CVector& chi,
                                 const CVector& psi) const {
    if (k != 0) throw ValidationError("LZModel has a single control");
    (void)controls;
    if (chi.size() != 2 || psi.size() != 2) throw DimensionError("update_direction: dim 2 expected");
    // dH/dgamma is diag(1, -1).
    return (std::conj(chi[0]) * psi[0] - std::conj(chi[1]) * psi[1]).imag();
}

QuantumState LZModel::initial_state() const {
    return ground_state(hamiltonian_for(gamma0_));
}

QuantumState LZModel::goal_state() const {
    return ground_state(hamiltonian_for(gamma_final()));
}

ControlPulse LZModel::guess_pulse(const TimeGrid& grid) const {
    const double rate = guess_rate(grid.total_time());
    const double base = std::atan(gamma0_ / omega_);
    RMatrix samples(1, grid.num_nodes());
    for (Index j = 0; j < grid.num_nodes(); ++j) {
        samples(0, j) = omega_ * std::tan(base + 4.0 * rate * omega_ * grid.node_time(j));
    }
    // Pin the endpoints exactly regardless of round-off in tan/atan.
    samples(0, 0) = gamma0_;
    samples(0, grid.num_nodes() - 1) = gamma_final();
    return ControlPulse(control_names(), std::move(samples));
}

} // namespace qoct
