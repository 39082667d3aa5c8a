#pragma once

#include "qoct/model.hpp"

namespace qoct {

// Two-level avoided crossing H(gamma) = [[gamma, omega], [omega, -gamma]].
// The single control gamma sweeps from gamma0 < 0 to -gamma0, and the task is
// to steer the initial ground state to the ground state at the far side.
class LZModel final : public ControlledModel {
public:
    LZModel(double omega, double gamma0);

    double omega() const { return omega_; }
    double gamma0() const { return gamma0_; }
    double gamma_final() const { return -gamma0_; }

    // Gap G(gamma) = 2 sqrt(omega^2 + gamma^2).
    double gap(double gamma) const;
    // Sweep rate of the adiabatic guess: solves d(gamma)/dt = rate * G(gamma)^2
    // with the boundary values gamma0 and -gamma0 over duration total_time.
    double guess_rate(double total_time) const;

    HermitianOperator hamiltonian_for(double gamma) const;

    Index dim() const override { return 2; }
    Index num_controls() const override { return 1; }
    const std::vector<std::string>& control_names() const override;
    HermitianOperator hamiltonian(const RVector& controls) const override;
    HermitianOperator control_derivative(Index k, const RVector& controls) const override;
    double update_direction(Index k, const RVector& controls, const CVector& chi,
                            const CVector& psi) const override;
    QuantumState initial_state() const override;
    QuantumState goal_state() const override;
    ControlPulse guess_pulse(const TimeGrid& grid) const override;
    PropagatorBackend backend() const override { return PropagatorBackend::analytic_2x2; }

private:
    double omega_;
    double gamma0_;
};

} // namespace qoct
