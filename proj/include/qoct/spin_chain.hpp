#pragma once

#include <optional>

#include "qoct/model.hpp"

namespace qoct {

// Heisenberg chain with a movable parabolic trap, restricted to the
// single-excitation sector. In the site basis |m>, m = 0..length-1, the
// Hamiltonian is real symmetric tridiagonal:
//   <m|H|m>     = C (m - d)^2 + J z_m   (z_m = 1 at the ends, 2 in the bulk)
//   <m+1|H|m>   = -J
// All m-independent diagonal terms are dropped; they only contribute a global
// phase. Controls are the trap strength C and the trap center d; the task is
// to carry the excitation from site 0 to site length-1.
class SpinChainModel final : public ControlledModel {
public:
    SpinChainModel(Index length, double coupling,
                   std::optional<double> guess_trap_strength = std::nullopt);

    Index length() const { return length_; }
    double coupling() const { return coupling_; }
    double guess_trap_strength() const { return guess_c0_; }

    HermitianOperator hamiltonian_for(double trap_strength, double trap_center) const;

    Index dim() const override { return length_; }
    Index num_controls() const override { return 2; }
    const std::vector<std::string>& control_names() const override;
    HermitianOperator hamiltonian(const RVector& controls) const override;
    HermitianOperator control_derivative(Index k, const RVector& controls) const override;
    double update_direction(Index k, const RVector& controls, const CVector& chi,
                            const CVector& psi) const override;
    QuantumState initial_state() const override;
    QuantumState goal_state() const override;
    // Constant trap strength C0, trap center swept linearly from 0 to length-1.
    ControlPulse guess_pulse(const TimeGrid& grid) const override;
    PropagatorBackend backend() const override { return PropagatorBackend::chebyshev; }

private:
    Index length_;
    double coupling_;
    double guess_c0_;
};

} // namespace qoct
