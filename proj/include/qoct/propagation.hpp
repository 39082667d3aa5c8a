#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "qoct/types.hpp"

namespace qoct {

/// Backend used to form the one-step propagator exp(-i H dt).
///
/// `automatic` picks the analytic closed form for dim 2, a Chebyshev
/// expansion for real symmetric tridiagonal operators and a Hermitian
/// eigendecomposition otherwise.  All backends realize the same exact-step
/// contract to machine precision and every backend is valid for every
/// operator shape it supports.
enum class PropagatorBackend {
    automatic,
    analytic_2x2,
    dense_eig,
    chebyshev,
};

/// Exact one-step unitary exp(-i H dt) for a constant Hamiltonian, applied
/// in place.  The adjoint application realizes exp(+i H dt) as the exact
/// conjugate transpose of the forward step.
class StepUnitary {
public:
    StepUnitary(const HermitianOperator& hamiltonian, double dt,
                PropagatorBackend backend = PropagatorBackend::automatic);

    Index dim() const;
    void apply(CVector& psi) const;
    void apply_adjoint(CVector& psi) const;

private:
    struct TwoLevel {
        // U = phase * (cos(E dt) I - i sin(E dt) n.sigma)
        Complex u00, u01, u10, u11;
    };
    struct EigenBasis {
        CMatrix vectors;   // unitary V with H = V diag(ev) V^dagger
        RVector angles;    // ev * dt
    };
    struct ChebyshevTridiagonal {
        RVector diagonal;
        RVector subdiagonal;
        double center = 0.0;     // spectral midpoint
        double halfwidth = 0.0;  // spectral half range; 0 means H = center*I
        std::vector<Complex> coefficients;  // includes the e^{-i center dt} phase
    };

    std::variant<TwoLevel, EigenBasis, ChebyshevTridiagonal> impl_;

    template <bool Adjoint>
    void apply_impl(CVector& psi) const;
};

/// Returns exp(-i H dt) |state>; preserves the norm of normalized inputs.
QuantumState evolve_step(const QuantumState& state, const HermitianOperator& hamiltonian,
                         double dt, PropagatorBackend backend = PropagatorBackend::automatic);

enum class Direction { forward, backward };

/// Node-indexed states captured along a propagation, size M+1.
/// states[j] is the state at node j for either direction.
struct Trajectory {
    std::vector<CVector> states;
};

using HamiltonianSupplier = std::function<HermitianOperator(Index node)>;

/// Piecewise-constant propagation over the grid.
///
/// Forward applies exp(-i H(t_j) dt) for j = 0..M-1 in order to the state at
/// node 0; backward applies the exact adjoint sequence in reverse order to
/// the state at node M, so backward(forward(psi)) = psi up to round-off.
QuantumState propagate(const QuantumState& initial, const HamiltonianSupplier& hamiltonian_at,
                       const TimeGrid& grid, Direction direction = Direction::forward,
                       Trajectory* trajectory = nullptr,
                       PropagatorBackend backend = PropagatorBackend::automatic);

/// <a|b>.
Complex overlap(const QuantumState& a, const QuantumState& b);

/// 1 - |<final|goal>|^2, clamped into [0, 1].  Both states must be normalized.
double infidelity(const QuantumState& final_state, const QuantumState& goal);

struct EnergyStats {
    double mean;    // <phi|H|phi>
    double spread;  // sqrt(<phi|H^2|phi> - mean^2), clamped at 0
};

EnergyStats energy_stats(const HermitianOperator& hamiltonian, const QuantumState& phi);

/// Normalized eigenvector of the lowest eigenvalue.  Phase convention: the
/// first component larger than 1e-12 in magnitude is made real positive.
/// Throws DegenerateGroundStateError when the two lowest eigenvalues are
/// closer than 1e-10.
QuantumState ground_state(const HermitianOperator& hamiltonian);

} // namespace qoct
