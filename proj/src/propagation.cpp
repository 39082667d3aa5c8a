#include "qoct/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace qoct {

namespace {

constexpr double kCoefficientCutoff = 1e-17;

// J_0..J_max of the first kind at z >= 0 via Miller's backward recurrence,
// normalized with J_0 + 2*sum_{k even} J_k = 1.
std::vector<double> bessel_j_sequence(double z, int max_order) {
    std::vector<double> out(max_order + 1, 0.0);
    if (z < 1e-4) {
        // Short Taylor series; terms beyond k=4 are below 1e-17 here.
        const double h = 0.5 * z;
        double pow_h = 1.0;
        for (int k = 0; k <= std::min(max_order, 4); ++k) {
            double term = pow_h;  // (z/2)^k / k!
            out[k] = term * (1.0 - h * h / (k + 1.0) +
                             0.25 * h * h * h * h / ((k + 1.0) * (k + 2.0)));
            pow_h *= h / (k + 1.0);
        }
        return out;
    }
    const int start = max_order + 20 + static_cast<int>(std::ceil(std::sqrt(40.0 * max_order)));
    double jp = 0.0;          // J_{k+1}
    double jc = 1e-30;        // J_k, arbitrary seed
    double norm_acc = 0.0;    // J_0 + 2 sum_{k even >= 2} J_k, built on the fly
    for (int k = start; k >= 1; --k) {
        double jm = (2.0 * k / z) * jc - jp;
        jp = jc;
        jc = jm;
        if (std::abs(jc) > 1e250) {
            jc *= 1e-250;
            jp *= 1e-250;
            norm_acc *= 1e-250;
            for (auto& v : out) v *= 1e-250;
        }
        const int order = k - 1;
        if (order <= max_order) out[order] = jc;
        if (order >= 2 && order % 2 == 0) norm_acc += 2.0 * jc;
    }
    norm_acc += jc;
    for (auto& v : out) v /= norm_acc;
    return out;
}

void tridiag_apply(const RVector& d, const RVector& s, const CVector& in, CVector& out) {
    const Index n = d.size();
    if (n == 1) {
        out[0] = d[0] * in[0];
        return;
    }
    out[0] = d[0] * in[0] + s[0] * in[1];
    for (Index i = 1; i + 1 < n; ++i) {
        out[i] = s[i - 1] * in[i - 1] + d[i] * in[i] + s[i] * in[i + 1];
    }
    out[n - 1] = s[n - 2] * in[n - 2] + d[n - 1] * in[n - 1];
}

} // namespace

StepUnitary::StepUnitary(const HermitianOperator& hamiltonian, double dt,
                         PropagatorBackend backend) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("StepUnitary requires dt > 0");
    }
    const Index n = hamiltonian.dim();
    if (backend == PropagatorBackend::automatic) {
        if (n == 2) {
            backend = PropagatorBackend::analytic_2x2;
        } else if (hamiltonian.is_real_tridiagonal()) {
            backend = PropagatorBackend::chebyshev;
        } else {
            backend = PropagatorBackend::dense_eig;
        }
    }

    switch (backend) {
    case PropagatorBackend::analytic_2x2: {
        if (n != 2) throw ValidationError("analytic_2x2 backend needs dim 2");
        const CMatrix& h = hamiltonian.matrix();
        const double a = 0.5 * (h(0, 0).real() + h(1, 1).real());
        const double bx = h(0, 1).real();
        const double by = -h(0, 1).imag();
        const double bz = 0.5 * (h(0, 0).real() - h(1, 1).real());
        const double e = std::sqrt(bx * bx + by * by + bz * bz);
        const double c = std::cos(e * dt);
        const double s = (e > 0.0) ? std::sin(e * dt) / e : dt;
        const Complex phase = std::polar(1.0, -a * dt);
        TwoLevel u;
        u.u00 = phase * Complex(c, -s * bz);
        u.u01 = phase * (Complex(0.0, -s) * Complex(bx, -by));
        u.u10 = phase * (Complex(0.0, -s) * Complex(bx, by));
        u.u11 = phase * Complex(c, s * bz);
        impl_ = u;
        break;
    }
    case PropagatorBackend::chebyshev: {
        if (!hamiltonian.is_real_tridiagonal()) {
            throw ValidationError("chebyshev backend needs a real tridiagonal operator");
        }
        ChebyshevTridiagonal cheb;
        cheb.diagonal = hamiltonian.tridiagonal_diagonal();
        cheb.subdiagonal = hamiltonian.tridiagonal_subdiagonal();
        // Gershgorin enclosure of the spectrum.
        double lo = cheb.diagonal[0], hi = cheb.diagonal[0];
        for (Index i = 0; i < n; ++i) {
            double r = 0.0;
            if (i > 0) r += std::abs(cheb.subdiagonal[i - 1]);
            if (i + 1 < n) r += std::abs(cheb.subdiagonal[i]);
            lo = std::min(lo, cheb.diagonal[i] - r);
            hi = std::max(hi, cheb.diagonal[i] + r);
        }
        cheb.center = 0.5 * (hi + lo);
        cheb.halfwidth = 0.5 * (hi - lo);
        const Complex phase = std::polar(1.0, -cheb.center * dt);
        if (cheb.halfwidth <= 0.0) {
            // H is exactly center * I.
            cheb.halfwidth = 0.0;
            cheb.coefficients = {phase};
            impl_ = std::move(cheb);
            break;
        }
        const double z = cheb.halfwidth * dt;
        // The expansion order grows like z; far past any sane ||H|| dt the
        // operator is a runaway, not a propagation request.
        if (!std::isfinite(z) || z > 2e5) {
            throw ValidationError("step norm ||H|| dt too large for the polynomial propagator");
        }
        const int max_order =
            static_cast<int>(std::ceil(z + 12.0 * std::cbrt(z + 1.0) + 40.0));
        const std::vector<double> bessel = bessel_j_sequence(z, max_order);
        int last = 0;
        for (int k = 0; k <= max_order; ++k) {
            if (std::abs(bessel[k]) >= kCoefficientCutoff) last = k;
        }
        cheb.coefficients.resize(last + 1);
        const Complex minus_i(0.0, -1.0);
        Complex ik(1.0, 0.0);  // (-i)^k
        for (int k = 0; k <= last; ++k) {
            cheb.coefficients[k] = phase * (k == 0 ? 1.0 : 2.0) * ik * bessel[k];
            ik *= minus_i;
        }
        impl_ = std::move(cheb);
        break;
    }
    case PropagatorBackend::dense_eig: {
        EigenBasis basis;
        if (hamiltonian.is_real_tridiagonal()) {
            Eigen::SelfAdjointEigenSolver<RMatrix> es;
            es.computeFromTridiagonal(hamiltonian.tridiagonal_diagonal(),
                                      hamiltonian.tridiagonal_subdiagonal());
            basis.vectors = es.eigenvectors().cast<Complex>();
            basis.angles = es.eigenvalues() * dt;
        } else {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian.matrix());
            basis.vectors = es.eigenvectors();
            basis.angles = es.eigenvalues() * dt;
        }
        impl_ = std::move(basis);
        break;
    }
    default:
        throw ValidationError("unknown propagator backend");
    }
}

Index StepUnitary::dim() const {
    if (const auto* t = std::get_if<TwoLevel>(&impl_)) {
        (void)t;
        return 2;
    }
    if (const auto* e = std::get_if<EigenBasis>(&impl_)) return e->vectors.rows();
    return std::get<ChebyshevTridiagonal>(impl_).diagonal.size();
}

template <bool Adjoint>
void StepUnitary::apply_impl(CVector& psi) const {
    if (const auto* t = std::get_if<TwoLevel>(&impl_)) {
        const Complex a = psi[0], b = psi[1];
        if constexpr (Adjoint) {
            psi[0] = std::conj(t->u00) * a + std::conj(t->u10) * b;
            psi[1] = std::conj(t->u01) * a + std::conj(t->u11) * b;
        } else {
            psi[0] = t->u00 * a + t->u01 * b;
            psi[1] = t->u10 * a + t->u11 * b;
        }
        return;
    }
    if (const auto* e = std::get_if<EigenBasis>(&impl_)) {
        CVector coords = e->vectors.adjoint() * psi;
        for (Index i = 0; i < coords.size(); ++i) {
            const double angle = Adjoint ? e->angles[i] : -e->angles[i];
            coords[i] *= std::polar(1.0, angle);
        }
        psi.noalias() = e->vectors * coords;
        return;
    }
    const auto& cheb = std::get<ChebyshevTridiagonal>(impl_);
    const auto coeff = [&](std::size_t k) {
        return Adjoint ? std::conj(cheb.coefficients[k]) : cheb.coefficients[k];
    };
    if (cheb.halfwidth == 0.0) {
        psi *= coeff(0);
        return;
    }
    const Index n = cheb.diagonal.size();
    const double inv_h = 1.0 / cheb.halfwidth;
    CVector t_prev = psi;
    CVector t_curr(n), t_next(n), acc(n);
    // t_curr = X psi with X = (H - center I)/halfwidth
    tridiag_apply(cheb.diagonal, cheb.subdiagonal, t_prev, t_curr);
    t_curr = (t_curr - cheb.center * t_prev) * inv_h;
    acc = coeff(0) * t_prev;
    if (cheb.coefficients.size() > 1) acc += coeff(1) * t_curr;
    for (std::size_t k = 2; k < cheb.coefficients.size(); ++k) {
        tridiag_apply(cheb.diagonal, cheb.subdiagonal, t_curr, t_next);
        t_next = 2.0 * inv_h * (t_next - cheb.center * t_curr) - t_prev;
        acc += coeff(k) * t_next;
        t_prev.swap(t_curr);
        t_curr.swap(t_next);
    }
    psi = std::move(acc);
}

void StepUnitary::apply(CVector& psi) const { apply_impl<false>(psi); }
void StepUnitary::apply_adjoint(CVector& psi) const { apply_impl<true>(psi); }

QuantumState evolve_step(const QuantumState& state, const HermitianOperator& hamiltonian,
                         double dt, PropagatorBackend backend) {
    if (hamiltonian.dim() != state.dim()) {
        throw DimensionError("evolve_step: operator dim " + std::to_string(hamiltonian.dim()) +
                             " vs state dim " + std::to_string(state.dim()));
    }
    StepUnitary u(hamiltonian, dt, backend);
    CVector psi = state.amplitudes();
    u.apply(psi);
    return QuantumState(std::move(psi), state.is_normalized());
}

QuantumState propagate(const QuantumState& initial, const HamiltonianSupplier& hamiltonian_at,
                       const TimeGrid& grid, Direction direction, Trajectory* trajectory,
                       PropagatorBackend backend) {
    const Index steps = grid.steps();
    const double dt = grid.dt();
    CVector psi = initial.amplitudes();
    if (trajectory) {
        trajectory->states.assign(grid.num_nodes(), CVector());
    }
    if (direction == Direction::forward) {
        if (trajectory) trajectory->states[0] = psi;
        for (Index j = 0; j < steps; ++j) {
            const HermitianOperator h = hamiltonian_at(j);
            if (h.dim() != psi.size()) {
                throw DimensionError("propagate: Hamiltonian dim mismatch at node " +
                                     std::to_string(j));
            }
            StepUnitary(h, dt, backend).apply(psi);
            if (trajectory) trajectory->states[j + 1] = psi;
        }
    } else {
        if (trajectory) trajectory->states[steps] = psi;
        for (Index j = steps - 1; j >= 0; --j) {
            const HermitianOperator h = hamiltonian_at(j);
            if (h.dim() != psi.size()) {
                throw DimensionError("propagate: Hamiltonian dim mismatch at node " +
                                     std::to_string(j));
            }
            StepUnitary(h, dt, backend).apply_adjoint(psi);
            if (trajectory) trajectory->states[j] = psi;
        }
    }
    return QuantumState(std::move(psi), initial.is_normalized());
}

Complex overlap(const QuantumState& a, const QuantumState& b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("overlap: dim mismatch");
    }
    return a.amplitudes().dot(b.amplitudes());
}

double infidelity(const QuantumState& final_state, const QuantumState& goal) {
    if (!final_state.is_normalized() || !goal.is_normalized()) {
        throw ValidationError("infidelity requires normalized states");
    }
    const Complex o = overlap(final_state, goal);
    const double value = 1.0 - std::norm(o);
    return std::clamp(value, 0.0, 1.0);
}

EnergyStats energy_stats(const HermitianOperator& hamiltonian, const QuantumState& phi) {
    if (hamiltonian.dim() != phi.dim()) {
        throw DimensionError("energy_stats: dim mismatch");
    }
    if (!phi.is_normalized()) {
        throw ValidationError("energy_stats requires a normalized state");
    }
    const CVector h_phi = hamiltonian.matrix() * phi.amplitudes();
    const double mean = phi.amplitudes().dot(h_phi).real();
    const double second_moment = h_phi.squaredNorm();
    const double var = second_moment - mean * mean;
    return EnergyStats{mean, std::sqrt(std::max(var, 0.0))};
}

QuantumState ground_state(const HermitianOperator& hamiltonian) {
    if (hamiltonian.dim() < 2) {
        throw ValidationError("ground_state requires dim >= 2");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hamiltonian.matrix());
    const RVector& ev = es.eigenvalues();
    if (ev[1] - ev[0] < 1e-10) {
        throw DegenerateGroundStateError("lowest eigenvalue degenerate within 1e-10 (gap " +
                                         std::to_string(ev[1] - ev[0]) + ")");
    }
    CVector v = es.eigenvectors().col(0);
    for (Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]);
        if (mag > 1e-12) {
            v *= std::conj(v[i]) / mag;
            break;
        }
    }
    return QuantumState(std::move(v));
}

} // namespace qoct
