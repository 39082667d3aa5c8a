#include "qoct/types.hpp"

#include <cmath>
#include <utility>

namespace qoct {

namespace {

bool all_finite(const CMatrix& m) {
    return m.allFinite();
}

} // namespace

QuantumState::QuantumState(CVector amplitudes, bool normalized)
    : amplitudes_(std::move(amplitudes)), normalized_(normalized) {
    if (amplitudes_.size() < 2) {
        throw ValidationError("QuantumState requires dim >= 2, got " +
                              std::to_string(amplitudes_.size()));
    }
    if (!amplitudes_.allFinite()) {
        throw ValidationError("QuantumState amplitudes contain non-finite entries");
    }
    if (normalized_) {
        const double n = amplitudes_.norm();
        if (std::abs(n - 1.0) > kNormTolerance) {
            throw ValidationError("QuantumState marked normalized but ||psi|| = " +
                                  std::to_string(n));
        }
    }
}

QuantumState QuantumState::basis_state(Index dim, Index index) {
    if (index < 0 || index >= dim) {
        throw ValidationError("basis_state index out of range");
    }
    CVector v = CVector::Zero(dim);
    v[index] = Complex(1.0, 0.0);
    return QuantumState(std::move(v));
}

HermitianOperator::HermitianOperator(CMatrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
        throw ValidationError("HermitianOperator requires a square matrix");
    }
    if (!all_finite(matrix_)) {
        throw ValidationError("HermitianOperator entries must be finite");
    }
    const double dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTolerance) {
        throw ValidationError("matrix deviates from Hermitian by " + std::to_string(dev));
    }
    detect_tridiagonal();
}

HermitianOperator HermitianOperator::real_tridiagonal(RVector diagonal, RVector subdiagonal) {
    const Index n = diagonal.size();
    if (n < 1 || subdiagonal.size() != n - 1) {
        throw ValidationError("tridiagonal operator needs |sub| = |diag| - 1");
    }
    if (!diagonal.allFinite() || !subdiagonal.allFinite()) {
        throw ValidationError("tridiagonal bands must be finite");
    }
    // Hermitian by construction; skip the elementwise scan of the dense ctor.
    HermitianOperator op;
    op.matrix_ = CMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        op.matrix_(i, i) = diagonal[i];
        if (i + 1 < n) {
            op.matrix_(i, i + 1) = subdiagonal[i];
            op.matrix_(i + 1, i) = subdiagonal[i];
        }
    }
    op.tridiagonal_ = true;
    op.diagonal_ = std::move(diagonal);
    op.subdiagonal_ = std::move(subdiagonal);
    return op;
}

void HermitianOperator::detect_tridiagonal() {
    const Index n = matrix_.rows();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            const Complex v = matrix_(i, j);
            if (std::abs(i - j) <= 1) {
                if (v.imag() != 0.0) return;
            } else if (v != Complex(0.0, 0.0)) {
                return;
            }
        }
    }
    tridiagonal_ = true;
    diagonal_.resize(n);
    subdiagonal_.resize(n - 1);
    for (Index i = 0; i < n; ++i) {
        diagonal_[i] = matrix_(i, i).real();
        if (i + 1 < n) subdiagonal_[i] = matrix_(i + 1, i).real();
    }
}

TimeGrid::TimeGrid(double total_time, Index steps) : total_time_(total_time), steps_(steps) {
    if (!(total_time > 0.0) || !std::isfinite(total_time)) {
        throw ValidationError("TimeGrid total_time must be positive and finite");
    }
    if (steps < 1) {
        throw ValidationError("TimeGrid needs at least one step");
    }
}

ControlPulse::ControlPulse(std::vector<std::string> names, RMatrix samples)
    : names_(std::move(names)), samples_(std::move(samples)) {
    if (static_cast<Index>(names_.size()) != samples_.rows()) {
        throw ValidationError("ControlPulse needs one name per sample row");
    }
    if (samples_.rows() < 1 || samples_.cols() < 2) {
        throw ValidationError("ControlPulse needs at least one control and two nodes");
    }
    if (!samples_.allFinite()) {
        throw ValidationError("ControlPulse samples must be finite");
    }
}

ControlPulse ControlPulse::constant(std::vector<std::string> names, const RVector& values,
                                    const TimeGrid& grid) {
    if (static_cast<Index>(names.size()) != values.size()) {
        throw ValidationError("ControlPulse::constant needs one value per name");
    }
    RMatrix samples(values.size(), grid.num_nodes());
    for (Index k = 0; k < values.size(); ++k) samples.row(k).setConstant(values[k]);
    return ControlPulse(std::move(names), std::move(samples));
}

} // namespace qoct
