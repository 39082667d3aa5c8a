#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qoct/errors.hpp"

namespace qoct {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-12;

/// Complex amplitude vector in the working basis of a model.
///
/// A state constructed with `normalized = true` must have unit 2-norm within
/// 1e-10.  Costates produced by backward propagation carry norms below one
/// and are constructed with `normalized = false`.
class QuantumState {
public:
    explicit QuantumState(CVector amplitudes, bool normalized = true);

    /// The computational basis vector |index> of the given dimension.
    static QuantumState basis_state(Index dim, Index index);

    Index dim() const { return amplitudes_.size(); }
    const CVector& amplitudes() const { return amplitudes_; }
    bool is_normalized() const { return normalized_; }
    double norm() const { return amplitudes_.norm(); }

private:
    CVector amplitudes_;
    bool normalized_;
};

/// Square complex matrix equal to its conjugate transpose within 1e-12
/// elementwise.  Energy units, hbar = 1.
///
/// Real symmetric tridiagonal operators (the spin-chain Hamiltonians) keep
/// their compact band representation alongside the dense matrix so that
/// propagation can use a specialized solver.
class HermitianOperator {
public:
    explicit HermitianOperator(CMatrix matrix);

    static HermitianOperator real_tridiagonal(RVector diagonal, RVector subdiagonal);

    Index dim() const { return matrix_.rows(); }
    const CMatrix& matrix() const { return matrix_; }

    bool is_real_tridiagonal() const { return tridiagonal_; }
    const RVector& tridiagonal_diagonal() const { return diagonal_; }
    const RVector& tridiagonal_subdiagonal() const { return subdiagonal_; }

private:
    HermitianOperator() = default;

    CMatrix matrix_;
    bool tridiagonal_ = false;
    RVector diagonal_;
    RVector subdiagonal_;

    void detect_tridiagonal();
};

/// Uniform discretization of [0, T] into `steps` intervals.
///
/// Pulses are sampled at the M+1 nodes t_j = j*dt; the value at node j is
/// held piecewise-constant on [t_j, t_{j+1}).  The last node only pins the
/// boundary value and never drives a step.
class TimeGrid {
public:
    TimeGrid(double total_time, Index steps);

    double total_time() const { return total_time_; }
    Index steps() const { return steps_; }
    double dt() const { return total_time_ / static_cast<double>(steps_); }
    Index num_nodes() const { return steps_ + 1; }
    double node_time(Index j) const { return static_cast<double>(j) * dt(); }

private:
    double total_time_;
    Index steps_;
};

/// Named set of real control functions sampled on the nodes of a TimeGrid;
/// one row per control, one column per node.
class ControlPulse {
public:
    ControlPulse(std::vector<std::string> names, RMatrix samples);

    static ControlPulse constant(std::vector<std::string> names, const RVector& values,
                                 const TimeGrid& grid);

    Index num_controls() const { return samples_.rows(); }
    Index num_nodes() const { return samples_.cols(); }
    const std::vector<std::string>& names() const { return names_; }

    double value(Index control, Index node) const { return samples_(control, node); }
    const RMatrix& samples() const { return samples_; }
    RMatrix& samples() { return samples_; }

    bool matches(const TimeGrid& grid) const { return num_nodes() == grid.num_nodes(); }

private:
    std::vector<std::string> names_;
    RMatrix samples_;
};

} // namespace qoct
