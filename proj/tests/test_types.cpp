#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qoct/types.hpp"

using namespace qoct;

TEST_CASE("time grid arithmetic") {
    const TimeGrid grid(2.0, 8);
    CHECK(grid.total_time() == 2.0);
    CHECK(grid.steps() == 8);
    CHECK(grid.dt() == doctest::Approx(0.25));
    CHECK(grid.num_nodes() == 9);
    CHECK(grid.node_time(0) == 0.0);
    CHECK(grid.node_time(3) == doctest::Approx(0.75));
    CHECK(grid.node_time(8) == doctest::Approx(2.0));
}

TEST_CASE("time grid rejects degenerate parameters") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), ValidationError);
    CHECK_THROWS_AS(TimeGrid(-1.0, 10), ValidationError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), ValidationError);
}

TEST_CASE("quantum state construction and norms") {
    const QuantumState basis = QuantumState::basis_state(4, 2);
    CHECK(basis.dim() == 4);
    CHECK(basis.norm() == doctest::Approx(1.0));
    CHECK(basis.amplitudes()[2] == Complex(1.0, 0.0));
    CHECK(basis.is_normalized());

    CVector v(2);
    v << Complex(1.0, 0.0), Complex(0.0, 1.0);
    CHECK_THROWS_AS(QuantumState(v, true), ValidationError); // norm sqrt(2)
    const QuantumState costate(v, false);
    CHECK_FALSE(costate.is_normalized());
    CHECK(costate.norm() == doctest::Approx(std::sqrt(2.0)));

    CVector tiny(1);
    tiny << Complex(1.0, 0.0);
    CHECK_THROWS_AS(QuantumState(tiny), ValidationError); // dim >= 2

    CHECK_THROWS_AS(QuantumState::basis_state(3, 3), ValidationError);
}

TEST_CASE("hermitian operator validation") {
    CMatrix good(2, 2);
    good << Complex(1.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0), Complex(-1.0, 0.0);
    const HermitianOperator h(good);
    CHECK(h.dim() == 2);

    CMatrix bad(2, 2);
    bad << Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(3.0, 0.0), Complex(1.0, 0.0);
    CHECK_THROWS_AS(HermitianOperator{bad}, ValidationError);

    CMatrix rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(HermitianOperator{rect}, ValidationError);
}

TEST_CASE("real tridiagonal representation") {
    RVector diag(4);
    diag << 1.0, 2.0, 3.0, 4.0;
    RVector sub(3);
    sub << -1.0, -1.0, -1.0;
    const HermitianOperator h = HermitianOperator::real_tridiagonal(diag, sub);
    CHECK(h.is_real_tridiagonal());
    CHECK(h.matrix()(0, 0) == Complex(1.0, 0.0));
    CHECK(h.matrix()(1, 0) == Complex(-1.0, 0.0));
    CHECK(h.matrix()(0, 1) == Complex(-1.0, 0.0));
    CHECK(h.matrix()(3, 0) == Complex(0.0, 0.0));

    // the dense constructor recognizes the same structure
    const HermitianOperator dense(h.matrix());
    CHECK(dense.is_real_tridiagonal());
    CHECK((dense.tridiagonal_diagonal() - diag).cwiseAbs().maxCoeff() == 0.0);

    // a complex off-tridiagonal entry defeats the detection
    CMatrix full = h.matrix();
    full(0, 3) = Complex(0.5, 0.0);
    full(3, 0) = Complex(0.5, 0.0);
    CHECK_FALSE(HermitianOperator(full).is_real_tridiagonal());

    RVector short_sub(1);
    short_sub << 0.0;
    CHECK_THROWS_AS(HermitianOperator::real_tridiagonal(diag, short_sub), ValidationError);
}

TEST_CASE("control pulse sampling") {
    const TimeGrid grid(1.0, 4);
    RVector values(2);
    values << 2.0, -0.5;
    const ControlPulse pulse = ControlPulse::constant({"a", "b"}, values, grid);
    CHECK(pulse.num_controls() == 2);
    CHECK(pulse.num_nodes() == 5);
    CHECK(pulse.matches(grid));
    CHECK(pulse.value(0, 3) == 2.0);
    CHECK(pulse.value(1, 0) == -0.5);
    CHECK(pulse.names()[1] == "b");

    RMatrix samples(1, 5);
    samples.setZero();
    CHECK_THROWS_AS(ControlPulse({"a", "b"}, samples), ValidationError); // name/row mismatch

    RMatrix nonfinite(1, 5);
    nonfinite.setZero();
    nonfinite(0, 2) = std::nan("");
    CHECK_THROWS_AS(ControlPulse({"a"}, nonfinite), ValidationError);
}
