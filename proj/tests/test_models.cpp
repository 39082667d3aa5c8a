#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qoct/lz.hpp"
#include "qoct/spin_chain.hpp"

using namespace qoct;

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Full 2^N Heisenberg chain with an occupation-coupled parabolic trap,
// projected onto the single-excitation sector. Independent of the model's
// tridiagonal construction; agreement is expected only up to a multiple of
// the identity (the model drops constant diagonal terms).
CMatrix single_excitation_sector(Index n, double j_coupling, double trap_c, double trap_d) {
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2), id(2, 2), occ(2, 2);
    sx << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    sy << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    sz << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
    id.setIdentity();
    occ << Complex(0, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);

    const Index full = Index(1) << n;
    CMatrix h = CMatrix::Zero(full, full);

    const auto site_op = [&](const CMatrix& op, Index site) {
        CMatrix acc = CMatrix::Identity(1, 1);
        for (Index s = 0; s < n; ++s) acc = kron(acc, s == site ? op : id);
        return acc;
    };

    for (Index m = 0; m + 1 < n; ++m) {
        h -= 0.5 * j_coupling *
             (site_op(sx, m) * site_op(sx, m + 1) + site_op(sy, m) * site_op(sy, m + 1) +
              site_op(sz, m) * site_op(sz, m + 1));
    }
    for (Index m = 0; m < n; ++m) {
        const double off = static_cast<double>(m) - trap_d;
        h += trap_c * off * off * site_op(occ, m);
    }

    CMatrix sector(n, n);
    const auto g = [&](Index m) { return Index(1) << (n - 1 - m); };
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b) sector(a, b) = h(g(a), g(b));
    return sector;
}

} // namespace

TEST_CASE("avoided-crossing Hamiltonian matrix and spectrum") {
    const LZModel model(1.0, -500.0);
    const HermitianOperator h = model.hamiltonian_for(500.0);
    CHECK(h.matrix()(0, 0) == Complex(500.0, 0.0));
    CHECK(h.matrix()(0, 1) == Complex(1.0, 0.0));
    CHECK(h.matrix()(1, 0) == Complex(1.0, 0.0));
    CHECK(h.matrix()(1, 1) == Complex(-500.0, 0.0));

    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
    const double e = std::sqrt(250001.0);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-e).epsilon(1e-14));
    CHECK(es.eigenvalues()(1) == doctest::Approx(e).epsilon(1e-14));

    for (double gamma : {-500.0, -3.2, 0.0, 7.5}) {
        Eigen::SelfAdjointEigenSolver<CMatrix> s(model.hamiltonian_for(gamma).matrix());
        CHECK(s.eigenvalues()(1) == doctest::Approx(model.gap(gamma) / 2.0).epsilon(1e-13));
        CHECK(s.eigenvalues()(0) == doctest::Approx(-model.gap(gamma) / 2.0).epsilon(1e-13));
    }

    RVector c(1);
    c << 123.0;
    const HermitianOperator dz = model.control_derivative(0, c);
    CHECK(dz.matrix()(0, 0) == Complex(1.0, 0.0));
    CHECK(dz.matrix()(1, 1) == Complex(-1.0, 0.0));
    CHECK(dz.matrix()(0, 1) == Complex(0.0, 0.0));
}

TEST_CASE("avoided-crossing constructor validation") {
    CHECK_THROWS_AS(LZModel(0.0, -5.0), ValidationError);
    CHECK_THROWS_AS(LZModel(1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(LZModel(1.0, 5.0), ValidationError);
}

TEST_CASE("adiabatic guess hits its boundary values and crosses zero midway") {
    const LZModel model(1.0, -500.0);
    const TimeGrid grid(1.5, 2000);
    const ControlPulse guess = model.guess_pulse(grid);
    CHECK(guess.value(0, 0) == -500.0);
    CHECK(guess.value(0, grid.num_nodes() - 1) == 500.0);
    CHECK(std::abs(guess.value(0, 1000)) < 1e-9); // node at T/2
    // strictly increasing sweep
    for (Index j = 0; j + 1 < grid.num_nodes(); ++j) {
        CHECK(guess.value(0, j) < guess.value(0, j + 1));
    }
}

TEST_CASE("adiabatic guess satisfies its defining rate equation") {
    for (double gamma0 : {-5.0, -20.0}) {
        const LZModel model(1.0, gamma0);
        const TimeGrid grid(1.5, 20000);
        const ControlPulse guess = model.guess_pulse(grid);
        const double rate = model.guess_rate(grid.total_time());
        double worst = 0.0;
        for (Index j = 1; j + 1 < grid.num_nodes(); ++j) {
            const double fd =
                (guess.value(0, j + 1) - guess.value(0, j - 1)) / (2.0 * grid.dt());
            const double gap = model.gap(guess.value(0, j));
            const double rhs = rate * gap * gap;
            worst = std::max(worst, std::abs(fd - rhs) / std::max(1.0, std::abs(rhs)));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("avoided-crossing boundary states") {
    const LZModel far(1.0, -500.0);
    const auto [psi0, goal] = model_boundary_states(far);
    const double expected = 1.0 / std::sqrt(250001.0);
    CHECK(std::abs(overlap(psi0, goal)) == doctest::Approx(expected).epsilon(1e-10));

    // extreme detuning pins the boundary states onto the basis states
    const LZModel extreme(1.0, -1e6);
    CHECK(std::abs(extreme.initial_state().amplitudes()(0)) > 1.0 - 1e-12);
    CHECK(std::abs(extreme.goal_state().amplitudes()(1)) > 1.0 - 1e-12);
}

TEST_CASE("chain Hamiltonian matches the full-space construction up to a constant shift") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> cdist(0.2, 4.0);
    for (Index n = 3; n <= 8; ++n) {
        const double j = 1.0;
        const double c = cdist(rng);
        const double d = cdist(rng) * static_cast<double>(n - 1) / 4.0;
        const SpinChainModel model(n, j);
        const CMatrix reduced = model.hamiltonian_for(c, d).matrix();
        const CMatrix oracle = single_excitation_sector(n, j, c, d);
        const CMatrix diff = reduced - oracle;
        const Complex shift = diff(0, 0);
        CHECK(std::abs(shift.imag()) < 1e-12);
        CHECK((diff - shift * CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("three-site chain without a trap has the expected rows") {
    const SpinChainModel model(3, 1.0);
    const CMatrix h = model.hamiltonian_for(0.0, 0.0).matrix();
    CMatrix expected(3, 3);
    expected << Complex(1, 0), Complex(-1, 0), Complex(0, 0), Complex(-1, 0), Complex(2, 0),
        Complex(-1, 0), Complex(0, 0), Complex(-1, 0), Complex(1, 0);
    CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("chain control derivatives agree with finite differences") {
    const SpinChainModel model(7, 1.0);
    RVector controls(2);
    controls << 1.7, 2.3;
    const double eps = 1e-5;
    for (Index k = 0; k < 2; ++k) {
        RVector up = controls, down = controls;
        up[k] += eps;
        down[k] -= eps;
        const CMatrix fd =
            (model.hamiltonian(up).matrix() - model.hamiltonian(down).matrix()) / (2.0 * eps);
        const CMatrix analytic = model.control_derivative(k, controls).matrix();
        CHECK((fd - analytic).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("chain guess pulse sweeps the trap across the chain") {
    const SpinChainModel model(101, 1.0);
    const TimeGrid grid(56.66, 200);
    const ControlPulse guess = model.guess_pulse(grid);
    CHECK(guess.num_controls() == 2);
    // constant trap strength row at the default 2J
    for (Index jn = 0; jn < grid.num_nodes(); ++jn) CHECK(guess.value(0, jn) == 2.0);
    CHECK(guess.value(1, 0) == 0.0);
    CHECK(guess.value(1, grid.num_nodes() - 1) == 100.0);
    CHECK(guess.value(1, 100) == doctest::Approx(50.0).epsilon(1e-12)); // node at T/2

    const SpinChainModel custom(9, 1.0, 3.5);
    CHECK(custom.guess_trap_strength() == 3.5);
    CHECK(custom.guess_pulse(TimeGrid(1.0, 4)).value(0, 2) == 3.5);
}

TEST_CASE("chain boundary states are the end sites") {
    const SpinChainModel model(5, 1.0);
    const auto [psi0, goal] = model_boundary_states(model);
    CHECK(std::abs(psi0.amplitudes()(0) - Complex(1, 0)) == 0.0);
    CHECK(std::abs(goal.amplitudes()(4) - Complex(1, 0)) == 0.0);
    CHECK(std::abs(overlap(psi0, goal)) == 0.0);
}

TEST_CASE("chain constructor validation") {
    CHECK_THROWS_AS(SpinChainModel(2, 1.0), ValidationError);
    CHECK_THROWS_AS(SpinChainModel(5, 0.0), ValidationError);
    CHECK_THROWS_AS(SpinChainModel(5, 1.0, -1.0), ValidationError);
}

TEST_CASE("update direction shortcut agrees with the dense expression") {
    std::mt19937 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto rand_vec = [&](Index dim) {
        CVector v(dim);
        for (Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
        return v;
    };

    const SpinChainModel chain(6, 1.3);
    RVector cc(2);
    cc << 2.1, 3.7;
    const LZModel lz(1.0, -5.0);
    RVector cl(1);
    cl << -2.0;

    for (int trial = 0; trial < 10; ++trial) {
        const CVector chi6 = rand_vec(6), psi6 = rand_vec(6);
        for (Index k = 0; k < 2; ++k) {
            const CMatrix dh = chain.control_derivative(k, cc).matrix();
            const double dense = (chi6.adjoint() * dh * psi6)(0).imag();
            CHECK(chain.update_direction(k, cc, chi6, psi6) ==
                  doctest::Approx(dense).epsilon(1e-12));
        }
        const CVector chi2 = rand_vec(2), psi2 = rand_vec(2);
        const CMatrix dz = lz.control_derivative(0, cl).matrix();
        const double dense2 = (chi2.adjoint() * dz * psi2)(0).imag();
        CHECK(lz.update_direction(0, cl, chi2, psi2) == doctest::Approx(dense2).epsilon(1e-12));
    }
}

TEST_CASE("pulse node plumbing") {
    const LZModel model(1.0, -5.0);
    const TimeGrid grid(1.0, 4);
    const ControlPulse guess = model.guess_pulse(grid);
    const RVector at2 = controls_at_node(guess, 2);
    REQUIRE(at2.size() == 1);
    CHECK(at2[0] == guess.value(0, 2));

    const HermitianOperator h2 = hamiltonian_at_node(model, guess, 2);
    CHECK(h2.matrix()(0, 0).real() == doctest::Approx(at2[0]));

    const HamiltonianSupplier supplier = pulse_node_supplier(model, guess);
    CHECK((supplier(3).matrix() - hamiltonian_at_node(model, guess, 3).matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
}
