#include "doctest.h"

#include "twotone/core.hpp"

#include <random>

using namespace twotone;

namespace {

// Deterministic random hermitian / density matrices for property checks.
std::mt19937 rng(12345);

Matrix random_matrix(int d) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

DensityMatrix random_density(const HilbertSpec& spec) {
    const int d = spec.total_dim();
    Matrix m = random_matrix(d);
    Matrix rho = m * m.adjoint();
    rho /= rho.trace();
    return {rho, spec};
}

Matrix random_hermitian(int d) {
    Matrix m = random_matrix(d);
    return 0.5 * (m + m.adjoint());
}

// Independent superoperator route: vec(A X B) = (B^T kron A) vec(X),
// column-major vec.
Matrix lindblad_superoperator(const Matrix& h, const Matrix& a, double kappa) {
    const int d = int(h.rows());
    const Matrix id = Matrix::Identity(d, d);
    const Matrix na = a.adjoint() * a;
    Matrix sup = -iu * (detail::kron(id, h) - detail::kron(h.transpose(), id));
    sup += kappa * detail::kron(a.conjugate(), a);
    sup -= 0.5 * kappa * (detail::kron(id, na) + detail::kron(na.transpose(), id));
    return sup;
}

Eigen::VectorXcd vec(const Matrix& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

}  // namespace

TEST_CASE("hilbert spec validation") {
    CHECK_THROWS_AS(build_operator(OperatorKind::annihilation, HilbertSpec{1}),
                    dimension_error);
    HilbertSpec spec{4};
    CHECK(spec.total_dim() == 8);
}

TEST_CASE("annihilation ladder entries at N=3") {
    HilbertSpec spec{3};
    auto a = build_operator(OperatorKind::annihilation, spec);
    // cavity factor: a[0,1]=1, a[1,2]=sqrt(2), everything else zero
    for (int q = 0; q < 2; ++q) {
        const int o = q * 3;
        CHECK(a.matrix(o + 0, o + 1) == Complex(1.0));
        CHECK(a.matrix(o + 1, o + 2).real() == doctest::Approx(std::sqrt(2.0)));
    }
    double off_sum = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (!(j == i + 1 && i % 3 != 2)) off_sum += std::abs(a.matrix(i, j));
    CHECK(off_sum == doctest::Approx(0.0));
}

TEST_CASE("pauli_x squared is the identity") {
    HilbertSpec spec{5};
    auto sx = build_operator(OperatorKind::pauli_x, spec);
    Matrix diff = sx.matrix * sx.matrix - Matrix::Identity(10, 10);
    CHECK(diff.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("qubit and cavity factors commute") {
    HilbertSpec spec{4};
    auto sz = build_operator(OperatorKind::pauli_z, spec);
    auto a = build_operator(OperatorKind::annihilation, spec);
    Matrix comm = sz.matrix * a.matrix - a.matrix * sz.matrix;
    CHECK(comm.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("truncated commutator [a, a^dag]") {
    HilbertSpec spec{6};
    const int nc = spec.fock_cutoff;
    auto a = build_operator(OperatorKind::annihilation, spec);
    auto ad = build_operator(OperatorKind::creation, spec);
    Matrix comm = a.matrix * ad.matrix - ad.matrix * a.matrix;
    // identity except the (N-1,N-1) corner of each qubit block, which is 1-N
    for (int q = 0; q < 2; ++q) {
        const int o = q * nc;
        for (int m = 0; m < nc - 1; ++m)
            CHECK(comm(o + m, o + m).real() == doctest::Approx(1.0));
        CHECK(comm(o + nc - 1, o + nc - 1).real() == doctest::Approx(1.0 - nc));
    }
}

TEST_CASE("quadrature operator is hermitian for any phase") {
    HilbertSpec spec{4};
    for (double phi : {0.0, 0.3, pi / 2, 2.1}) {
        auto q = build_operator(OperatorKind::quadrature, spec, phi);
        CHECK((q.matrix - q.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("expectation values on simple states") {
    HilbertSpec spec{5};
    auto a = build_operator(OperatorKind::annihilation, spec);
    auto n = build_operator(OperatorKind::number, spec);
    auto sx = build_operator(OperatorKind::pauli_x, spec);

    auto vac_plus = DensityMatrix::pure(tensor(qubit_plus(), fock_state(0, 5)), spec);
    CHECK(std::abs(expectation(a, vac_plus)) < 1e-14);
    CHECK(expectation(sx, vac_plus).real() == doctest::Approx(1.0));

    auto one = DensityMatrix::pure(tensor(qubit_up(), fock_state(1, 5)), spec);
    CHECK(expectation(n, one).real() == doctest::Approx(1.0));
}

TEST_CASE("expectation of hermitian operator is real on valid states") {
    HilbertSpec spec{3};
    for (int rep = 0; rep < 20; ++rep) {
        auto rho = random_density(spec);
        Matrix h = random_hermitian(spec.total_dim());
        CHECK(std::abs(expectation(h, rho.matrix).imag()) < 1e-10);
    }
}

TEST_CASE("expectation rejects mismatched spaces") {
    auto op = build_operator(OperatorKind::number, HilbertSpec{4});
    auto rho = random_density(HilbertSpec{5});
    CHECK_THROWS_AS(expectation(op, rho), dimension_error);
}

TEST_CASE("lindblad rhs: dark state and single-photon decay") {
    HilbertSpec spec{4};
    auto a = build_operator(OperatorKind::annihilation, spec);
    const Matrix zero_h = Matrix::Zero(8, 8);

    auto vac = DensityMatrix::pure(tensor(qubit_up(), fock_state(0, 4)), spec);
    Matrix rhs = lindblad_rhs(zero_h, vac.matrix, a.matrix, 0.3);
    CHECK(rhs.cwiseAbs().maxCoeff() < 1e-14);

    auto one = DensityMatrix::pure(tensor(qubit_up(), fock_state(1, 4)), spec);
    const double kappa = 0.7;
    rhs = lindblad_rhs(zero_h, one.matrix, a.matrix, kappa);
    auto n = build_operator(OperatorKind::number, spec);
    const double dndt = (n.matrix * rhs).trace().real();
    CHECK(dndt == doctest::Approx(-kappa));
}

TEST_CASE("lindblad rhs matches the explicit superoperator (N=2)") {
    HilbertSpec spec{2};
    auto a = build_operator(OperatorKind::annihilation, spec);
    for (int rep = 0; rep < 10; ++rep) {
        auto rho = random_density(spec);
        Matrix h = random_hermitian(4);
        const double kappa = 0.4;
        Matrix rhs = lindblad_rhs(h, rho.matrix, a.matrix, kappa);
        Matrix sup = lindblad_superoperator(h, a.matrix, kappa);
        Eigen::VectorXcd v = sup * vec(rho.matrix);
        CHECK((v - vec(rhs)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("lindblad rhs is traceless and hermiticity-preserving") {
    HilbertSpec spec{4};
    auto a = build_operator(OperatorKind::annihilation, spec);
    for (int rep = 0; rep < 20; ++rep) {
        auto rho = random_density(spec);
        Matrix h = random_hermitian(8);
        Matrix rhs = lindblad_rhs(h, rho.matrix, a.matrix, 0.9);
        CHECK(std::abs(rhs.trace()) < 1e-12);
        CHECK((rhs - rhs.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("density matrix invariants") {
    HilbertSpec spec{4};
    auto rho = random_density(spec);
    CHECK_NOTHROW(rho.validate());
    CHECK(rho.min_eigenvalue() > -1e-12);

    DensityMatrix bad{rho.matrix * 1.5, spec};
    CHECK_THROWS_AS(bad.validate(), numerical_breach);
}

TEST_CASE("coherent state mean photon number") {
    const Complex alpha(0.7, -0.4);
    auto psi = coherent_state(alpha, 25);
    HilbertSpec spec{25};
    auto rho = DensityMatrix::pure(tensor(qubit_up(), psi), spec);
    auto a = build_operator(OperatorKind::annihilation, spec);
    CHECK(std::abs(expectation(a, rho) - alpha) < 1e-10);
}
