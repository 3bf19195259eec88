#pragma once

// Complex operator algebra on the composite qubit (x) truncated-Fock space,
// plus the Lindblad generator for a single lossy cavity mode.
//
// Tensor ordering is fixed everywhere as qubit (x) cavity: a full-space index
// is q*N + n with q in {0,1} (0 = spin up, sigma_z = +1) and n the Fock level.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace twotone {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex iu{0.0, 1.0};

struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct regime_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown when a state invariant (trace, hermiticity, positivity) breaks
// mid-integration; the message carries the diagnostic time.
struct numerical_breach : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HilbertSpec {
    int fock_cutoff = 15;  // cavity levels 0..N-1

    int total_dim() const { return 2 * fock_cutoff; }

    void validate() const {
        if (fock_cutoff < 2)
            throw dimension_error("HilbertSpec: fock_cutoff must be >= 2, got " +
                                  std::to_string(fock_cutoff));
    }

    bool operator==(const HilbertSpec&) const = default;
};

enum class OperatorKind {
    annihilation,
    creation,
    number,
    identity,
    pauli_x,
    pauli_y,
    pauli_z,
    sigma_plus,
    sigma_minus,
    quadrature,  // e^{-i phi} a + e^{i phi} a^dag
};

struct Operator {
    Matrix matrix;
    HilbertSpec space;
};

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Truncated ladder: a|n> = sqrt(n)|n-1>.
inline Matrix annihilation(int cutoff) {
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

inline Matrix pauli_x2() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y2() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Matrix pauli_z2() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline Matrix sigma_plus2() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1;  // |up><down|
    return m;
}

}  // namespace detail

// Extends a 2x2 qubit operator to the full space as op (x) I_N.
inline Matrix qubit_operator(const Matrix& op2, const HilbertSpec& spec) {
    spec.validate();
    if (op2.rows() != 2 || op2.cols() != 2)
        throw dimension_error("qubit_operator: expected a 2x2 matrix");
    return detail::kron(op2, Matrix::Identity(spec.fock_cutoff, spec.fock_cutoff));
}

// Extends a cavity operator to the full space as I_2 (x) op.
inline Matrix cavity_operator(const Matrix& opc, const HilbertSpec& spec) {
    spec.validate();
    if (opc.rows() != spec.fock_cutoff || opc.cols() != spec.fock_cutoff)
        throw dimension_error("cavity_operator: matrix does not match fock_cutoff");
    return detail::kron(Matrix::Identity(2, 2), opc);
}

inline Operator build_operator(OperatorKind kind, const HilbertSpec& spec,
                               double phase = 0.0) {
    spec.validate();
    const int nc = spec.fock_cutoff;
    const Matrix a = detail::annihilation(nc);
    switch (kind) {
        case OperatorKind::annihilation:
            return {cavity_operator(a, spec), spec};
        case OperatorKind::creation:
            return {cavity_operator(a.adjoint(), spec), spec};
        case OperatorKind::number:
            return {cavity_operator(a.adjoint() * a, spec), spec};
        case OperatorKind::identity:
            return {Matrix::Identity(spec.total_dim(), spec.total_dim()), spec};
        case OperatorKind::pauli_x:
            return {qubit_operator(detail::pauli_x2(), spec), spec};
        case OperatorKind::pauli_y:
            return {qubit_operator(detail::pauli_y2(), spec), spec};
        case OperatorKind::pauli_z:
            return {qubit_operator(detail::pauli_z2(), spec), spec};
        case OperatorKind::sigma_plus:
            return {qubit_operator(detail::sigma_plus2(), spec), spec};
        case OperatorKind::sigma_minus:
            return {qubit_operator(detail::sigma_plus2().adjoint().eval(), spec), spec};
        case OperatorKind::quadrature: {
            const Complex ph = std::exp(-iu * phase);
            Matrix q = ph * a + std::conj(ph) * a.adjoint();
            return {cavity_operator(q, spec), spec};
        }
    }
    throw dimension_error("build_operator: unknown operator tag");
}

// ---- state constructors -----------------------------------------------------

inline Vector fock_state(int n, int cutoff) {
    if (n < 0 || n >= cutoff)
        throw dimension_error("fock_state: level outside truncated ladder");
    Vector v = Vector::Zero(cutoff);
    v(n) = 1.0;
    return v;
}

inline Vector coherent_state(Complex alpha, int cutoff) {
    Vector v(cutoff);
    Complex amp = 1.0;
    v(0) = amp;
    for (int n = 1; n < cutoff; ++n) {
        amp *= alpha / std::sqrt(double(n));
        v(n) = amp;
    }
    v *= std::exp(-0.5 * std::norm(alpha));
    v.normalize();  // absorbs the truncated tail
    return v;
}

inline Vector qubit_up() {
    Vector v(2);
    v << 1, 0;
    return v;
}

inline Vector qubit_down() {
    Vector v(2);
    v << 0, 1;
    return v;
}

// sigma_x eigenstates
inline Vector qubit_plus() {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return v;
}

inline Vector qubit_minus() {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    return v;
}

inline Vector tensor(const Vector& qubit, const Vector& cavity) {
    if (qubit.size() != 2) throw dimension_error("tensor: qubit factor must have dim 2");
    Vector out(2 * cavity.size());
    out.segment(0, cavity.size()) = qubit(0) * cavity;
    out.segment(cavity.size(), cavity.size()) = qubit(1) * cavity;
    return out;
}

// ---- density matrices -------------------------------------------------------

struct DensityMatrix {
    Matrix matrix;
    HilbertSpec space;

    static DensityMatrix pure(const Vector& psi, const HilbertSpec& spec) {
        spec.validate();
        if (psi.size() != spec.total_dim())
            throw dimension_error("DensityMatrix::pure: state dim mismatch");
        Vector n = psi.normalized();
        return {n * n.adjoint(), spec};
    }

    double hermiticity_error() const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    }

    double trace_error() const { return std::abs(matrix.trace() - Complex(1.0)); }

    double min_eigenvalue() const {
        Matrix h = 0.5 * (matrix + matrix.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    void validate(double herm_tol = 1e-10, double trace_tol = 1e-8,
                  double positivity_floor = -1e-7) const {
        if (matrix.rows() != space.total_dim() || matrix.cols() != space.total_dim())
            throw dimension_error("DensityMatrix: matrix does not match space");
        if (hermiticity_error() > herm_tol)
            throw numerical_breach("DensityMatrix: hermiticity violated, |rho-rho^dag| = " +
                                   std::to_string(hermiticity_error()));
        if (trace_error() > trace_tol)
            throw numerical_breach("DensityMatrix: trace violated, |Tr rho - 1| = " +
                                   std::to_string(trace_error()));
        const double lam = min_eigenvalue();
        if (lam < positivity_floor)
            throw numerical_breach("DensityMatrix: positivity violated, min eigenvalue = " +
                                   std::to_string(lam));
    }
};

inline Complex expectation(const Operator& op, const DensityMatrix& rho) {
    if (!(op.space == rho.space) || op.matrix.rows() != rho.matrix.rows())
        throw dimension_error("expectation: operator and state live on different spaces");
    return (op.matrix * rho.matrix).trace();
}

inline Complex expectation(const Matrix& op, const Matrix& rho) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols())
        throw dimension_error("expectation: dimension mismatch");
    return (op * rho).trace();
}

// drho/dt = -i[H, rho] + (kappa/2)(2 a rho a^dag - a^dag a rho - rho a^dag a)
inline Matrix lindblad_rhs(const Matrix& h, const Matrix& rho, const Matrix& a,
                           double kappa) {
    if (h.rows() != rho.rows() || a.rows() != rho.rows())
        throw dimension_error("lindblad_rhs: dimension mismatch");
    if (kappa < 0) throw dimension_error("lindblad_rhs: kappa must be >= 0");
    Matrix out = -iu * (h * rho - rho * h);
    if (kappa > 0) {
        const Matrix ar = a * rho;
        const Matrix na = a.adjoint() * a;
        out += kappa * (ar * a.adjoint()) - 0.5 * kappa * (na * rho + rho * na);
    }
    return out;
}

inline Matrix lindblad_rhs(const Operator& h, const DensityMatrix& rho, double kappa) {
    if (!(h.space == rho.space))
        throw dimension_error("lindblad_rhs: operator and state spaces differ");
    const Matrix a = build_operator(OperatorKind::annihilation, rho.space).matrix;
    return lindblad_rhs(h.matrix, rho.matrix, a, kappa);
}

}  // namespace twotone
