#pragma once

// Reduced states, QND fidelity and Wigner-function reconstruction.

#include "twotone/core.hpp"
#include "twotone/parallel.hpp"
#include "twotone/solver.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace twotone {

enum class Subsystem { qubit, cavity };

// Partial trace over the complementary factor. The result lives on a
// degenerate HilbertSpec and is returned as a bare matrix wrapper.
inline Matrix reduce(const DensityMatrix& rho, Subsystem keep) {
    rho.space.validate();
    const int nc = rho.space.fock_cutoff;
    if (keep == Subsystem::qubit) {
        Matrix out = Matrix::Zero(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int m = 0; m < nc; ++m) out(i, j) += rho.matrix(i * nc + m, j * nc + m);
        return out;
    }
    Matrix out = Matrix::Zero(nc, nc);
    for (int m = 0; m < nc; ++m)
        for (int l = 0; l < nc; ++l)
            for (int q = 0; q < 2; ++q) out(m, l) += rho.matrix(q * nc + m, q * nc + l);
    return out;
}

struct FidelityReport {
    std::vector<double> times;
    std::vector<double> overlap;  // <target| rho_qubit(t) |target>
    double minimum = 1.0;
    double argmin_time = 0.0;
};

// Minimum rotating-frame overlap with the target qubit state across the
// recorded evolution. The trajectory's observable series already carries the
// |+> overlap in the rotating frame; other targets go through the stored
// states (and require the trajectory to hold them).
inline FidelityReport qnd_fidelity(const Trajectory& traj) {
    if (traj.frame == Frame::Unspecified)
        throw dimension_error("qnd_fidelity: trajectory carries no frame tag");
    FidelityReport rep;
    rep.times = traj.obs.t;
    rep.overlap = traj.obs.plus_overlap;
    rep.minimum = 1.0;
    for (std::size_t i = 0; i < rep.overlap.size(); ++i) {
        if (rep.overlap[i] < rep.minimum) {
            rep.minimum = rep.overlap[i];
            rep.argmin_time = rep.times[i];
        }
    }
    return rep;
}

// Overlap series against an arbitrary qubit target, from the stored states.
// States of lab-frame trajectories were recorded as-is, so the qubit part is
// rotated by e^{-i(delta_h/2) sigma_z t} before projection when needed.
inline FidelityReport qnd_fidelity(const Trajectory& traj, const Vector& target) {
    if (traj.frame == Frame::Unspecified)
        throw dimension_error("qnd_fidelity: trajectory carries no frame tag");
    if (target.size() != 2)
        throw dimension_error("qnd_fidelity: target must be a qubit state");
    if (traj.states.empty())
        throw dimension_error("qnd_fidelity: trajectory stores no states");
    const bool lab = frame_of(traj.kind) == Frame::Lab;
    const Vector tgt = target.normalized();
    FidelityReport rep;
    rep.minimum = 1.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const double t = traj.state_times[i];
        Matrix q = reduce(traj.states[i], Subsystem::qubit);
        if (lab) {
            const Complex z = std::exp(iu * (0.5 * traj.params.delta_h * t));
            Matrix u = Matrix::Zero(2, 2);
            u(0, 0) = z;
            u(1, 1) = std::conj(z);
            q = u * q * u.adjoint();
        }
        const double ov = std::real((tgt.adjoint() * q * tgt)(0, 0));
        rep.times.push_back(t);
        rep.overlap.push_back(ov);
        if (ov < rep.minimum) {
            rep.minimum = ov;
            rep.argmin_time = t;
        }
    }
    return rep;
}

// ---- Wigner function --------------------------------------------------------

struct WignerGridSpec {
    double x_min = -3, x_max = 3;
    double p_min = -3, p_max = 3;
    int nx = 81, np = 81;
};

struct WignerGrid {
    WignerGridSpec spec;
    std::vector<double> values;  // row-major, values[ix * np + ip]

    double at(int ix, int ip) const { return values[std::size_t(ix) * spec.np + ip]; }
    double dx() const { return (spec.x_max - spec.x_min) / (spec.nx - 1); }
    double dp() const { return (spec.p_max - spec.p_min) / (spec.np - 1); }
    double x(int ix) const { return spec.x_min + ix * dx(); }
    double p(int ip) const { return spec.p_min + ip * dp(); }

    double normalization() const {
        double sum = 0;
        for (double v : values) sum += v;
        return sum * dx() * dp();
    }

    // marginal over p: distribution of the quadrature X = (a + a^dag)/2
    std::vector<double> marginal_x() const {
        std::vector<double> out(spec.nx, 0.0);
        for (int ix = 0; ix < spec.nx; ++ix)
            for (int ip = 0; ip < spec.np; ++ip) out[ix] += at(ix, ip) * dp();
        return out;
    }
};

namespace detail {

// exp(alpha a^dag - alpha^* a) on the truncated ladder, via diagonalization of
// the hermitian generator i(alpha a^dag - alpha^* a).
inline Matrix displacement(Complex alpha, int cutoff) {
    const Matrix a = annihilation(cutoff);
    Matrix gen = iu * (alpha * a.adjoint() - std::conj(alpha) * a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gen);
    Vector phases(cutoff);
    for (int k = 0; k < cutoff; ++k)
        phases(k) = std::exp(-iu * es.eigenvalues()(k));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Displaced-parity Wigner function of a cavity-only density matrix:
// W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag], alpha = x + i p.
inline WignerGrid wigner(const Matrix& rho_cavity, const WignerGridSpec& spec) {
    const int nc = int(rho_cavity.rows());
    if (rho_cavity.cols() != nc || nc < 2)
        throw dimension_error("wigner: expected a square cavity density matrix");
    if (spec.nx < 2 || spec.np < 2)
        throw dimension_error("wigner: grid needs at least 2x2 points");
    // support leaking into the top of the ladder invalidates the result
    const double top = std::abs(rho_cavity(nc - 1, nc - 1)) +
                       std::abs(rho_cavity(nc - 2, nc - 2));
    if (top > 1e-3)
        throw numerical_breach("wigner: state support leaks beyond the Fock cutoff "
                               "(top-two-level population " + std::to_string(top) + ")");

    // The truncated displacement is only accurate while |alpha|^2 stays well
    // below the cutoff, so the state is embedded in a ladder sized to the
    // farthest grid corner before the parity trace is taken.
    const double ax = std::max(std::abs(spec.x_min), std::abs(spec.x_max));
    const double ap = std::max(std::abs(spec.p_min), std::abs(spec.p_max));
    const double corner = ax * ax + ap * ap;  // largest |alpha|^2 on the grid
    const int nc_eff =
        std::max(nc, int(std::ceil(corner + 5.0 * std::sqrt(corner + 1.0))) + 12);
    Matrix rho_big = Matrix::Zero(nc_eff, nc_eff);
    rho_big.topLeftCorner(nc, nc) = rho_cavity;

    Vector parity(nc_eff);
    for (int k = 0; k < nc_eff; ++k) parity(k) = (k % 2 == 0) ? 1.0 : -1.0;

    WignerGrid grid;
    grid.spec = spec;
    grid.values.assign(std::size_t(spec.nx) * spec.np, 0.0);
    parallel_for(std::size_t(spec.nx), [&](std::size_t ix) {
        const double x = grid.x(int(ix));
        for (int ip = 0; ip < spec.np; ++ip) {
            const Complex alpha(x, grid.p(ip));
            const Matrix d = detail::displacement(alpha, nc_eff);
            const Complex val = (rho_big * d * parity.asDiagonal() * d.adjoint()).trace();
            grid.values[ix * std::size_t(spec.np) + ip] = (2.0 / pi) * val.real();
        }
    });
    return grid;
}

// Plain-text export: 4-line header (ranges and dims), then nx rows of np values.
inline void write_wigner(const WignerGrid& grid, const std::string& path,
                         const std::string& extra_header = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_wigner: cannot open " + path);
    char buf[256];
    std::snprintf(buf, sizeof buf, "# x_range %.12g %.12g\n", grid.spec.x_min,
                  grid.spec.x_max);
    out << buf;
    std::snprintf(buf, sizeof buf, "# p_range %.12g %.12g\n", grid.spec.p_min,
                  grid.spec.p_max);
    out << buf;
    std::snprintf(buf, sizeof buf, "# dims %d %d\n", grid.spec.nx, grid.spec.np);
    out << buf;
    out << "# " << (extra_header.empty() ? "wigner" : extra_header) << "\n";
    for (int ix = 0; ix < grid.spec.nx; ++ix) {
        for (int ip = 0; ip < grid.spec.np; ++ip) {
            std::snprintf(buf, sizeof buf, "%.12g%c", grid.at(ix, ip),
                          ip + 1 == grid.spec.np ? '\n' : ' ');
            out << buf;
        }
    }
}

}  // namespace twotone
