#pragma once

// Deterministic integration of the time-dependent Lindblad equation, plus
// interval propagation of arbitrary matrices under the same generator (used by
// the quantum-regression noise integral).

#include "twotone/core.hpp"
#include "twotone/models.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace twotone {

enum class Method { rk4_fixed, rk45_adaptive };

struct IntegratorConfig {
    Method method = Method::rk4_fixed;
    double dt_max = 0.0;  // 0: use the resolution bound
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    int oscillation_resolution = 40;  // steps per fastest period
    int store_stride = 0;             // 0: auto, targets <= 2000 stored states
    bool check_invariants = true;
    double herm_tol = 1e-10;
    double trace_tol = 1e-8;
    double positivity_floor = -1e-7;
};

// Observable series recorded at every accepted step. <a> and the qubit
// overlap are reported in the rotating frame: for lab-frame kinds the states
// are rotated by U = exp{i(omega_c a^dag a + (delta_h/2) sigma_z) t} on the
// fly, for rotating-frame kinds they are taken as-is.
struct ObservableSeries {
    std::vector<double> t;
    std::vector<double> re_a, im_a;   // rotating-frame <a>
    std::vector<double> quad;         // <e^{-i phi} a + h.c.>, rotating frame
    std::vector<double> sx, sz;       // sx in the rotating frame; sz invariant
    std::vector<double> n;            // <a^dag a>
    std::vector<double> plus_overlap; // rotating-frame <|+><+| (x) I>
    std::vector<double> trace_dev;    // |Tr rho - 1|
};

struct Trajectory {
    HamiltonianKind kind;
    ModelParams params;
    Frame frame = Frame::Unspecified;
    double dt = 0.0;  // fine step actually used (rk4) or initial step (rk45)
    ObservableSeries obs;
    std::vector<double> state_times;
    std::vector<DensityMatrix> states;
};

namespace detail {

inline double resolution_bound(HamiltonianKind kind, const ModelParams& p,
                               const IntegratorConfig& cfg, int fock_cutoff) {
    double wmax = fastest_frequency(kind, p);
    // Lab-frame generators carry the bare cavity phase e^{-i omega_c n t} up
    // to n = N - 1; the step must resolve that stiffest eigenvalue, not just
    // the modulation frequency.
    if (frame_of(kind) == Frame::Lab)
        wmax = std::max(wmax, 3.0 * p.omega_c * double(fock_cutoff - 1));
    return (2.0 * pi / wmax) / double(std::max(1, cfg.oscillation_resolution));
}

inline double pick_dt(HamiltonianKind kind, const ModelParams& p,
                      const IntegratorConfig& cfg, int fock_cutoff) {
    const double bound = resolution_bound(kind, p, cfg, fock_cutoff);
    if (cfg.dt_max > 0.0) {
        if (cfg.dt_max > bound * (1.0 + 1e-12))
            throw dimension_error(
                "IntegratorConfig: dt_max " + std::to_string(cfg.dt_max) +
                " violates the oscillation-resolution bound " + std::to_string(bound));
        return cfg.dt_max;
    }
    return bound;
}

// One classical RK4 step of dB/dt = -i[H(t),B] + kappa D[a]B.
struct Rk4Stepper {
    const HamiltonianModel& model;
    const Matrix& a;
    double kappa;
    Matrix h, k1, k2, k3, k4, tmp;

    Rk4Stepper(const HamiltonianModel& m, const Matrix& a_, double kappa_)
        : model(m), a(a_), kappa(kappa_) {}

    void step(double t, double dt, Matrix& b) {
        model.eval(t, h);
        k1 = lindblad_rhs(h, b, a, kappa);
        model.eval(t + 0.5 * dt, h);
        tmp = b + (0.5 * dt) * k1;
        k2 = lindblad_rhs(h, tmp, a, kappa);
        tmp = b + (0.5 * dt) * k2;
        k3 = lindblad_rhs(h, tmp, a, kappa);
        model.eval(t + dt, h);
        tmp = b + dt * k3;
        k4 = lindblad_rhs(h, tmp, a, kappa);
        b += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

// Dormand-Prince 5(4) with matrix max-norm error control.
struct Rk45Stepper {
    const HamiltonianModel& model;
    const Matrix& a;
    double kappa, rel_tol, abs_tol;
    Matrix h, k1, k2, k3, k4, k5, k6, k7, tmp, y5, y4;

    Rk45Stepper(const HamiltonianModel& m, const Matrix& a_, double kappa_,
                double rel, double abs)
        : model(m), a(a_), kappa(kappa_), rel_tol(rel), abs_tol(abs) {}

    Matrix rhs(double t, const Matrix& b) {
        model.eval(t, h);
        return lindblad_rhs(h, b, a, kappa);
    }

    // Attempts a step of size dt from (t, b); on acceptance advances b and
    // returns true. dt_next is the suggested next size either way.
    bool try_step(double t, double dt, Matrix& b, double& dt_next) {
        k1 = rhs(t, b);
        tmp = b + dt * (1.0 / 5.0) * k1;
        k2 = rhs(t + dt / 5.0, tmp);
        tmp = b + dt * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2);
        k3 = rhs(t + 3.0 * dt / 10.0, tmp);
        tmp = b + dt * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3);
        k4 = rhs(t + 4.0 * dt / 5.0, tmp);
        tmp = b + dt * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                        64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4);
        k5 = rhs(t + 8.0 * dt / 9.0, tmp);
        tmp = b + dt * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                        46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                        5103.0 / 18656.0 * k5);
        k6 = rhs(t + dt, tmp);
        y5 = b + dt * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                       2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
        k7 = rhs(t + dt, y5);
        y4 = b + dt * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                       393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                       187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
        const double err = (y5 - y4).cwiseAbs().maxCoeff();
        const double scale = abs_tol + rel_tol * std::max(b.cwiseAbs().maxCoeff(),
                                                          y5.cwiseAbs().maxCoeff());
        const double ratio = err / scale;
        const double fac =
            std::clamp(0.9 * std::pow(std::max(ratio, 1e-10), -0.2), 0.2, 5.0);
        dt_next = dt * fac;
        if (ratio <= 1.0) {
            b = y5;
            return true;
        }
        return false;
    }
};

struct FrameRotation {
    bool active = false;
    double omega_cav = 0.0;   // cavity rotation frequency
    double omega_qubit = 0.0; // qubit sigma_z rotation frequency (= delta_h)
};

inline FrameRotation frame_rotation_for(HamiltonianKind kind, const ModelParams& p) {
    if (frame_of(kind) == Frame::Lab) return {true, p.omega_c, p.delta_h};
    return {};
}

// Appends one sample of every observable. rho need not be exactly trace-one.
inline void record_observables(ObservableSeries& obs, double t, const Matrix& rho,
                               const Matrix& a, const ModelParams& p,
                               const FrameRotation& rot, int cutoff) {
    obs.t.push_back(t);
    Complex ea = (a * rho).trace();
    if (rot.active) ea *= std::exp(iu * (rot.omega_cav * t));
    obs.re_a.push_back(ea.real());
    obs.im_a.push_back(ea.imag());
    const Complex ph = std::exp(-iu * p.homodyne_phase);
    obs.quad.push_back(2.0 * (ph * ea).real());

    // reduced qubit matrix elements
    Complex q00 = 0, q01 = 0, q11 = 0;
    for (int m = 0; m < cutoff; ++m) {
        q00 += rho(m, m);
        q01 += rho(m, cutoff + m);
        q11 += rho(cutoff + m, cutoff + m);
    }
    const Complex zq = rot.active ? std::exp(iu * (rot.omega_qubit * t)) : Complex(1.0);
    // rotating-frame coherence: e^{i delta_h t} rho01
    const Complex q01r = zq * q01;
    obs.sx.push_back(2.0 * q01r.real());
    obs.sz.push_back((q00 - q11).real());
    obs.plus_overlap.push_back(0.5 * (q00 + q11).real() + q01r.real());

    Complex nn = 0;
    for (int q = 0; q < 2; ++q)
        for (int m = 0; m < cutoff; ++m) nn += double(m) * rho(q * cutoff + m, q * cutoff + m);
    obs.n.push_back(nn.real());
    obs.trace_dev.push_back(std::abs(rho.trace() - Complex(1.0)));
}

inline void check_state(const Matrix& rho, double t, const IntegratorConfig& cfg) {
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > cfg.herm_tol)
        throw numerical_breach("evolve: hermiticity breach " + std::to_string(herm) +
                               " at t = " + std::to_string(t));
    const double tr = std::abs(rho.trace() - Complex(1.0));
    if (tr > cfg.trace_tol)
        throw numerical_breach("evolve: trace breach " + std::to_string(tr) +
                               " at t = " + std::to_string(t));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues().minCoeff();
    if (lam < cfg.positivity_floor)
        throw numerical_breach("evolve: positivity breach, min eigenvalue " +
                               std::to_string(lam) + " at t = " + std::to_string(t));
}

}  // namespace detail

inline Trajectory evolve(HamiltonianKind kind, const ModelParams& p,
                         const DensityMatrix& rho0, double t_final,
                         const IntegratorConfig& cfg = {}) {
    p.validate();
    rho0.space.validate();
    rho0.validate();
    if (t_final <= 0) throw dimension_error("evolve: t_final must be > 0");

    const HilbertSpec spec = rho0.space;
    HamiltonianModel model(kind, p, spec);
    const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
    const auto rot = detail::frame_rotation_for(kind, p);

    Trajectory traj;
    traj.kind = kind;
    traj.params = p;
    traj.frame = Frame::Rotating;  // observables are frame-corrected on record

    Matrix rho = rho0.matrix;

    if (cfg.method == Method::rk4_fixed) {
        const double dt0 = detail::pick_dt(kind, p, cfg, spec.fock_cutoff);
        const long steps = std::max<long>(1, std::lround(std::ceil(t_final / dt0)));
        const double dt = t_final / double(steps);
        traj.dt = dt;
        const int stride =
            cfg.store_stride > 0 ? cfg.store_stride
                                 : std::max<long>(1, steps / 2000);

        detail::Rk4Stepper stepper(model, a, p.kappa);
        auto store = [&](double t) {
            if (cfg.check_invariants) detail::check_state(rho, t, cfg);
            traj.state_times.push_back(t);
            traj.states.push_back(DensityMatrix{rho, spec});
        };
        detail::record_observables(traj.obs, 0.0, rho, a, p, rot, spec.fock_cutoff);
        store(0.0);
        for (long s = 0; s < steps; ++s) {
            const double t = double(s) * dt;
            stepper.step(t, dt, rho);
            const double t1 = double(s + 1) * dt;
            detail::record_observables(traj.obs, t1, rho, a, p, rot, spec.fock_cutoff);
            if ((s + 1) % stride == 0 || s + 1 == steps) store(t1);
        }
    } else {
        const double bound = detail::resolution_bound(kind, p, cfg, spec.fock_cutoff);
        double dt = cfg.dt_max > 0 ? std::min(cfg.dt_max, bound) : bound;
        traj.dt = dt;
        detail::Rk45Stepper stepper(model, a, p.kappa, cfg.rel_tol, cfg.abs_tol);
        double t = 0.0;
        long accepted = 0;
        const int stride = cfg.store_stride > 0 ? cfg.store_stride : 1;
        detail::record_observables(traj.obs, 0.0, rho, a, p, rot, spec.fock_cutoff);
        if (cfg.check_invariants) detail::check_state(rho, 0.0, cfg);
        traj.state_times.push_back(0.0);
        traj.states.push_back(DensityMatrix{rho, spec});
        while (t < t_final) {
            double h = std::min({dt, bound, t_final - t});
            double dt_next = h;
            int rejects = 0;
            while (!stepper.try_step(t, h, rho, dt_next)) {
                h = std::min(dt_next, bound);
                if (++rejects > 60)
                    throw numerical_breach("evolve: rk45 step failure at t = " +
                                           std::to_string(t));
            }
            t += h;
            dt = dt_next;
            ++accepted;
            detail::record_observables(traj.obs, t, rho, a, p, rot, spec.fock_cutoff);
            if (accepted % stride == 0 || t >= t_final) {
                if (cfg.check_invariants) detail::check_state(rho, t, cfg);
                traj.state_times.push_back(t);
                traj.states.push_back(DensityMatrix{rho, spec});
            }
        }
    }
    return traj;
}

// Applies the time-ordered Lindblad propagator of the selected kind over
// [t_from, t_to] to an arbitrary matrix B (not necessarily positive or
// trace-one); linear in B.
inline Matrix propagate_matrix(HamiltonianKind kind, const ModelParams& p,
                               const Matrix& b0, double t_from, double t_to,
                               const IntegratorConfig& cfg = {}) {
    p.validate();
    if (t_to < t_from)
        throw dimension_error("propagate_matrix: t_to must be >= t_from");
    const int d = int(b0.rows());
    if (d % 2 != 0 || b0.cols() != d)
        throw dimension_error("propagate_matrix: expected a square 2N x 2N matrix");
    HilbertSpec spec{d / 2};
    HamiltonianModel model(kind, p, spec);
    const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
    Matrix b = b0;
    if (t_to == t_from) return b;
    const double dt0 = detail::pick_dt(kind, p, cfg, spec.fock_cutoff);
    const long steps = std::max<long>(1, std::lround(std::ceil((t_to - t_from) / dt0)));
    const double dt = (t_to - t_from) / double(steps);
    detail::Rk4Stepper stepper(model, a, p.kappa);
    for (long s = 0; s < steps; ++s) stepper.step(t_from + double(s) * dt, dt, b);
    return b;
}

// Propagates B through an ascending time grid, invoking f(index, B) at every
// grid point (including the first); used for sampling two-time correlators.
template <class F>
void propagate_through(HamiltonianKind kind, const ModelParams& p, Matrix b,
                       std::span<const double> times, const IntegratorConfig& cfg,
                       F&& f) {
    if (times.empty()) return;
    HilbertSpec spec{int(b.rows()) / 2};
    HamiltonianModel model(kind, p, spec);
    const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
    detail::Rk4Stepper stepper(model, a, p.kappa);
    const double dt0 = detail::pick_dt(kind, p, cfg, spec.fock_cutoff);
    f(std::size_t{0}, b);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double span = times[i] - times[i - 1];
        if (span < 0) throw dimension_error("propagate_through: times must ascend");
        if (span > 0) {
            const long sub = std::max<long>(1, std::lround(std::ceil(span / dt0)));
            const double dt = span / double(sub);
            for (long s = 0; s < sub; ++s)
                stepper.step(times[i - 1] + double(s) * dt, dt, b);
        }
        f(i, b);
    }
}

}  // namespace twotone
