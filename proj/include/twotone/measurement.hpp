#pragma once

// Homodyne readout statistics: integrated signal M(tau), noise variance
// delta M(tau)^2 via the quantum-regression double integral, SNR(tau),
// power-law fits, and the dispersive-feasibility arithmetic.

#include "twotone/core.hpp"
#include "twotone/models.hpp"
#include "twotone/parallel.hpp"
#include "twotone/solver.hpp"

#include <cmath>
#include <vector>

namespace twotone {

struct HomodyneResult {
    std::vector<double> tau_grid;
    std::vector<double> mean_plus, mean_minus;  // M(tau) per preparation
    std::vector<double> var_plus, var_minus;    // delta M(tau)^2
    std::vector<double> snr;
};

struct ScalingFit {
    double tau_lo = 0, tau_hi = 0;
    double slope = 0;
    double residual = 0;  // rms of log-log fit residuals
};

struct DispersiveFeasibility {
    double chi = 0;                   // J_r^2 / Delta
    double critical_drive_ratio = 0;  // Delta / (sqrt(8) J_r), E/kappa upper limit
    double required_drive_ratio = 0;  // kappa / (2 chi), E/kappa lower limit
    bool feasible = false;
};

namespace detail {

// Cumulative integral on a uniform grid; Simpson-accurate on even indices,
// third-order Adams-Moulton on odd ones.
inline std::vector<double> cumulative_integral(const std::vector<double>& t,
                                               const std::vector<double>& f) {
    std::vector<double> out(f.size(), 0.0);
    if (f.size() < 2) return out;
    const double h = t[1] - t[0];
    out[1] = 0.5 * h * (f[0] + f[1]);
    for (std::size_t k = 2; k < f.size(); ++k) {
        if (k % 2 == 0)
            out[k] = out[k - 2] + (h / 3.0) * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        else
            out[k] = out[k - 1] + (h / 12.0) * (5.0 * f[k] + 8.0 * f[k - 1] - f[k - 2]);
    }
    return out;
}

inline double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    double total = 0.0;
    std::size_t k = 0;
    // composite 1/3 rule over pairs, 3/8 tail when the interval count is odd
    std::size_t intervals = n - 1;
    const std::size_t tail = (intervals % 2 == 0) ? 0 : 3;
    while (k + 2 <= n - 1 - tail) {
        total += (h / 3.0) * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        k += 2;
    }
    if (tail) {
        const std::size_t m = n - 4;
        total += (3.0 * h / 8.0) * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
    }
    return total;
}

inline double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double total = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < f.size(); ++k) total += f[k];
    return total * h;
}

inline double interp(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    const std::size_t j = std::size_t(it - xs.begin());
    const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] * (1.0 - w) + ys[j] * w;
}

}  // namespace detail

// M(t) = sqrt(kappa) int_0^t <e^{-i phi} a + e^{i phi} a^dag> dt', evaluated on
// the trajectory's recorded grid. Throws when the grid is too coarse for the
// stated 1e-3 relative quadrature accuracy.
inline std::vector<double> mean_signal(const Trajectory& traj, const ModelParams& p) {
    const auto& t = traj.obs.t;
    const auto& quad = traj.obs.quad;
    if (t.size() < 3) throw dimension_error("mean_signal: trajectory grid too short");
    const double h = t[1] - t[0];
    const double simp = detail::simpson(quad, h);
    const double trap = detail::trapezoid(quad, h);
    auto m = detail::cumulative_integral(t, quad);
    const double sk = std::sqrt(p.kappa);
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (scale > 0 && std::abs(simp - trap) / scale > 1e-3)
        throw dimension_error("mean_signal: grid too coarse, Simpson error estimate " +
                              std::to_string(std::abs(simp - trap) / scale));
    for (double& v : m) v *= sk;
    return m;
}

// ---- regression noise -------------------------------------------------------

// Mean signal and noise variance on a uniform outer grid over [0, tau_max].
struct NoiseTable {
    std::vector<double> tau;
    std::vector<double> mean;      // M(tau_j)
    std::vector<double> variance;  // delta M(tau_j)^2
};

// Evaluates the symmetrized double integral
//   dM(tau)^2 = 2 kappa^2 \int\int_{t<=t'} Tr[q_phi exp{L(t'-t)}
//               (e^{-i phi} a rho(t) + e^{i phi} rho(t) a^dag)] dt dt'
//               + kappa tau - M(tau)^2
// with q_phi the measured quadrature. One generator propagation per outer grid
// point; the outer points run in parallel.
inline NoiseTable noise_table(HamiltonianKind kind, const ModelParams& p,
                              const DensityMatrix& rho0, double tau_max,
                              const IntegratorConfig& cfg = {},
                              int outer_points = 200) {
    p.validate();
    rho0.validate();
    if (tau_max <= 0) throw dimension_error("noise_table: tau_max must be > 0");
    if (outer_points < 8) throw dimension_error("noise_table: outer grid too coarse");

    const HilbertSpec spec = rho0.space;
    const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
    const Matrix quad_op =
        build_operator(OperatorKind::quadrature, spec, p.homodyne_phase).matrix;
    const Complex ph = std::exp(-iu * p.homodyne_phase);

    const int m = outer_points;
    const double h = tau_max / m;
    std::vector<double> tau(m + 1);
    for (int j = 0; j <= m; ++j) tau[j] = j * h;

    NoiseTable table;
    table.tau = tau;

    // forward pass: states on the outer grid plus M(t) on the fine substep grid
    HamiltonianModel model(kind, p, spec);
    detail::Rk4Stepper stepper(model, a, p.kappa);
    const double dt0 = detail::pick_dt(kind, p, cfg, spec.fock_cutoff);
    const long sub = std::max<long>(1, std::lround(std::ceil(h / dt0)));
    const double dt = h / double(sub);

    std::vector<Matrix> states;
    states.reserve(m + 1);
    std::vector<double> mean(m + 1, 0.0);
    {
        Matrix rho = rho0.matrix;
        states.push_back(rho);
        double acc = 0.0;
        double prev_q = 2.0 * (ph * Complex((a * rho).trace())).real();
        for (int j = 0; j < m; ++j) {
            for (long s = 0; s < sub; ++s) {
                const double t = tau[j] + double(s) * dt;
                stepper.step(t, dt, rho);
                const double q = 2.0 * (ph * Complex((a * rho).trace())).real();
                acc += 0.5 * dt * (prev_q + q);
                prev_q = q;
            }
            states.push_back(rho);
            // output-field normalization: a_out = sqrt(kappa) a, so the mean
            // homodyne record carries a factor kappa; only this normalization
            // makes the coherent-state variance collapse onto kappa*tau
            mean[j + 1] = p.kappa * acc;
        }
    }
    table.mean = mean;

    if (p.kappa == 0.0) {
        table.variance.assign(m + 1, 0.0);
        return table;
    }

    // inner-integral table: g_int[i][k] = int_{tau_i}^{tau_{i+k}} of the
    // correlator g(tau_i, t') = Tr[q_phi P_{tau_i -> t'}(e^{-i phi} a rho(tau_i)
    // + h.c.)] dt'. The correlator oscillates at the modulation frequency, so
    // the inner integral is accumulated on the fine propagation grid and only
    // checkpointed on the outer one.
    std::vector<std::vector<double>> g_int(m + 1);
    parallel_for(std::size_t(m + 1), [&](std::size_t i) {
        g_int[i].assign(std::size_t(m + 1) - i, 0.0);
        Matrix b = ph * (a * states[i]) + std::conj(ph) * (states[i] * a.adjoint());
        HamiltonianModel mdl(kind, p, spec);
        detail::Rk4Stepper stp(mdl, a, p.kappa);
        double acc = 0.0;
        double prev_g = Complex((quad_op * b).trace()).real();
        for (int j = int(i); j < m; ++j) {
            for (long s = 0; s < sub; ++s) {
                const double t = tau[j] + double(s) * dt;
                stp.step(t, dt, b);
                const double gval = Complex((quad_op * b).trace()).real();
                acc += 0.5 * dt * (prev_g + gval);
                prev_g = gval;
            }
            g_int[i][j + 1 - i] = acc;
        }
    });

    table.variance.assign(m + 1, 0.0);
    for (int j = 1; j <= m; ++j) {
        // outer trapezoid over 0 <= t <= tau_j of the exact-in-t' inner integral
        double tri = 0.0;
        for (int i = 0; i <= j; ++i) {
            const double wi = (i == 0 || i == j) ? 0.5 * h : h;
            tri += wi * g_int[i][j - i];
        }
        table.variance[j] =
            2.0 * p.kappa * p.kappa * tri + p.kappa * tau[j] - mean[j] * mean[j];
    }
    return table;
}

inline double noise_variance(HamiltonianKind kind, const ModelParams& p,
                             const DensityMatrix& rho0, double tau,
                             const IntegratorConfig& cfg = {},
                             int outer_points = 200) {
    return noise_table(kind, p, rho0, tau, cfg, outer_points).variance.back();
}

// ---- SNR --------------------------------------------------------------------

struct SnrOptions {
    bool coherent_noise = true;  // substitute kappa*tau for the variances
    int outer_points = 200;      // regression outer grid (coherent_noise=false)
    int fock_cutoff = 15;
};

// SNR(tau) = |M_+ - M_-| / sqrt(dM_+^2 + dM_-^2) for the two qubit
// preparations. The measured basis is sigma_x except for the dispersive
// comparison model, whose signal lives in sigma_z.
inline HomodyneResult snr(const ModelParams& p, HamiltonianKind kind,
                          const std::vector<double>& tau_grid,
                          const IntegratorConfig& cfg = {},
                          const SnrOptions& opt = {}) {
    p.validate();
    if (tau_grid.empty()) throw dimension_error("snr: empty tau grid");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (tau_grid[i] <= tau_grid[i - 1])
            throw dimension_error("snr: tau grid must ascend");
    const double tau_max = tau_grid.back();
    if (tau_max <= 0) throw dimension_error("snr: tau_max must be > 0");

    const HilbertSpec spec{opt.fock_cutoff};
    const Vector vac = fock_state(0, spec.fock_cutoff);
    const bool zbasis = (kind == HamiltonianKind::DispersiveDriven);
    const DensityMatrix rho_plus =
        DensityMatrix::pure(tensor(zbasis ? qubit_up() : qubit_plus(), vac), spec);
    const DensityMatrix rho_minus =
        DensityMatrix::pure(tensor(zbasis ? qubit_down() : qubit_minus(), vac), spec);

    HomodyneResult res;
    res.tau_grid = tau_grid;

    auto fill = [&](const DensityMatrix& rho0, std::vector<double>& mean,
                    std::vector<double>& var) {
        if (opt.coherent_noise) {
            Trajectory traj = evolve(kind, p, rho0, tau_max, cfg);
            auto m = mean_signal(traj, p);
            // rescale to the output-field normalization used by noise_table
            for (double& v : m) v *= std::sqrt(p.kappa);
            for (double tau : tau_grid) {
                mean.push_back(detail::interp(traj.obs.t, m, tau));
                var.push_back(p.kappa * tau);
            }
        } else {
            auto table = noise_table(kind, p, rho0, tau_max, cfg, opt.outer_points);
            for (double tau : tau_grid) {
                mean.push_back(detail::interp(table.tau, table.mean, tau));
                var.push_back(detail::interp(table.tau, table.variance, tau));
            }
        }
    };
    fill(rho_plus, res.mean_plus, res.var_plus);
    fill(rho_minus, res.mean_minus, res.var_minus);

    for (std::size_t j = 0; j < tau_grid.size(); ++j) {
        const double denom = std::sqrt(res.var_plus[j] + res.var_minus[j]);
        res.snr.push_back(
            (tau_grid[j] == 0.0 || denom == 0.0)
                ? 0.0
                : std::abs(res.mean_plus[j] - res.mean_minus[j]) / denom);
    }
    return res;
}

// Least-squares slope of log SNR against log tau inside [tau_lo, tau_hi].
inline ScalingFit fit_scaling(const HomodyneResult& result, double tau_lo,
                              double tau_hi) {
    if (result.tau_grid.empty() || tau_lo < result.tau_grid.front() ||
        tau_hi > result.tau_grid.back() || tau_lo >= tau_hi)
        throw dimension_error("fit_scaling: window must lie inside the tau grid");
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < result.tau_grid.size(); ++j) {
        const double tau = result.tau_grid[j];
        if (tau < tau_lo || tau > tau_hi) continue;
        if (result.snr[j] <= 0)
            throw dimension_error("fit_scaling: nonpositive SNR value in window");
        lx.push_back(std::log(tau));
        ly.push_back(std::log(result.snr[j]));
    }
    if (lx.size() < 8)
        throw dimension_error("fit_scaling: fewer than 8 points in window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(lx.size());
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sx += lx[k];
        sy += ly[k];
        sxx += lx[k] * lx[k];
        sxy += lx[k] * ly[k];
    }
    ScalingFit fit;
    fit.tau_lo = tau_lo;
    fit.tau_hi = tau_hi;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        const double r = ly[k] - (fit.slope * lx[k] + intercept);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

// Feasibility arithmetic of the dispersive comparison: the drive must satisfy
// kappa/(2 chi) < E/kappa < Delta/(sqrt(8) J_r).
inline DispersiveFeasibility dispersive_feasibility(const ModelParams& p) {
    p.validate();
    if (p.j_r <= 0)
        throw regime_error("dispersive_feasibility: j_r must be > 0");
    const double delta = p.omega_c - p.delta_h;
    if (delta == 0)
        throw regime_error("dispersive_feasibility: omega_c - delta_h must be nonzero");
    DispersiveFeasibility f;
    f.chi = p.j_r * p.j_r / delta;
    f.critical_drive_ratio = delta / (std::sqrt(8.0) * p.j_r);
    f.required_drive_ratio = p.kappa / (2.0 * f.chi);
    f.feasible = f.required_drive_ratio < f.critical_drive_ratio;
    return f;
}

}  // namespace twotone
