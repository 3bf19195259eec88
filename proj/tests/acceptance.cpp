// Acceptance gate: end-to-end physics and infrastructure checks, one printed
// pass/fail line per criterion. Exits nonzero if any criterion fails.
//
//  1. steady-state cavity displacement (effective and exact two-tone models)
//  2. exact QND point at zero qubit splitting
//  3. two-tone sweet spot beats the single-tone scheme across the sweep grid
//  4. regression noise of a driven uncoupled cavity collapses onto shot noise
//  5. SNR power-law windows (3/2, 1/2 longitudinal; 5/2 dispersive)
//  6. static effective Hamiltonian: assembly identity and error scaling
//  7. vacuum-Rabi period agreement between lab and RWA single-tone models
//  8. structural suite: state invariants, integrator order, Wigner
//     normalization, bit-reproducible harness runs
//  9. dispersive feasibility arithmetic

#include "twotone/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace twotone;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, bool ok, const std::string& what,
            const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", index,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

ModelParams fig2_params(double delta_h) {
    ModelParams p;
    p.omega_c = 5.0;
    p.j_r = 0.05;
    p.kappa = 0.025;
    p.delta_h = delta_h;
    return p;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k)
        out[k] = lo * std::pow(hi / lo, k / double(n - 1));
    return out;
}

DensityMatrix plus_vacuum(int cutoff) {
    HilbertSpec spec{cutoff};
    return DensityMatrix::pure(tensor(qubit_plus(), fock_state(0, cutoff)),
                               spec);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---- criterion 1 ------------------------------------------------------------

void criterion_steady_displacement() {
    const double target = 1.0;  // J_r / (2 kappa) for the fig.-2 parameters
    ModelParams p = fig2_params(2.5);
    const double t_final = 12.0 / p.kappa;

    IntegratorConfig cfg;
    cfg.store_stride = 1 << 20;
    bool ok = true;
    std::string detail;
    for (const Vector& prep : {qubit_plus(), qubit_minus()}) {
        HilbertSpec spec{12};
        auto rho0 = DensityMatrix::pure(tensor(prep, fock_state(0, 12)), spec);
        auto traj = evolve(HamiltonianKind::RotEffH0, p, rho0, t_final, cfg);
        const double im = std::abs(traj.obs.im_a.back());
        ok = ok && std::abs(im - target) <= 0.005 * target;
        detail += fmt("|Im<a>|=%.5f ", im);
    }

    auto traj = evolve(HamiltonianKind::RotTwoToneExact, p, plus_vacuum(15),
                       t_final, cfg);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < traj.obs.t.size(); ++k)
        if (traj.obs.t[k] >= 0.75 * t_final) {
            acc += traj.obs.im_a[k];
            ++count;
        }
    const double averaged = std::abs(acc / double(count));
    ok = ok && std::abs(averaged - target) <= 0.05 * target;
    detail += fmt("two-tone avg=%.4f vs %.1f", averaged, target);
    report(1, ok, "steady-state displacement J_r/(2 kappa)", detail);
}

// ---- criterion 2 ------------------------------------------------------------

void criterion_exact_qnd_point() {
    ModelParams p = fig2_params(0.0);
    const double qnd = detail::qnd_minimum_at(HamiltonianKind::RotTwoToneExact,
                                              p, 15, 2.0 / p.kappa, {});
    const bool ok = std::abs(qnd - 1.0) <= 1e-8;
    report(2, ok, "exact QND point at delta_h = 0",
           fmt("min overlap deviates by %.2e", std::abs(qnd - 1.0)));
}

// ---- criterion 3 ------------------------------------------------------------

void criterion_sweet_spot_vs_single_tone() {
    const double t_final = 2.0 / 0.025;
    bool ok = true;
    std::string detail;

    // sweet spot itself
    {
        ModelParams p = fig2_params(2.5);
        const double qnd = detail::qnd_minimum_at(
            HamiltonianKind::RotTwoToneExact, p, 15, t_final, {});
        ok = ok && qnd >= 0.99;
        detail += fmt("sweet spot=%.5f ", qnd);
    }

    // sweep grid: two-tone everywhere, single-tone where the comparison is
    // required (delta_h >= omega_c/20)
    IntegratorConfig coarse;  // the single-tone lab model is stiff; its QND
    coarse.oscillation_resolution = 12;  // minimum converges well before the
    coarse.check_invariants = false;     // default resolution (checked at 40
                                         // elsewhere); invariants are enforced
                                         // in criterion 8
    double worst_margin = 1.0;
    for (int k = 1; k <= 10; ++k) {
        const double dh = 0.05 * k;
        ModelParams p = fig2_params(dh);
        const double two = detail::qnd_minimum_at(
            HamiltonianKind::RotTwoToneExact, p, 15, t_final, {});
        if (dh >= 0.25) {
            ModelParams q = p;
            q.omega_d = q.omega_c;
            const double single = detail::qnd_minimum_at(
                HamiltonianKind::LabSingleTone, q, 15, t_final, coarse);
            ok = ok && two >= single;
            worst_margin = std::min(worst_margin, two - single);
        }
    }
    detail += fmt("min(two-tone - single-tone)=%.4f over delta_h in [0.25,0.5]",
                  worst_margin);
    report(3, ok, "two-tone sweet spot and single-tone comparison", detail);
}

// ---- criterion 4 ------------------------------------------------------------

void criterion_coherent_noise() {
    HilbertSpec spec{12};
    ModelParams p = fig2_params(2.5);
    p.j_r = 0.0;  // no qubit pull: the driven cavity stays coherent
    p.drive_e = 0.5 * p.kappa;
    p.homodyne_phase = 0.0;
    auto rho0 =
        DensityMatrix::pure(tensor(qubit_up(), fock_state(0, 12)), spec);
    const double tau_max = 2.0 / p.kappa;
    auto table = noise_table(HamiltonianKind::DispersiveDriven, p, rho0,
                             tau_max, {}, 80);
    bool ok = true;
    std::string detail;
    for (int idx : {20, 40, 80}) {  // tau = {0.5, 1, 2} / kappa
        const double want = p.kappa * table.tau[idx];
        const double got = table.variance[idx];
        ok = ok && std::abs(got - want) <= 0.01 * want;
        detail += fmt("kt=%.1f: var/kt=%.4f ", p.kappa * table.tau[idx],
                      got / want);
    }
    report(4, ok, "driven-cavity regression noise equals kappa*tau", detail);
}

// ---- criterion 5 ------------------------------------------------------------

void criterion_snr_scaling() {
    bool ok = true;
    std::string detail;
    {
        ModelParams p = fig2_params(2.5);
        SnrOptions opt;
        opt.fock_cutoff = 12;
        IntegratorConfig cfg;
        cfg.oscillation_resolution = 400;
        auto res = snr(p, HamiltonianKind::RotEffH0,
                       logspace(0.015 / p.kappa, 170.0 / p.kappa, 90), cfg,
                       opt);
        auto early = fit_scaling(res, 0.02 / p.kappa, 0.2 / p.kappa);
        // On kappa*tau in [5, 20] the integrated signal still carries the
        // cavity ring-up offset: M ~ tau - (2/kappa)(1 - e^{-kappa tau/2}),
        // so the local log-log slope exceeds 1/2 by exactly the analytic
        // transient correction. Pin the computed slope to that closed form,
        // then verify the bare 1/2 law on a window where the asymptote holds.
        auto mid = fit_scaling(res, 5.0 / p.kappa, 20.0 / p.kappa);
        HomodyneResult oracle = res;
        for (std::size_t k = 0; k < oracle.tau_grid.size(); ++k) {
            const double x = p.kappa * oracle.tau_grid[k];
            oracle.snr[k] =
                (x - 2.0 * (1.0 - std::exp(-0.5 * x))) / std::sqrt(x);
        }
        auto mid_oracle = fit_scaling(oracle, 5.0 / p.kappa, 20.0 / p.kappa);
        auto late = fit_scaling(res, 40.0 / p.kappa, 160.0 / p.kappa);
        ok = ok && std::abs(early.slope - 1.5) <= 0.2 &&
             std::abs(mid.slope - mid_oracle.slope) <= 0.05 &&
             std::abs(late.slope - 0.5) <= 0.1;
        detail += fmt("longitudinal slopes %.3f / %.3f ", early.slope,
                      late.slope);
        detail += fmt("(transient window %.3f vs analytic %.3f) ", mid.slope,
                      mid_oracle.slope);
    }
    {
        ModelParams p = fig2_params(2.5);
        p.drive_e = 0.5 * p.kappa;
        p.homodyne_phase = 0.0;
        SnrOptions opt;
        opt.fock_cutoff = 12;
        IntegratorConfig cfg;
        cfg.oscillation_resolution = 2000;
        auto res = snr(p, HamiltonianKind::DispersiveDriven,
                       logspace(0.02 / p.kappa, 0.3 / p.kappa, 30), cfg, opt);
        auto fit = fit_scaling(res, 0.02 / p.kappa, 0.2 / p.kappa);
        ok = ok && std::abs(fit.slope - 2.5) <= 0.3;
        detail += fmt("dispersive slope %.3f", fit.slope);
    }
    report(5, ok, "SNR power-law exponents 3/2, 1/2 and 5/2", detail);
}

// ---- criterion 6 ------------------------------------------------------------

void criterion_effective_hamiltonian() {
    bool ok = true;
    std::string detail;

    // assembly identity: sideband commutator sum vs closed form
    HilbertSpec spec{8};
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double frac = 0.08 + (0.92 - 0.08) * k / 9.0;
        auto p = fig2_params(frac * 5.0);
        auto closed = vanvleck_effective(p, spec, false);
        auto sum = vanvleck_effective_commutator_sum(p, spec);
        worst = std::max(worst, (closed.matrix - sum.matrix).norm());
    }
    ok = ok && worst <= 1e-12;
    detail += fmt("max Frobenius diff %.2e ", worst);

    // second-order error scaling: full-vs-effective <sigma_z> deviation must
    // fall 4x when the modulation amplitude is halved
    auto deviation = [](double jr) {
        ModelParams p;
        p.omega_c = 5.0;
        p.delta_h = 1.0;
        p.kappa = 0.1;
        p.j_r = jr;
        IntegratorConfig cfg;
        cfg.store_stride = 1 << 20;
        auto rho0 = plus_vacuum(12);
        auto full = evolve(HamiltonianKind::RotTwoToneExact, p, rho0,
                           2.0 / p.kappa, cfg);
        auto eff =
            evolve(HamiltonianKind::VanVleck, p, rho0, 2.0 / p.kappa, cfg);
        double dev = 0.0;
        for (std::size_t k = 0; k < full.obs.t.size(); ++k)
            dev = std::max(dev,
                           std::abs(full.obs.sz[k] -
                                    detail::interp(eff.obs.t, eff.obs.sz,
                                                   full.obs.t[k])));
        return dev;
    };
    const double ratio = deviation(0.2) / deviation(0.1);
    ok = ok && std::abs(ratio - 4.0) <= 0.3 * 4.0;
    detail += fmt("deviation ratio on J_r/2: %.3f", ratio);
    report(6, ok, "effective-Hamiltonian identity and error scaling", detail);
}

// ---- criterion 7 ------------------------------------------------------------

// First downward zero crossing of <sigma_z> (linear interpolation); the
// excitation-exchange period is four times that.
double rabi_period(const Trajectory& traj) {
    const auto& t = traj.obs.t;
    const auto& sz = traj.obs.sz;
    for (std::size_t k = 1; k < t.size(); ++k)
        if (sz[k - 1] > 0.0 && sz[k] <= 0.0) {
            const double frac = sz[k - 1] / (sz[k - 1] - sz[k]);
            return 4.0 * (t[k - 1] + frac * (t[k] - t[k - 1]));
        }
    return 0.0;
}

void criterion_vacuum_rabi() {
    ModelParams p;
    p.omega_c = 5.0;
    p.j_r = 0.05;  // 0.01 * omega_c
    p.kappa = 0.0;
    p.delta_h = 1.0;
    p.omega_d = p.omega_c - p.delta_h;
    const double target = 2.0 * pi / p.j_r;

    HilbertSpec spec{4};
    auto rho0 =
        DensityMatrix::pure(tensor(qubit_up(), fock_state(0, 4)), spec);
    IntegratorConfig cfg;
    cfg.store_stride = 1 << 20;
    bool ok = true;
    std::string detail;
    for (auto kind :
         {HamiltonianKind::LabSingleTone, HamiltonianKind::RotSingleToneRwa}) {
        auto traj = evolve(kind, p, rho0, 0.4 * target, cfg);
        const double period = rabi_period(traj);
        ok = ok && period > 0.0 && std::abs(period - target) <= 0.02 * target;
        detail += fmt("%.4f ", period / target);
    }
    report(7, ok, "vacuum-Rabi period 2 pi / J_r, lab vs RWA",
           detail + "(period / target)");
}

// ---- criterion 8 ------------------------------------------------------------

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("twotone_accept_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_structural() {
    bool ok = true;
    std::string detail;

    // state invariants on every stored state of a representative model set
    struct Run {
        HamiltonianKind kind;
        ModelParams p;
        int cutoff;
        double t_final;
    };
    ModelParams fig1 = fig2_params(0.75);
    fig1.j_r = 0.25;
    fig1.kappa = 0.125;
    ModelParams vv = fig1;
    vv.delta_h = 1.0;
    ModelParams single = fig2_params(0.25);
    single.omega_d = single.omega_c;
    ModelParams disp = fig2_params(2.5);
    disp.drive_e = 0.5 * disp.kappa;
    disp.homodyne_phase = 0.0;
    const std::vector<Run> runs = {
        {HamiltonianKind::RotTwoToneExact, fig1, 10, 16.0 / fig1.kappa},
        {HamiltonianKind::RotEffH0, fig1, 10, 16.0 / fig1.kappa},
        {HamiltonianKind::VanVleck, vv, 10, 16.0 / vv.kappa},
        {HamiltonianKind::RwaCavityBranch, vv, 10, 16.0 / vv.kappa},
        {HamiltonianKind::LabSingleTone, single, 10, 0.5 / single.kappa},
        {HamiltonianKind::DispersiveDriven, disp, 10, 2.0 / disp.kappa},
    };
    std::size_t checked = 0;
    Trajectory fig1_traj;  // reused for the Wigner normalization check
    try {
        for (const auto& r : runs) {
            auto traj =
                evolve(r.kind, r.p, plus_vacuum(r.cutoff), r.t_final, {});
            for (const auto& rho : traj.states) {
                rho.validate(1e-10, 1e-8, -1e-7);
                ++checked;
            }
            if (r.kind == HamiltonianKind::RotTwoToneExact)
                fig1_traj = std::move(traj);
        }
    } catch (const std::exception& e) {
        ok = false;
        detail += std::string("invariant breach: ") + e.what() + " ";
    }
    detail += fmt("%.0f states validated; ", double(checked));

    // fixed-step integrator converges at fourth order
    {
        ModelParams p = fig2_params(0.75);
        auto rho0 = plus_vacuum(6);
        auto final_state = [&](int res) {
            IntegratorConfig cfg;
            cfg.oscillation_resolution = res;
            cfg.store_stride = 1 << 20;
            return evolve(HamiltonianKind::RotTwoToneExact, p, rho0, 4.0, cfg)
                .states.back()
                .matrix;
        };
        auto ref = final_state(640);
        const double e1 = (final_state(20) - ref).norm();
        const double e2 = (final_state(40) - ref).norm();
        const double e3 = (final_state(80) - ref).norm();
        const double order =
            0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
        ok = ok && std::abs(order - 4.0) <= 0.3;
        detail += fmt("rk4 order %.2f; ", order);
    }

    // Wigner normalization: vacuum, coherent and an evolved mixed state
    {
        WignerGridSpec gs;
        gs.x_min = gs.p_min = -4.0;
        gs.x_max = gs.p_max = 4.0;
        gs.nx = gs.np = 61;
        auto norm_of = [&](const Matrix& rho) {
            return wigner(rho, gs).normalization();
        };
        Matrix vac = Matrix::Zero(10, 10);
        vac(0, 0) = 1.0;
        Vector coh = coherent_state(Complex(1.0, 0.5), 12);
        Matrix coh_rho = coh * coh.adjoint();
        const double n1 = norm_of(vac);
        const double n2 = norm_of(coh_rho);
        const double n3 =
            norm_of(reduce(fig1_traj.states.back(), Subsystem::cavity));
        ok = ok && std::abs(n1 - 1.0) <= 0.02 && std::abs(n2 - 1.0) <= 0.02 &&
             std::abs(n3 - 1.0) <= 0.02;
        detail += fmt("Wigner norms %.4f/%.4f/%.4f; ", n1, n2, n3);
    }

    // harness runs are bit-reproducible from their own manifests
    {
        TempDir a("a"), b("b");
        RunConfig cfg;
        cfg.scenario = Scenario::custom;
        cfg.params = fig2_params(0.75);
        cfg.params.j_r = 0.25;
        cfg.params.kappa = 0.125;
        cfg.fock_cutoff = 8;
        cfg.t_final = 8.0;
        cfg.kinds = {HamiltonianKind::RotTwoToneExact};
        cfg.output_dir = a.path.string();
        auto first = run_scenario(cfg);

        auto cfg2 = parse_config_file((a.path / "manifest.txt").string());
        cfg2.output_dir = b.path.string();
        auto second = run_scenario(cfg2);

        bool same = first.size() == second.size();
        for (std::size_t k = 0; same && k < first.size(); ++k)
            same = slurp(first[k]) == slurp(second[k]) &&
                   fs::path(first[k]).filename() ==
                       fs::path(second[k]).filename();
        ok = ok && same;
        detail += same ? "reruns byte-identical" : "rerun mismatch";
    }
    report(8, ok, "invariants, rk4 order, Wigner norm, reproducibility",
           detail);
}

// ---- criterion 9 ------------------------------------------------------------

void criterion_feasibility() {
    auto f = dispersive_feasibility(fig2_params(2.5));
    const bool ok = std::abs(f.critical_drive_ratio - 17.68) <= 0.01 &&
                    std::abs(f.chi - 0.001) <= 1e-6;
    report(9, ok, "dispersive feasibility arithmetic",
           fmt("critical ratio %.4f, chi %.6f GHz", f.critical_drive_ratio,
               f.chi));
}

}  // namespace

int main() {
    criterion_steady_displacement();
    criterion_exact_qnd_point();
    criterion_sweet_spot_vs_single_tone();
    criterion_coherent_noise();
    criterion_snr_scaling();
    criterion_effective_hamiltonian();
    criterion_vacuum_rabi();
    criterion_structural();
    criterion_feasibility();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
