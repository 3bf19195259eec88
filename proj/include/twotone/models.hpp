#pragma once

// Parameter records and the Hamiltonian catalog for the two-tone modulated
// spin-photon coupling scheme: lab frame, exact rotating frame, the RWA /
// adiabatic branches, the Van Vleck effective Hamiltonians, the single-tone
// transverse scheme and the dispersive comparison model.
//
// All frequencies are angular, in one consistent unit (we use GHz-labelled
// inputs as-is; only ratios enter any result). Times are in the inverse unit.

#include "twotone/core.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>

namespace twotone {

struct ModelParams {
    double omega_c = 5.0;           // cavity frequency
    double delta_h = 0.0;           // qubit gradient splitting
    double j0 = 0.0;                // static exchange splitting
    double j_r = 0.05;              // coupling modulation amplitude
    double kappa = 0.025;           // cavity loss rate
    double omega_d = 0.0;           // single-tone modulation frequency
    double drive_e = 0.0;           // external resonant drive (dispersive scheme)
    double homodyne_phase = pi / 2; // phi; phi=pi/2 measures i(a^dag - a)

    double j_tilde() const { return j_r / 8.0; }

    void validate() const {
        if (omega_c <= 0) throw dimension_error("ModelParams: omega_c must be > 0");
        if (kappa < 0) throw dimension_error("ModelParams: kappa must be >= 0");
        if (j_r < 0) throw dimension_error("ModelParams: j_r must be >= 0");
        if (delta_h < 0) throw dimension_error("ModelParams: delta_h must be >= 0");
    }
};

// Physical inputs of the exchange-mediated coupling strength.
struct CouplingPhysical {
    double e_v_r = 0.0;   // energy scale e V_r
    double v_h = 0.0;     // barrier height
    double omega_0 = 0.0; // dot well frequency
    double omega_l = 0.0; // Larmor frequency
};

// J_r = e V_r / sinh(x), x = 16 V_h (w0^2 + 2 wL^2) / (w0^2 sqrt(w0^2 + wL^2)),
// hbar = 1.
inline double coupling_j_r(const CouplingPhysical& phys) {
    if (phys.omega_0 <= 0)
        throw regime_error("coupling_j_r: omega_0 must be > 0");
    const double w02 = phys.omega_0 * phys.omega_0;
    const double wl2 = phys.omega_l * phys.omega_l;
    const double x = 16.0 * phys.v_h * (w02 + 2.0 * wl2) / (w02 * std::sqrt(w02 + wl2));
    if (x <= 0)
        throw regime_error("coupling_j_r: sinh argument must be > 0, got " +
                           std::to_string(x));
    return phys.e_v_r / std::sinh(x);
}

enum class HamiltonianKind {
    LabTwoTone,
    RotTwoToneExact,
    RotEffH0,
    RwaDeltaBranch,
    RwaCavityMinusDeltaBranch,
    RwaCavityBranch,
    VanVleck,
    VanVleckFrame0,
    LabSingleTone,
    RotSingleToneRwa,
    DispersiveDriven,
};

inline std::string to_string(HamiltonianKind k) {
    switch (k) {
        case HamiltonianKind::LabTwoTone: return "lab_two_tone";
        case HamiltonianKind::RotTwoToneExact: return "rot_two_tone_exact";
        case HamiltonianKind::RotEffH0: return "rot_eff_h0";
        case HamiltonianKind::RwaDeltaBranch: return "rwa_delta_branch";
        case HamiltonianKind::RwaCavityMinusDeltaBranch: return "rwa_cavity_minus_delta_branch";
        case HamiltonianKind::RwaCavityBranch: return "rwa_cavity_branch";
        case HamiltonianKind::VanVleck: return "van_vleck";
        case HamiltonianKind::VanVleckFrame0: return "van_vleck_frame0";
        case HamiltonianKind::LabSingleTone: return "lab_single_tone";
        case HamiltonianKind::RotSingleToneRwa: return "rot_single_tone_rwa";
        case HamiltonianKind::DispersiveDriven: return "dispersive_driven";
    }
    return "unknown";
}

inline HamiltonianKind kind_from_string(const std::string& s) {
    for (auto k : {HamiltonianKind::LabTwoTone, HamiltonianKind::RotTwoToneExact,
                   HamiltonianKind::RotEffH0, HamiltonianKind::RwaDeltaBranch,
                   HamiltonianKind::RwaCavityMinusDeltaBranch,
                   HamiltonianKind::RwaCavityBranch, HamiltonianKind::VanVleck,
                   HamiltonianKind::VanVleckFrame0, HamiltonianKind::LabSingleTone,
                   HamiltonianKind::RotSingleToneRwa, HamiltonianKind::DispersiveDriven})
        if (to_string(k) == s) return k;
    throw dimension_error("unknown Hamiltonian kind '" + s + "'");
}

enum class Frame { Lab, Rotating, Unspecified };

inline Frame frame_of(HamiltonianKind k) {
    switch (k) {
        case HamiltonianKind::LabTwoTone:
        case HamiltonianKind::LabSingleTone:
            return Frame::Lab;
        default:
            return Frame::Rotating;
    }
}

inline bool is_time_dependent(HamiltonianKind k) {
    switch (k) {
        case HamiltonianKind::LabTwoTone:
        case HamiltonianKind::RotTwoToneExact:
        case HamiltonianKind::RwaDeltaBranch:
        case HamiltonianKind::RwaCavityMinusDeltaBranch:
        case HamiltonianKind::LabSingleTone:
            return true;
        default:
            return false;
    }
}

// Largest angular frequency a step-size bound must resolve for this kind.
// Never below the slow scales (kappa, j_r, drives) so static generators still
// get a sane default step.
inline double fastest_frequency(HamiltonianKind k, const ModelParams& p) {
    // The factor 4 keeps fixed-step integration of the otherwise-slow static
    // generators accurate enough to respect the positivity floor.
    double slow = 4.0 * std::max({p.kappa, p.j_r, p.drive_e, 1e-9 * p.omega_c});
    switch (k) {
        case HamiltonianKind::LabTwoTone:
        case HamiltonianKind::RotTwoToneExact:
            return std::max(2.0 * (p.omega_c + p.delta_h), slow);
        case HamiltonianKind::RwaDeltaBranch:
            return std::max(2.0 * p.delta_h, slow);
        case HamiltonianKind::RwaCavityMinusDeltaBranch:
            return std::max(2.0 * std::abs(p.omega_c - p.delta_h), slow);
        case HamiltonianKind::LabSingleTone:
            return std::max(p.omega_c + p.omega_d + p.delta_h, slow);
        case HamiltonianKind::RotSingleToneRwa:
            return std::max(p.delta_h + std::abs(p.omega_c - p.omega_d), slow);
        case HamiltonianKind::DispersiveDriven: {
            double chi = p.j_r * p.j_r / (p.omega_c - p.delta_h);
            return std::max(std::abs(chi), slow);
        }
        default:
            return slow;
    }
}

inline void require_vanvleck_window(const ModelParams& p) {
    const double jt = p.j_tilde();
    if (!(p.delta_h > jt && p.delta_h < p.omega_c - jt) || p.delta_h == p.omega_c)
        throw regime_error(
            "Van Vleck effective Hamiltonian requires delta_h inside (" +
            std::to_string(jt) + ", " + std::to_string(p.omega_c - jt) +
            "), got " + std::to_string(p.delta_h));
}

// Sideband decomposition of the exact rotating-frame two-tone Hamiltonian:
// H(t) = H0 + sum_{n,k} H_{n,k} exp{2i(n delta_h + k omega_c) t},
// with H_{-n,-k} = H_{n,k}^dag and H_{0,0} = 0. Keys are (n_delta_h, n_cavity).
struct VanVleckComponents {
    Operator h0;
    std::map<std::pair<int, int>, Operator> sidebands;
};

inline VanVleckComponents vanvleck_components(const ModelParams& p,
                                              const HilbertSpec& spec) {
    p.validate();
    spec.validate();
    const double c = p.j_r / 4.0;
    const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
    const Matrix ad = a.adjoint();
    const Matrix x = a + ad;
    const Matrix sx = build_operator(OperatorKind::pauli_x, spec).matrix;
    const Matrix sp = build_operator(OperatorKind::sigma_plus, spec).matrix;
    const Matrix sm = build_operator(OperatorKind::sigma_minus, spec).matrix;

    VanVleckComponents out;
    out.h0 = Operator{c * (sx * x), spec};
    auto put = [&](int n, int k, const Matrix& m) {
        out.sidebands[{n, k}] = Operator{m, spec};
        out.sidebands[{-n, -k}] = Operator{m.adjoint(), spec};
    };
    out.sidebands[{0, 0}] =
        Operator{Matrix::Zero(spec.total_dim(), spec.total_dim()), spec};
    put(1, 0, c * (x * sp));
    put(0, 1, c * (sx * ad));
    put(1, 1, c * (sp * ad));
    put(-1, 1, c * (sm * ad));
    return out;
}

namespace detail {

// Static H0 = (J_r/4) sigma_x (a + a^dag).
inline Matrix eff_h0(const ModelParams& p, const HilbertSpec& spec) {
    const Matrix x = build_operator(OperatorKind::annihilation, spec).matrix +
                     build_operator(OperatorKind::creation, spec).matrix;
    return (p.j_r / 4.0) * (build_operator(OperatorKind::pauli_x, spec).matrix * x);
}

// Removes the identity component (global energy offset); the closed-form
// effective Hamiltonians carry none.
inline Matrix traceless(const Matrix& m) {
    return m - (m.trace() / double(m.rows())) * Matrix::Identity(m.rows(), m.cols());
}

inline Matrix vanvleck_commutator_sum(const ModelParams& p, const HilbertSpec& spec) {
    // Products of truncated ladder operators corrupt the top Fock levels, so
    // assemble on a padded cutoff and project back.
    HilbertSpec padded{spec.fock_cutoff + 2};
    auto comps = vanvleck_components(p, padded);
    Matrix h = comps.h0.matrix;
    for (const auto& [nk, op] : comps.sidebands) {
        const auto [n, k] = nk;
        if (n == 0 && k == 0) continue;
        const double denom = 2.0 * n * p.delta_h + 2.0 * k * p.omega_c;
        const Matrix& hnk = op.matrix;
        const Matrix& hmnk = comps.sidebands.at({-n, -k}).matrix;
        h -= 0.5 * (hmnk * hnk - hnk * hmnk) / denom;
    }
    // project qubit (x) padded-cavity down to qubit (x) cavity, then drop the
    // global energy offset (the closed form carries none)
    const int nc = spec.fock_cutoff;
    const int npad = padded.fock_cutoff;
    Matrix out(spec.total_dim(), spec.total_dim());
    for (int qi = 0; qi < 2; ++qi)
        for (int qj = 0; qj < 2; ++qj)
            out.block(qi * nc, qj * nc, nc, nc) =
                h.block(qi * npad, qj * npad, nc, nc);
    return traceless(out);
}

inline Matrix vanvleck_closed_form(const ModelParams& p, const HilbertSpec& spec,
                                   bool frame0) {
    const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
    const Matrix x = a + a.adjoint();
    const Matrix n_op = build_operator(OperatorKind::number, spec).matrix;
    const Matrix id = Matrix::Identity(spec.total_dim(), spec.total_dim());
    const Matrix sz = build_operator(OperatorKind::pauli_z, spec).matrix;
    const double c2 = (p.j_r / 4.0) * (p.j_r / 4.0);
    const double dh = p.delta_h;
    const double w = p.omega_c;
    const double disp = dh / (w * w - dh * dh);

    // (a+a^dag)^2 etc. on a padded space, projected, so matrix elements match
    // the untruncated algebra on the kept levels (as the commutator sum does).
    HilbertSpec padded{spec.fock_cutoff + 2};
    const Matrix ap = build_operator(OperatorKind::annihilation, padded).matrix;
    const Matrix xp = ap + ap.adjoint();
    Matrix x2p = xp * xp;
    const int nc = spec.fock_cutoff;
    const int npad = padded.fock_cutoff;
    Matrix x2(spec.total_dim(), spec.total_dim());
    for (int qi = 0; qi < 2; ++qi)
        for (int qj = 0; qj < 2; ++qj)
            x2.block(qi * nc, qj * nc, nc, nc) =
                x2p.block(qi * npad, qj * npad, nc, nc);

    Matrix corr = x2 / (2.0 * dh) - disp * (n_op + 0.5 * id);
    if (frame0) corr += -x / dh + disp * (id + x2);
    Matrix h = eff_h0(p, spec) + c2 * (corr * sz);
    return traceless(h);
}

}  // namespace detail

// Static Van Vleck effective Hamiltonian, valid for
// j_tilde < delta_h < omega_c - j_tilde. frame0 = true folds in the t=0 frame
// correction terms.
inline Operator vanvleck_effective(const ModelParams& p, const HilbertSpec& spec,
                                   bool frame0 = false) {
    p.validate();
    spec.validate();
    require_vanvleck_window(p);
    return {detail::vanvleck_closed_form(p, spec, frame0), spec};
}

// Same object, assembled from the sideband commutator sum instead of the
// closed form; the two must agree to machine precision.
inline Operator vanvleck_effective_commutator_sum(const ModelParams& p,
                                                  const HilbertSpec& spec) {
    p.validate();
    spec.validate();
    require_vanvleck_window(p);
    return {detail::vanvleck_commutator_sum(p, spec), spec};
}

// ---- Hamiltonian evaluation -------------------------------------------------

// Caches the static operator blocks of one kind so H(t) assembly inside an
// integrator costs a few scalar-weighted matrix sums.
class HamiltonianModel {
public:
    HamiltonianModel(HamiltonianKind kind, const ModelParams& p, const HilbertSpec& spec)
        : kind_(kind), p_(p), spec_(spec) {
        p.validate();
        spec.validate();
        const Matrix a = build_operator(OperatorKind::annihilation, spec).matrix;
        const Matrix ad = a.adjoint();
        const Matrix x = a + ad;
        const Matrix n_op = build_operator(OperatorKind::number, spec).matrix;
        const Matrix sx = build_operator(OperatorKind::pauli_x, spec).matrix;
        const Matrix sz = build_operator(OperatorKind::pauli_z, spec).matrix;
        const Matrix sp = build_operator(OperatorKind::sigma_plus, spec).matrix;
        const Matrix sm = build_operator(OperatorKind::sigma_minus, spec).matrix;
        const double jr = p.j_r;

        switch (kind) {
            case HamiltonianKind::LabTwoTone:
                static_ = p.omega_c * n_op + 0.5 * p.delta_h * sz + 0.5 * p.j0 * sx;
                drive_ = sx * x;
                break;
            case HamiltonianKind::RotTwoToneExact:
                static_ = Matrix::Zero(spec.total_dim(), spec.total_dim());
                pd_ = sp * ad;  // sigma_+ a^dag
                pa_ = sp * a;
                md_ = sm * ad;
                ma_ = sm * a;
                break;
            case HamiltonianKind::RotEffH0:
                static_ = detail::eff_h0(p, spec);
                break;
            case HamiltonianKind::RwaDeltaBranch:
                static_ = detail::eff_h0(p, spec);
                side_ = (jr / 4.0) * (x * sp);  // + h.c. at -2 delta_h
                break;
            case HamiltonianKind::RwaCavityMinusDeltaBranch:
                static_ = detail::eff_h0(p, spec);
                side_ = (jr / 4.0) * (sm * ad);
                break;
            case HamiltonianKind::RwaCavityBranch:
                static_ = detail::eff_h0(p, spec) + (jr / 4.0) * (sm * ad + sp * a);
                break;
            case HamiltonianKind::VanVleck:
                require_vanvleck_window(p);
                static_ = detail::vanvleck_closed_form(p, spec, false);
                break;
            case HamiltonianKind::VanVleckFrame0:
                require_vanvleck_window(p);
                static_ = detail::vanvleck_closed_form(p, spec, true);
                break;
            case HamiltonianKind::LabSingleTone:
                static_ = 0.5 * p.j0 * sx + 0.5 * p.delta_h * sz + p.omega_c * n_op;
                drive_ = sx * x;
                break;
            case HamiltonianKind::RotSingleToneRwa:
                static_ = 0.5 * p.delta_h * sz + (p.omega_c - p.omega_d) * n_op +
                          0.5 * jr * (sx * x);
                break;
            case HamiltonianKind::DispersiveDriven: {
                if (p.omega_c == p.delta_h)
                    throw regime_error("DispersiveDriven: omega_c - delta_h must be nonzero");
                const double chi = jr * jr / (p.omega_c - p.delta_h);
                static_ = chi * (sz * n_op) + p.drive_e * x;
                break;
            }
        }
    }

    HamiltonianKind kind() const { return kind_; }
    const HilbertSpec& space() const { return spec_; }
    const ModelParams& params() const { return p_; }

    void eval(double t, Matrix& out) const {
        switch (kind_) {
            case HamiltonianKind::LabTwoTone:
                out = static_ +
                      (p_.j_r * std::cos(p_.omega_c * t) * std::cos(p_.delta_h * t)) *
                          drive_;
                break;
            case HamiltonianKind::RotTwoToneExact: {
                const double c =
                    p_.j_r * std::cos(p_.omega_c * t) * std::cos(p_.delta_h * t);
                const Complex zq = std::exp(iu * (p_.delta_h * t));
                const Complex zc = std::exp(iu * (p_.omega_c * t));
                out = c * (zq * zc * pd_ + zq * std::conj(zc) * pa_ +
                           std::conj(zq) * zc * md_ + std::conj(zq) * std::conj(zc) * ma_);
                break;
            }
            case HamiltonianKind::RwaDeltaBranch: {
                const Complex z = std::exp(iu * (2.0 * p_.delta_h * t));
                out = static_ + z * side_ + std::conj(z) * side_.adjoint();
                break;
            }
            case HamiltonianKind::RwaCavityMinusDeltaBranch: {
                const Complex z = std::exp(iu * (2.0 * (p_.omega_c - p_.delta_h) * t));
                out = static_ + z * side_ + std::conj(z) * side_.adjoint();
                break;
            }
            case HamiltonianKind::LabSingleTone:
                out = static_ + (p_.j_r * std::cos(p_.omega_d * t)) * drive_;
                break;
            default:
                out = static_;
                break;
        }
    }

    Matrix at(double t) const {
        Matrix h;
        eval(t, h);
        return h;
    }

private:
    HamiltonianKind kind_;
    ModelParams p_;
    HilbertSpec spec_;
    Matrix static_, drive_, side_;
    Matrix pd_, pa_, md_, ma_;
};

inline Operator hamiltonian_at(HamiltonianKind kind, const ModelParams& p, double t,
                               const HilbertSpec& spec) {
    if (t < 0) throw dimension_error("hamiltonian_at: t must be >= 0");
    HamiltonianModel model(kind, p, spec);
    return {model.at(t), spec};
}

// ---- regime classification --------------------------------------------------

enum class Regime {
    DegenerateZero,
    AdiabaticLow,
    BoundaryLow,
    HighFrequency,
    BoundaryHigh,
    AdiabaticHigh,
};

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::DegenerateZero: return "degenerate_zero";
        case Regime::AdiabaticLow: return "adiabatic_low";
        case Regime::BoundaryLow: return "boundary_low";
        case Regime::HighFrequency: return "high_frequency";
        case Regime::BoundaryHigh: return "boundary_high";
        case Regime::AdiabaticHigh: return "adiabatic_high";
    }
    return "unknown";
}

struct RegimeReport {
    Regime regime;
    std::string error_order;
    bool resonant = false;
};

namespace detail {

// Floquet resonance scan: |n1 dh + n2 wc + n3 (wc+dh) + n4 (wc-dh)| < j_r/4
// for some nonzero integer vector with pairwise |n_i - n_j| <= 1. The pairwise
// constraint forces all n_i into {m, m+1} for a single m.
inline bool floquet_resonant(const ModelParams& p, int index_bound) {
    const double freqs[4] = {p.delta_h, p.omega_c, p.omega_c + p.delta_h,
                             p.omega_c - p.delta_h};
    const double thresh = p.j_r / 4.0;
    for (int m = -index_bound; m < index_bound; ++m) {
        for (int mask = 0; mask < 16; ++mask) {
            double sum = 0;
            bool all_zero = true;
            for (int i = 0; i < 4; ++i) {
                const int n = m + ((mask >> i) & 1);
                if (n != 0) all_zero = false;
                sum += n * freqs[i];
            }
            if (!all_zero && std::abs(sum) < thresh) return true;
        }
    }
    return false;
}

}  // namespace detail

inline RegimeReport classify_regime(const ModelParams& p, int index_bound = 3) {
    p.validate();
    if (p.delta_h > p.omega_c)
        throw regime_error("classify_regime: delta_h must lie in [0, omega_c]");
    const double jt = p.j_tilde();
    RegimeReport r;
    r.resonant = detail::floquet_resonant(p, index_bound);
    if (p.delta_h == 0.0) {
        r.regime = Regime::DegenerateZero;
        r.error_order = "O(Jt^2/omega_c)";
    } else if (p.delta_h < jt) {
        r.regime = Regime::AdiabaticLow;
        r.error_order = "O(delta_h)";
    } else if (p.delta_h == jt) {
        r.regime = Regime::BoundaryLow;
        r.error_order = "unbounded (no further RWA or adiabatic approximation)";
    } else if (p.delta_h < p.omega_c - jt) {
        r.regime = Regime::HighFrequency;
        r.error_order = (p.delta_h <= 0.5 * p.omega_c)
                            ? "O(Jt^2/delta_h)"
                            : "O(Jt^2/(omega_c-delta_h))";
    } else if (p.delta_h == p.omega_c - jt) {
        r.regime = Regime::BoundaryHigh;
        r.error_order = "unbounded (no further RWA or adiabatic approximation)";
    } else if (p.delta_h < p.omega_c) {
        r.regime = Regime::AdiabaticHigh;
        r.error_order = "O(omega_c-delta_h) + O(Jt)";
    } else {  // delta_h == omega_c
        r.regime = Regime::AdiabaticHigh;
        r.error_order = "O(Jt^2/omega_c) + O(Jt)";
    }
    return r;
}

// Dispersive shift chi = J_r^2 / Delta with Delta = omega_c - delta_h.
inline double dispersive_chi(const ModelParams& p) {
    const double delta = p.omega_c - p.delta_h;
    if (delta == 0)
        throw regime_error("dispersive_chi: omega_c - delta_h must be nonzero");
    return p.j_r * p.j_r / delta;
}

}  // namespace twotone
