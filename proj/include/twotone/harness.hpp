#pragma once

// Configuration ingestion, scenario execution (trajectories, detuning sweeps,
// Wigner/SNR exports) and plot-data serialization with a reproducibility
// manifest.

#include "twotone/core.hpp"
#include "twotone/measurement.hpp"
#include "twotone/models.hpp"
#include "twotone/observables.hpp"
#include "twotone/parallel.hpp"
#include "twotone/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace twotone {

struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Scenario {
    fig1_trajectory,
    fig2_qnd_sweep,
    fig3_snr_sweep,
    fig4_qnd_sweep_wide,
    fig5_snr_sweep_wide,
    transverse_rabi,
    dispersive_compare,
    custom,
};

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::fig1_trajectory: return "fig1_trajectory";
        case Scenario::fig2_qnd_sweep: return "fig2_qnd_sweep";
        case Scenario::fig3_snr_sweep: return "fig3_snr_sweep";
        case Scenario::fig4_qnd_sweep_wide: return "fig4_qnd_sweep_wide";
        case Scenario::fig5_snr_sweep_wide: return "fig5_snr_sweep_wide";
        case Scenario::transverse_rabi: return "transverse_rabi";
        case Scenario::dispersive_compare: return "dispersive_compare";
        case Scenario::custom: return "custom";
    }
    return "unknown";
}

inline Scenario scenario_from_string(const std::string& s) {
    for (auto v : {Scenario::fig1_trajectory, Scenario::fig2_qnd_sweep,
                   Scenario::fig3_snr_sweep, Scenario::fig4_qnd_sweep_wide,
                   Scenario::fig5_snr_sweep_wide, Scenario::transverse_rabi,
                   Scenario::dispersive_compare, Scenario::custom})
        if (to_string(v) == s) return v;
    throw config_error("unknown scenario '" + s + "'");
}

struct RunConfig {
    Scenario scenario = Scenario::custom;
    ModelParams params;
    std::vector<HamiltonianKind> kinds = {HamiltonianKind::RotTwoToneExact};
    IntegratorConfig integrator;
    int fock_cutoff = 15;
    std::string output_dir = ".";
    std::string format = "csv";  // csv | gnuplot
    int sweep_points = 51;
    double sweep_min = 0.0;
    double sweep_max = 0.25;
    double t_final = 0.0;  // 0: scenario default
    bool convergence_check = true;

    void validate() const {
        params.validate();
        if (fock_cutoff < 2) throw config_error("fock_cutoff must be >= 2");
        if (kinds.empty()) throw config_error("at least one Hamiltonian kind required");
        if (sweep_points < 2) throw config_error("sweep.points must be >= 2");
        if (sweep_max < sweep_min) throw config_error("sweep range must ascend");
        if (format != "csv" && format != "gnuplot")
            throw config_error("format must be csv or gnuplot");
    }
};

namespace detail {

// Numeric literal with an optional frequency suffix: GHz is the internal
// unit, MHz scales by 1e-3. Only ratios matter downstream.
inline double parse_frequency(const std::string& raw, int line) {
    std::string text = raw;
    double scale = 1.0;
    if (text.size() > 3 && text.substr(text.size() - 3) == "GHz")
        text = text.substr(0, text.size() - 3);
    else if (text.size() > 3 && text.substr(text.size() - 3) == "MHz") {
        text = text.substr(0, text.size() - 3);
        scale = 1e-3;
    }
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line) + ": bad number '" + raw +
                           "'");
    }
    while (used < text.size() && std::isspace((unsigned char)text[used])) ++used;
    if (used != text.size())
        throw config_error("line " + std::to_string(line) + ": bad number '" + raw +
                           "'");
    return v * scale;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("line " + std::to_string(line) + ": bad boolean '" + v + "'");
}

}  // namespace detail

// Figure parameter presets; explicit keys in the config file override these.
inline void apply_scenario_defaults(RunConfig& cfg) {
    ModelParams& p = cfg.params;
    switch (cfg.scenario) {
        case Scenario::fig1_trajectory:
            p.omega_c = 5.0;
            p.delta_h = 0.15 * p.omega_c;
            p.j_r = 0.05 * p.omega_c;
            p.kappa = p.j_r / 2.0;
            cfg.kinds = {HamiltonianKind::RotTwoToneExact, HamiltonianKind::RotEffH0};
            break;
        case Scenario::fig2_qnd_sweep:
        case Scenario::fig3_snr_sweep:
            p.omega_c = 5.0;
            p.j_r = 0.05;
            p.kappa = 0.025;
            p.omega_d = p.omega_c;  // single-tone comparison runs at the cavity
            cfg.kinds = {HamiltonianKind::RotTwoToneExact,
                         HamiltonianKind::LabSingleTone};
            cfg.sweep_min = 0.0;
            cfg.sweep_max = 0.25;
            break;
        case Scenario::fig4_qnd_sweep_wide:
        case Scenario::fig5_snr_sweep_wide:
            p.omega_c = 5.0;
            p.j_r = 0.1 * p.omega_c;
            p.kappa = p.j_r / 2.0;
            p.omega_d = p.omega_c;
            cfg.kinds = {HamiltonianKind::RotTwoToneExact, HamiltonianKind::RotEffH0,
                         HamiltonianKind::RwaCavityBranch, HamiltonianKind::VanVleck};
            cfg.sweep_min = 0.0;
            cfg.sweep_max = p.omega_c;
            break;
        case Scenario::transverse_rabi:
            p.omega_c = 5.0;
            p.j_r = 0.01 * p.omega_c;
            p.kappa = 0.0;
            p.delta_h = 1.0;
            p.omega_d = p.omega_c - p.delta_h;
            cfg.kinds = {HamiltonianKind::LabSingleTone,
                         HamiltonianKind::RotSingleToneRwa};
            break;
        case Scenario::dispersive_compare:
            p.omega_c = 5.0;
            p.j_r = 0.05;
            p.kappa = 0.025;
            p.delta_h = 2.5;
            p.drive_e = 0.5 * p.kappa;
            p.homodyne_phase = 0.0;
            cfg.kinds = {HamiltonianKind::DispersiveDriven};
            break;
        case Scenario::custom:
            break;
    }
}

// Flat key = value text; '#' starts a comment; unknown keys are errors with a
// line diagnostic. The scenario key is applied first (presets), every other
// key then overrides in file order.
inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}) {
    std::vector<std::pair<int, std::string>> lines;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (!line.empty()) lines.emplace_back(lineno, line);
    }

    auto split = [](const std::string& l, int ln) {
        const std::size_t eq = l.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(ln) +
                               ": expected key = value, got '" + l + "'");
        return std::pair{detail::trim(l.substr(0, eq)), detail::trim(l.substr(eq + 1))};
    };

    for (const auto& [ln, l] : lines) {
        auto [key, value] = split(l, ln);
        if (key == "scenario") {
            cfg.scenario = scenario_from_string(value);
            apply_scenario_defaults(cfg);
        }
    }

    for (const auto& [ln, l] : lines) {
        auto [key, value] = split(l, ln);
        try {
            if (key == "scenario") continue;
            else if (key == "params.omega_c")
                cfg.params.omega_c = detail::parse_frequency(value, ln);
            else if (key == "params.delta_h")
                cfg.params.delta_h = detail::parse_frequency(value, ln);
            else if (key == "params.j0")
                cfg.params.j0 = detail::parse_frequency(value, ln);
            else if (key == "params.j_r")
                cfg.params.j_r = detail::parse_frequency(value, ln);
            else if (key == "params.kappa")
                cfg.params.kappa = detail::parse_frequency(value, ln);
            else if (key == "params.omega_d")
                cfg.params.omega_d = detail::parse_frequency(value, ln);
            else if (key == "params.drive_e")
                cfg.params.drive_e = detail::parse_frequency(value, ln);
            else if (key == "params.homodyne_phase")
                cfg.params.homodyne_phase = detail::parse_frequency(value, ln);
            else if (key == "kinds") {
                cfg.kinds.clear();
                std::istringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ','))
                    cfg.kinds.push_back(kind_from_string(detail::trim(item)));
                if (cfg.kinds.empty())
                    throw config_error("empty kinds list");
            } else if (key == "integrator.method") {
                if (value == "rk4")
                    cfg.integrator.method = Method::rk4_fixed;
                else if (value == "rk45")
                    cfg.integrator.method = Method::rk45_adaptive;
                else
                    throw config_error("method must be rk4 or rk45");
            } else if (key == "integrator.dt_max")
                cfg.integrator.dt_max = detail::parse_frequency(value, ln);
            else if (key == "integrator.rel_tol")
                cfg.integrator.rel_tol = detail::parse_frequency(value, ln);
            else if (key == "integrator.abs_tol")
                cfg.integrator.abs_tol = detail::parse_frequency(value, ln);
            else if (key == "integrator.oscillation_resolution")
                cfg.integrator.oscillation_resolution = std::stoi(value);
            else if (key == "integrator.store_stride")
                cfg.integrator.store_stride = std::stoi(value);
            else if (key == "fock_cutoff")
                cfg.fock_cutoff = std::stoi(value);
            else if (key == "output_dir")
                cfg.output_dir = value;
            else if (key == "format")
                cfg.format = value;
            else if (key == "sweep.points")
                cfg.sweep_points = std::stoi(value);
            else if (key == "sweep.delta_h_min")
                cfg.sweep_min = detail::parse_frequency(value, ln);
            else if (key == "sweep.delta_h_max")
                cfg.sweep_max = detail::parse_frequency(value, ln);
            else if (key == "run.t_final")
                cfg.t_final = detail::parse_frequency(value, ln);
            else if (key == "convergence_check")
                cfg.convergence_check = detail::parse_bool(value, ln);
            else
                throw config_error("line " + std::to_string(ln) + ": unknown key '" +
                                   key + "'");
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            throw config_error("line " + std::to_string(ln) + ": field '" + key +
                               "': " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

// The manifest is itself a valid config file that pins every resolved setting.
// output_dir is deliberately excluded so reruns into different directories
// stay bit-identical.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "scenario = " << to_string(cfg.scenario) << "\n";
    out << "params.omega_c = " << num(cfg.params.omega_c) << "\n";
    out << "params.delta_h = " << num(cfg.params.delta_h) << "\n";
    out << "params.j0 = " << num(cfg.params.j0) << "\n";
    out << "params.j_r = " << num(cfg.params.j_r) << "\n";
    out << "params.kappa = " << num(cfg.params.kappa) << "\n";
    out << "params.omega_d = " << num(cfg.params.omega_d) << "\n";
    out << "params.drive_e = " << num(cfg.params.drive_e) << "\n";
    out << "params.homodyne_phase = " << num(cfg.params.homodyne_phase) << "\n";
    out << "kinds = ";
    for (std::size_t k = 0; k < cfg.kinds.size(); ++k)
        out << (k ? "," : "") << to_string(cfg.kinds[k]);
    out << "\n";
    out << "integrator.method = "
        << (cfg.integrator.method == Method::rk4_fixed ? "rk4" : "rk45") << "\n";
    out << "integrator.dt_max = " << num(cfg.integrator.dt_max) << "\n";
    out << "integrator.rel_tol = " << num(cfg.integrator.rel_tol) << "\n";
    out << "integrator.abs_tol = " << num(cfg.integrator.abs_tol) << "\n";
    out << "integrator.oscillation_resolution = "
        << cfg.integrator.oscillation_resolution << "\n";
    out << "integrator.store_stride = " << cfg.integrator.store_stride << "\n";
    out << "fock_cutoff = " << cfg.fock_cutoff << "\n";
    out << "format = " << cfg.format << "\n";
    out << "sweep.points = " << cfg.sweep_points << "\n";
    out << "sweep.delta_h_min = " << num(cfg.sweep_min) << "\n";
    out << "sweep.delta_h_max = " << num(cfg.sweep_max) << "\n";
    out << "run.t_final = " << num(cfg.t_final) << "\n";
    out << "convergence_check = " << (cfg.convergence_check ? "true" : "false")
        << "\n";
    return out.str();
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string manifest_hash(const RunConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  (unsigned long long)fnv1a64(serialize_config(cfg)));
    return buf;
}

// ---- sweeps -----------------------------------------------------------------

struct SweepResult {
    std::vector<double> axis;             // delta_h values
    std::vector<std::string> columns;     // per-column labels
    std::vector<std::vector<double>> values;  // values[row][col], NaN on failure
    std::vector<std::string> errors;      // per-row diagnostic, empty on success
};

namespace detail {

inline double qnd_minimum_at(HamiltonianKind kind, const ModelParams& p,
                             int cutoff, double t_final,
                             const IntegratorConfig& cfg) {
    HilbertSpec spec{cutoff};
    auto rho0 =
        DensityMatrix::pure(tensor(qubit_plus(), fock_state(0, cutoff)), spec);
    IntegratorConfig c = cfg;
    if (c.store_stride == 0) c.store_stride = 1 << 20;  // observables only
    auto traj = evolve(kind, p, rho0, t_final, c);
    return qnd_fidelity(traj).minimum;
}

inline std::vector<double> snr_at(HamiltonianKind kind, const ModelParams& p,
                                  int cutoff, const std::vector<double>& taus,
                                  const IntegratorConfig& cfg) {
    SnrOptions opt;
    opt.fock_cutoff = cutoff;
    IntegratorConfig c = cfg;
    if (c.store_stride == 0) c.store_stride = 1 << 20;
    auto res = snr(p, kind, taus, c, opt);
    return res.snr;
}

}  // namespace detail

// QND-minimum and/or SNR columns per requested kind over a uniform delta_h
// axis; points are independent and run in parallel, per-point failures land in
// the error column instead of aborting the sweep.
inline SweepResult sweep_delta_h(const RunConfig& cfg) {
    cfg.validate();
    const bool want_snr = cfg.scenario == Scenario::fig3_snr_sweep ||
                          cfg.scenario == Scenario::fig5_snr_sweep_wide;
    const double kappa = cfg.params.kappa;
    if (want_snr && kappa <= 0)
        throw config_error("snr sweep requires kappa > 0");
    const double t_final = cfg.t_final > 0 ? cfg.t_final : 2.0 / kappa;
    const std::vector<double> taus = {0.5 * t_final, t_final};

    SweepResult result;
    result.axis.resize(cfg.sweep_points);
    for (int k = 0; k < cfg.sweep_points; ++k)
        result.axis[k] = cfg.sweep_min + (cfg.sweep_max - cfg.sweep_min) * k /
                                             double(cfg.sweep_points - 1);
    for (auto kind : cfg.kinds) {
        if (want_snr) {
            result.columns.push_back(to_string(kind) + "_snr_tau1");
            result.columns.push_back(to_string(kind) + "_snr_tau2");
        } else {
            result.columns.push_back(to_string(kind) + "_qnd_min");
        }
    }
    result.values.assign(result.axis.size(),
                         std::vector<double>(result.columns.size(),
                                             std::numeric_limits<double>::quiet_NaN()));
    result.errors.assign(result.axis.size(), "");

    parallel_for(result.axis.size(), [&](std::size_t row) {
        ModelParams p = cfg.params;
        p.delta_h = result.axis[row];
        std::size_t col = 0;
        for (auto kind : cfg.kinds) {
            try {
                if (want_snr) {
                    auto s = detail::snr_at(kind, p, cfg.fock_cutoff, taus,
                                            cfg.integrator);
                    result.values[row][col] = s[0];
                    result.values[row][col + 1] = s[1];
                } else {
                    result.values[row][col] = detail::qnd_minimum_at(
                        kind, p, cfg.fock_cutoff, t_final, cfg.integrator);
                }
            } catch (const std::exception& e) {
                if (result.errors[row].empty()) {
                    std::string msg = to_string(kind) + ": " + e.what();
                    // keep the diagnostic CSV-safe
                    for (char& ch : msg)
                        if (ch == ',' || ch == '\n') ch = ';';
                    result.errors[row] = msg;
                }
            }
            col += want_snr ? 2 : 1;
        }
    });
    return result;
}

// ---- export -----------------------------------------------------------------

namespace detail {

inline void write_csv(const std::string& path, const std::string& hash,
                      const std::string& label,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows,
                      const std::vector<std::string>* errors = nullptr) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "# manifest " << hash << "\n";
    out << "# " << label << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << columns[c];
    if (errors) out << ",error";
    out << "\n";
    char buf[64];
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", rows[r][c]);
            out << (c ? "," : "") << buf;
        }
        if (errors) out << "," << (*errors)[r];
        out << "\n";
    }
}

}  // namespace detail

// Writes <base>.csv (and a ready-to-run <base>.gp stub for the gnuplot
// format). Returns the paths written.
inline std::vector<std::string> emit_plot_data(const SweepResult& result,
                                               const std::string& format,
                                               const std::string& dir,
                                               const std::string& base,
                                               const std::string& hash,
                                               const std::string& label) {
    if (result.axis.empty()) throw config_error("emit_plot_data: empty result");
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    std::vector<std::string> columns = {"delta_h"};
    columns.insert(columns.end(), result.columns.begin(), result.columns.end());
    std::vector<std::vector<double>> rows(result.axis.size());
    for (std::size_t r = 0; r < result.axis.size(); ++r) {
        rows[r].push_back(result.axis[r]);
        rows[r].insert(rows[r].end(), result.values[r].begin(),
                       result.values[r].end());
    }
    const std::string csv = dir + "/" + base + ".csv";
    detail::write_csv(csv, hash, label, columns, rows, &result.errors);
    paths.push_back(csv);

    if (format == "gnuplot") {
        const std::string gp = dir + "/" + base + ".gp";
        std::ofstream out(gp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + gp + "' for writing");
        out << "set datafile separator ','\n";
        out << "set key autotitle columnhead\n";
        out << "set xlabel 'delta_h'\n";
        out << "set terminal pngcairo size 900,600\n";
        out << "set output '" << base << ".png'\n";
        out << "plot";
        for (std::size_t c = 0; c < result.columns.size(); ++c)
            out << (c ? ", " : " ") << "'" << base << ".csv' using 1:" << (c + 2)
                << " with lines";
        out << "\n";
        paths.push_back(gp);
    }
    return paths;
}

// Inverse of emit_plot_data's CSV for round-trip checks.
inline SweepResult parse_sweep_csv(const std::string& path,
                                   std::string* hash_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open '" + path + "'");
    SweepResult result;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string word, hash;
            if (ss >> word >> hash && word == "manifest" && hash_out)
                *hash_out = hash;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        // a trailing empty error cell is dropped by getline; restore it
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (!header_done) {
            if (cells.size() < 2 || cells.front() != "delta_h")
                throw config_error("unexpected sweep CSV header in '" + path + "'");
            const bool has_error = cells.back() == "error";
            result.columns.assign(cells.begin() + 1,
                                  cells.end() - (has_error ? 1 : 0));
            header_done = true;
            continue;
        }
        const std::size_t ncols = result.columns.size();
        if (cells.size() < ncols + 1)
            throw config_error("short sweep CSV row in '" + path + "'");
        result.axis.push_back(std::stod(cells[0]));
        std::vector<double> row(ncols);
        for (std::size_t c = 0; c < ncols; ++c) row[c] = std::stod(cells[c + 1]);
        result.values.push_back(std::move(row));
        result.errors.push_back(cells.size() > ncols + 1 ? cells[ncols + 1] : "");
    }
    if (!header_done) throw config_error("no header in sweep CSV '" + path + "'");
    return result;
}

// ---- scenario execution -----------------------------------------------------

namespace detail {

// Re-evaluates a scalar figure-of-merit at cutoff + 5 and demands 1e-4
// relative agreement (floored for values near zero).
template <class F>
void convergence_gate(const RunConfig& cfg, F&& metric) {
    if (!cfg.convergence_check) return;
    const double base = metric(cfg.fock_cutoff);
    const double refined = metric(cfg.fock_cutoff + 5);
    const double scale = std::max({std::abs(base), std::abs(refined), 1e-3});
    if (std::abs(base - refined) / scale > 1e-4)
        throw numerical_breach(
            "convergence gate: figure of merit moved from " + std::to_string(base) +
            " to " + std::to_string(refined) + " when the Fock cutoff was raised by 5");
}

inline Trajectory run_trajectory(HamiltonianKind kind, const ModelParams& p,
                                 const Vector& qubit, int cutoff, double t_final,
                                 IntegratorConfig cfg) {
    HilbertSpec spec{cutoff};
    auto rho0 = DensityMatrix::pure(tensor(qubit, fock_state(0, cutoff)), spec);
    return evolve(kind, p, rho0, t_final, cfg);
}

inline std::vector<std::vector<double>> observable_rows(const Trajectory& traj,
                                                        int stride) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < traj.obs.t.size(); k += stride)
        rows.push_back({traj.obs.t[k], traj.obs.re_a[k], traj.obs.im_a[k],
                        traj.obs.quad[k], traj.obs.sx[k], traj.obs.sz[k],
                        traj.obs.n[k], traj.obs.plus_overlap[k]});
    return rows;
}

}  // namespace detail

// Executes the configured scenario and returns the files written. Every file
// carries the manifest hash; manifest.txt itself is a valid config file.
inline std::vector<std::string> run_scenario(const RunConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    const std::string hash = manifest_hash(cfg);
    const std::string label = to_string(cfg.scenario);
    std::vector<std::string> paths;

    {
        const std::string path = cfg.output_dir + "/manifest.txt";
        std::ofstream out(path, std::ios::binary);
        out << serialize_config(cfg);
        paths.push_back(path);
    }

    const double kappa = cfg.params.kappa;
    const std::vector<std::string> obs_columns = {
        "t", "re_a", "im_a", "quad", "sigma_x", "sigma_z", "n", "plus_overlap"};

    switch (cfg.scenario) {
        case Scenario::fig1_trajectory: {
            const double t_final = cfg.t_final > 0 ? cfg.t_final : 16.0 / kappa;
            std::vector<std::string> columns = {"t"};
            std::vector<Trajectory> trajs;
            for (auto kind : cfg.kinds)
                for (const char* prep : {"plus", "minus"}) {
                    trajs.push_back(detail::run_trajectory(
                        kind, cfg.params,
                        prep[0] == 'p' ? qubit_plus() : qubit_minus(),
                        cfg.fock_cutoff, t_final, cfg.integrator));
                    columns.push_back(to_string(kind) + "_" + prep + "_im_a");
                }
            const int stride =
                std::max<int>(1, int(trajs[0].obs.t.size() / 4000));
            std::vector<std::vector<double>> rows;
            for (std::size_t k = 0; k < trajs[0].obs.t.size(); k += stride) {
                std::vector<double> row = {trajs[0].obs.t[k]};
                for (const auto& tr : trajs) row.push_back(tr.obs.im_a[k]);
                rows.push_back(std::move(row));
            }
            const std::string csv = cfg.output_dir + "/im_a_vs_t.csv";
            detail::write_csv(csv, hash, label, columns, rows);
            paths.push_back(csv);

            // Wigner maps of the full-model cavity state at the final time
            WignerGridSpec gs;
            const double extent = cfg.params.j_r / kappa + 3.0;
            gs.x_min = gs.p_min = -extent;
            gs.x_max = gs.p_max = extent;
            for (int which : {0, 1}) {
                Matrix cav = reduce(trajs[which].states.back(), Subsystem::cavity);
                auto grid = wigner(cav, gs);
                const std::string wpath = cfg.output_dir + "/wigner_" +
                                          (which == 0 ? "plus" : "minus") + ".txt";
                write_wigner(grid, wpath, label + " manifest " + hash);
                paths.push_back(wpath);
            }

            detail::convergence_gate(cfg, [&](int cutoff) {
                auto tr = detail::run_trajectory(cfg.kinds[0], cfg.params,
                                                 qubit_plus(), cutoff, t_final,
                                                 cfg.integrator);
                return tr.obs.im_a.back();
            });
            break;
        }
        case Scenario::fig2_qnd_sweep:
        case Scenario::fig4_qnd_sweep_wide:
        case Scenario::fig3_snr_sweep:
        case Scenario::fig5_snr_sweep_wide: {
            auto result = sweep_delta_h(cfg);
            auto files =
                emit_plot_data(result, cfg.format, cfg.output_dir, label, hash, label);
            paths.insert(paths.end(), files.begin(), files.end());

            // extremal axis point: where the first finite column is extremal
            const bool want_snr = cfg.scenario == Scenario::fig3_snr_sweep ||
                                  cfg.scenario == Scenario::fig5_snr_sweep_wide;
            std::size_t pick = 0;
            bool found = false;
            for (std::size_t r = 0; r < result.axis.size(); ++r) {
                const double v = result.values[r][0];
                if (std::isnan(v)) continue;
                if (!found || (want_snr ? v > result.values[pick][0]
                                        : v < result.values[pick][0])) {
                    pick = r;
                    found = true;
                }
            }
            if (!found)
                throw numerical_breach("sweep produced no finite values: " +
                                       (result.errors.empty() ? std::string()
                                                              : result.errors[0]));
            detail::convergence_gate(cfg, [&](int cutoff) {
                ModelParams p = cfg.params;
                p.delta_h = result.axis[pick];
                const double t_final =
                    cfg.t_final > 0 ? cfg.t_final : 2.0 / kappa;
                if (want_snr)
                    return detail::snr_at(cfg.kinds[0], p, cutoff,
                                          {0.5 * t_final, t_final},
                                          cfg.integrator)[1];
                return detail::qnd_minimum_at(cfg.kinds[0], p, cutoff, t_final,
                                              cfg.integrator);
            });
            break;
        }
        case Scenario::transverse_rabi: {
            const double t_final =
                cfg.t_final > 0 ? cfg.t_final : 3.0 * 2.0 * pi / cfg.params.j_r;
            for (auto kind : cfg.kinds) {
                auto traj = detail::run_trajectory(kind, cfg.params, qubit_up(),
                                                   cfg.fock_cutoff, t_final,
                                                   cfg.integrator);
                const int stride =
                    std::max<int>(1, int(traj.obs.t.size() / 4000));
                const std::string csv =
                    cfg.output_dir + "/" + to_string(kind) + "_observables.csv";
                detail::write_csv(csv, hash, label, obs_columns,
                                  detail::observable_rows(traj, stride));
                paths.push_back(csv);
            }
            detail::convergence_gate(cfg, [&](int cutoff) {
                auto traj = detail::run_trajectory(cfg.kinds[0], cfg.params,
                                                   qubit_up(), cutoff, t_final,
                                                   cfg.integrator);
                return traj.obs.sz.back();
            });
            break;
        }
        case Scenario::dispersive_compare: {
            auto f = dispersive_feasibility(cfg.params);
            const std::string csv = cfg.output_dir + "/feasibility.csv";
            detail::write_csv(csv, hash, label,
                              {"chi", "critical_drive_ratio",
                               "required_drive_ratio", "feasible"},
                              {{f.chi, f.critical_drive_ratio,
                                f.required_drive_ratio, f.feasible ? 1.0 : 0.0}});
            paths.push_back(csv);

            const double t_final = cfg.t_final > 0 ? cfg.t_final : 2.0 / kappa;
            std::vector<double> taus;
            for (int k = 0; k < 25; ++k)
                taus.push_back(t_final * (k + 1) / 25.0);
            SnrOptions opt;
            opt.fock_cutoff = cfg.fock_cutoff;
            auto res = snr(cfg.params, cfg.kinds[0], taus, cfg.integrator, opt);
            std::vector<std::vector<double>> rows;
            for (std::size_t k = 0; k < taus.size(); ++k)
                rows.push_back({taus[k], res.mean_plus[k], res.mean_minus[k],
                                res.var_plus[k], res.var_minus[k], res.snr[k]});
            const std::string snr_csv = cfg.output_dir + "/snr.csv";
            detail::write_csv(snr_csv, hash, label,
                              {"tau", "M_plus", "M_minus", "var_plus",
                               "var_minus", "snr"},
                              rows);
            paths.push_back(snr_csv);

            detail::convergence_gate(cfg, [&](int cutoff) {
                return detail::snr_at(cfg.kinds[0], cfg.params, cutoff, taus,
                                      cfg.integrator)
                    .back();
            });
            break;
        }
        case Scenario::custom: {
            const double t_final =
                cfg.t_final > 0 ? cfg.t_final
                                : (kappa > 0 ? 2.0 / kappa
                                             : 20.0 * 2.0 * pi / cfg.params.omega_c);
            for (auto kind : cfg.kinds) {
                auto traj = detail::run_trajectory(kind, cfg.params, qubit_plus(),
                                                   cfg.fock_cutoff, t_final,
                                                   cfg.integrator);
                const int stride =
                    std::max<int>(1, int(traj.obs.t.size() / 4000));
                const std::string csv =
                    cfg.output_dir + "/" + to_string(kind) + "_observables.csv";
                detail::write_csv(csv, hash, label, obs_columns,
                                  detail::observable_rows(traj, stride));
                paths.push_back(csv);
            }
            detail::convergence_gate(cfg, [&](int cutoff) {
                auto traj = detail::run_trajectory(cfg.kinds[0], cfg.params,
                                                   qubit_plus(), cutoff, t_final,
                                                   cfg.integrator);
                return traj.obs.plus_overlap.back();
            });
            break;
        }
    }
    return paths;
}

}  // namespace twotone
