// Command-line driver: scenario runs, detuning sweeps, Wigner maps and SNR
// curves from a flat key = value config file.

#include "CLI11.hpp"

#include "twotone/harness.hpp"

#include <cstdio>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    int cutoff = 0;
    double dt_max = 0.0;
    std::string format;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value)")
        ->required();
    cmd->add_option("--output-dir", flags.output_dir, "directory for output files");
    cmd->add_option("--cutoff", flags.cutoff, "Fock-space cutoff override");
    cmd->add_option("--dt-max", flags.dt_max, "integrator step-size cap override");
    cmd->add_option("--format", flags.format, "plot-data format")
        ->check(CLI::IsMember({"csv", "gnuplot"}));
}

twotone::RunConfig load(const CommonFlags& flags) {
    auto cfg = twotone::parse_config_file(flags.config_path);
    if (!flags.output_dir.empty()) cfg.output_dir = flags.output_dir;
    if (flags.cutoff > 0) cfg.fock_cutoff = flags.cutoff;
    if (flags.dt_max > 0.0) cfg.integrator.dt_max = flags.dt_max;
    if (!flags.format.empty()) cfg.format = flags.format;
    cfg.validate();
    return cfg;
}

void report(const std::vector<std::string>& paths) {
    for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
}

int run_cmd(const CommonFlags& flags) {
    report(twotone::run_scenario(load(flags)));
    return kExitOk;
}

int sweep_cmd(const CommonFlags& flags) {
    auto cfg = load(flags);
    auto result = twotone::sweep_delta_h(cfg);
    report(twotone::emit_plot_data(result, cfg.format, cfg.output_dir,
                                   twotone::to_string(cfg.scenario) + "_sweep",
                                   twotone::manifest_hash(cfg),
                                   twotone::to_string(cfg.scenario)));
    return kExitOk;
}

int wigner_cmd(const CommonFlags& flags) {
    using namespace twotone;
    auto cfg = load(flags);
    if (cfg.params.kappa <= 0 && cfg.t_final <= 0)
        throw config_error("wigner: set run.t_final when kappa = 0");
    const double t_final = cfg.t_final > 0 ? cfg.t_final : 16.0 / cfg.params.kappa;
    std::filesystem::create_directories(cfg.output_dir);
    const std::string hash = manifest_hash(cfg);
    std::vector<std::string> paths;
    WignerGridSpec gs;
    const double extent =
        cfg.params.kappa > 0 ? cfg.params.j_r / cfg.params.kappa + 3.0 : 4.0;
    gs.x_min = gs.p_min = -extent;
    gs.x_max = gs.p_max = extent;
    HilbertSpec spec{cfg.fock_cutoff};
    for (const char* prep : {"plus", "minus"}) {
        auto rho0 = DensityMatrix::pure(
            tensor(prep[0] == 'p' ? qubit_plus() : qubit_minus(),
                   fock_state(0, cfg.fock_cutoff)),
            spec);
        auto traj = evolve(cfg.kinds[0], cfg.params, rho0, t_final, cfg.integrator);
        auto grid = wigner(reduce(traj.states.back(), Subsystem::cavity), gs);
        const std::string path =
            cfg.output_dir + "/wigner_" + prep + ".txt";
        write_wigner(grid, path,
                     to_string(cfg.kinds[0]) + " manifest " + hash);
        paths.push_back(path);
    }
    report(paths);
    return kExitOk;
}

int snr_cmd(const CommonFlags& flags) {
    using namespace twotone;
    auto cfg = load(flags);
    if (cfg.params.kappa <= 0)
        throw config_error("snr: kappa must be > 0");
    const double t_final = cfg.t_final > 0 ? cfg.t_final : 2.0 / cfg.params.kappa;
    std::vector<double> taus;
    for (int k = 0; k < 40; ++k) taus.push_back(t_final * (k + 1) / 40.0);
    SnrOptions opt;
    opt.fock_cutoff = cfg.fock_cutoff;
    auto res = snr(cfg.params, cfg.kinds[0], taus, cfg.integrator, opt);
    std::filesystem::create_directories(cfg.output_dir);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < taus.size(); ++k)
        rows.push_back({taus[k], res.mean_plus[k], res.mean_minus[k],
                        res.var_plus[k], res.var_minus[k], res.snr[k]});
    const std::string path = cfg.output_dir + "/snr.csv";
    twotone::detail::write_csv(
        path, manifest_hash(cfg), to_string(cfg.kinds[0]),
        {"tau", "M_plus", "M_minus", "var_plus", "var_minus", "snr"}, rows);
    report({path});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-tone spin-photon coupling simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, wigner_flags, snr_flags;
    auto* run = app.add_subcommand("run", "execute the configured scenario");
    add_common(run, run_flags);
    auto* sweep = app.add_subcommand("sweep", "detuning sweep of the configured kinds");
    add_common(sweep, sweep_flags);
    auto* wig = app.add_subcommand("wigner", "late-time cavity Wigner maps");
    add_common(wig, wigner_flags);
    auto* snr_sub = app.add_subcommand("snr", "homodyne SNR curve");
    add_common(snr_sub, snr_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return run_cmd(run_flags);
        if (sweep->parsed()) return sweep_cmd(sweep_flags);
        if (wig->parsed()) return wigner_cmd(wigner_flags);
        if (snr_sub->parsed()) return snr_cmd(snr_flags);
    } catch (const twotone::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const twotone::numerical_breach& e) {
        std::fprintf(stderr, "numerical breach: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
