// qbs_cli.cpp — command-line front end: bispectrum, skewness, spectroscopy, check

#include <iostream>

#include <CLI11.hpp>

#include "qbs/commands.hpp"

namespace {

constexpr int k_exit_usage = 1;
constexpr int k_exit_compute = 2;
constexpr int k_exit_check = 3;

template <class T>
void optional_flag(CLI::App& app, const std::string& name, std::optional<T>& target, const std::string& help) {
    app.add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

} // namespace

int main(int argc, char** argv) {
    qbs::CommandArgs a;
    CLI::App app{"Keldysh-ordered photon shot-noise cumulants and bispectra of a driven damped cavity"};
    app.set_version_flag("--version", qbs::k_version);
    app.require_subcommand(1);
    // Flat key=value file; keys are the long flag names. Flags on the command
    // line win over the file.
    app.set_config("--config", "", "flat key=value parameter file");

    app.add_option("--gamma", a.gamma, "cavity damping rate")->capture_default_str();
    app.add_option("--delta", a.delta, "detuning")->capture_default_str();
    app.add_option("--nth", a.n_th, "thermal occupation")->capture_default_str();
    optional_flag(app, "--ndr", a.n_dr, "intracavity drive photon number (sets a real drive)");
    optional_flag(app, "--drive-re", a.drive_re, "drive amplitude, real part");
    optional_flag(app, "--drive-im", a.drive_im, "drive amplitude, imaginary part");
    app.add_option("--r", a.r, "squeezing parameter")->capture_default_str();
    app.add_option("--ncl", a.n_cl, "squeezed-bath occupation")->capture_default_str();
    app.add_option("--grid", a.grid, "frequency grid min:max:count (both axes)")->capture_default_str();
    app.add_option("--times", a.times, "times, min:max:count or comma list")->capture_default_str();
    app.add_option("--lambdas", a.lambdas, "couplings, min:max:count or comma list")->capture_default_str();
    app.add_option("--omega", a.omega, "filter frequencies, comma list")->capture_default_str();
    optional_flag(app, "--tf", a.t_f, "duration (spectroscopy filter, or Langevin trajectory length)");
    app.add_option("--dim", a.dim, "Fock truncation (0: automatic)")->capture_default_str();
    app.add_option("--window-T", a.window_T, "lag half-window of the master-equation quadrature")
        ->capture_default_str();
    app.add_option("--ntau", a.n_tau, "lag points per axis (odd)")->capture_default_str();
    app.add_option("--traj", a.n_traj, "number of Langevin trajectories")->capture_default_str();
    app.add_option("--dt", a.dt, "Langevin time step")->capture_default_str();
    app.add_option("--seed", a.seed, "Langevin seed")->capture_default_str();
    app.add_option("--segment", a.segment, "bispectrum segment length (time units)")->capture_default_str();
    app.add_option("--window", a.window, "segment window: hann or rectangular")->capture_default_str();
    app.add_option("--threads", a.threads, "worker threads (0: all cores)")->capture_default_str();
    app.add_option("--out", a.out, "output CSV path; metadata goes to <out>.meta.json");

    auto* bis = app.add_subcommand("bispectrum", "bispectrum surface on a frequency grid");
    bis->add_option("--source", a.source,
                    "analytic-thermal, analytic-drive, analytic-total, lindblad or langevin")
        ->capture_default_str();
    auto* skew = app.add_subcommand("skewness", "equal-time third cumulant C3(t, t) against time");
    skew->add_option("--model", a.model,
                     "shotnoise-lindblad, shotnoise-analytic-limits, squeezed-analytic or squeezed-langevin")
        ->capture_default_str();
    auto* spec = app.add_subcommand("spectroscopy", "probe phase drift against coupling strength");
    auto* check = app.add_subcommand("check", "run the invariant and oracle suite");
    check->add_option("--level", a.level, "quick or full")->capture_default_str();
    check->add_option("--mutation", a.mutation, "flip the sign of one closed-form term before checking");
    for (auto* sub : {bis, skew, spec, check}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : k_exit_usage;
    }

    try {
        if (*bis) qbs::cmd_bispectrum(a);
        else if (*skew) qbs::cmd_skewness(a);
        else if (*spec) qbs::cmd_spectroscopy(a);
        else if (*check) return qbs::cmd_check(a) ? 0 : k_exit_check;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qbs: " << e.what() << '\n';
        return k_exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "qbs: computation failed: " << e.what() << '\n';
        return k_exit_compute;
    }
    return 0;
}
