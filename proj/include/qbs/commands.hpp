// commands.hpp — subcommand bodies behind the qbs CLI

#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qbs/analytic.hpp"
#include "qbs/checks.hpp"
#include "qbs/io.hpp"
#include "qbs/langevin.hpp"
#include "qbs/lindblad.hpp"
#include "qbs/spectroscopy.hpp"

namespace qbs {

// Raw option values as parsed from flags and config; resolved per command.
struct CommandArgs {
    double gamma{1.0};
    double delta{0.0};
    double n_th{0.0};
    std::optional<double> n_dr;
    std::optional<double> drive_re;
    std::optional<double> drive_im;
    double r{0.0};
    double n_cl{0.0};

    std::string source{"analytic-total"};
    std::string model{"shotnoise-analytic-limits"};
    std::string grid{"-3:3:61"};
    std::string times{"0:3:31"};
    std::string lambdas{"0.05,0.1,0.2,0.3"};
    std::string omega{"3"};
    std::optional<double> t_f;

    int dim{0};             // 0: automatic
    double window_T{30.0};  // lag half-window of the master-equation quadrature
    int n_tau{241};
    int n_traj{2000};
    double dt{0.01};
    std::uint64_t seed{1};
    double segment{100.0};
    std::string window{"hann"};
    int threads{1};
    std::string out;

    std::string level{"quick"};
    std::string mutation;
};

// "a:b:n" (inclusive linspace) or "x,y,z".
inline std::vector<double> parse_values(const std::string& text) {
    require(!text.empty(), "empty value list");
    if (text.find(':') != std::string::npos) return parse_grid(text).omega1_values;
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            throw std::invalid_argument("bad number '" + item + "' in list '" + text + "'");
        }
        require(used == item.size(), "bad number '" + item + "' in list '" + text + "'");
        out.push_back(v);
    }
    return out;
}

inline CavityParams resolve_cavity(const CommandArgs& a) {
    const bool amp = a.drive_re.has_value() || a.drive_im.has_value();
    require(!(a.n_dr && amp), "give either --ndr or --drive-re/--drive-im, not both");
    CavityParams p;
    if (a.n_dr) {
        p = CavityParams::from_drive_photons(a.gamma, a.delta, *a.n_dr, a.n_th);
    } else {
        p = CavityParams{a.gamma, a.delta, a.drive_re.value_or(0.0), a.drive_im.value_or(0.0), a.n_th};
    }
    p.validate();
    return p;
}

inline SqueezedBathParams resolve_squeezed(const CommandArgs& a) {
    SqueezedBathParams sp{a.gamma, a.delta, a.r, a.n_cl};
    sp.validate();
    return sp;
}

inline Window parse_window(const std::string& w) {
    if (w == "hann") return Window::hann;
    if (w == "rectangular") return Window::rectangular;
    throw std::invalid_argument("window must be hann or rectangular");
}

inline SdeConfig sde_config(const CommandArgs& a, double total_time) {
    SdeConfig cfg;
    cfg.dt = a.dt;
    cfg.total_time = total_time;
    cfg.burn_in = 10.0 / a.gamma;
    cfg.n_traj = a.n_traj;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    return cfg;
}

inline nlohmann::json sde_json(const SdeConfig& c) {
    return {{"dt", c.dt},           {"total_time", c.total_time}, {"burn_in", c.burn_in},
            {"n_traj", c.n_traj},   {"sample_stride", c.sample_stride}, {"seed", c.seed}};
}

// ---------------------------------------------------------------------------

inline void cmd_bispectrum(const CommandArgs& a) {
    require(!a.out.empty(), "--out is required");
    const Source src = parse_source(a.source);
    const auto p = resolve_cavity(a);
    const auto grid = parse_grid(a.grid);
    RunMeta meta;
    meta.command = "bispectrum";
    meta.source = std::string(to_string(src));
    meta.params = params_json(p);
    meta.params["n_dr"] = intracavity_drive_photons(p);
    meta.params["grid"] = a.grid;

    BispectrumSurface surf;
    switch (src) {
    case Source::analytic_thermal:
    case Source::analytic_drive:
    case Source::analytic_total:
        surf = eval_surface(p, grid, src);
        meta.tolerances["closed_form"] = "exact";
        break;
    case Source::lindblad: {
        const auto ws = build_workspace_auto(p, a.dim);
        OracleOptions opt;
        opt.threads = a.threads;
        const auto o = oracle_bispectrum(ws, grid, a.window_T, a.n_tau, opt);
        surf = o.surface;
        meta.params["dim"] = ws.dim;
        meta.params["window_T"] = a.window_T;
        meta.params["n_tau"] = a.n_tau;
        meta.tolerances["quadrature_error_max"] = o.quadrature_error.maxCoeff();
        meta.tolerances["tail_bound"] = o.tail_bound;
        meta.diagnostics["tail_flagged"] = o.tail_flagged;
        meta.diagnostics["top_population"] = ws.top_population;
        break;
    }
    case Source::langevin: {
        SdeConfig cfg = sde_config(a, a.t_f.value_or(200.0 / a.gamma));
        // Sample at 0.1/γ or finer; the integration step stays at dt.
        cfg.sample_stride = std::max(1, static_cast<int>(std::floor(0.1 / a.gamma / a.dt + 1e-9)));
        cfg.validate(p.gamma);
        const TrajectorySource ts = [&](std::size_t i) { return simulate_driven_one(p, cfg, i); };
        const auto lb = estimate_bispectrum(ts, static_cast<std::size_t>(cfg.n_traj), grid, a.segment,
                                            parse_window(a.window), a.threads);
        surf = lb.surface;
        meta.seeds = {cfg.seed};
        meta.params["sde"] = sde_json(cfg);
        meta.params["segment"] = a.segment;
        meta.params["window"] = a.window;
        meta.tolerances["stderr_re_max"] = surf.std_error.real().maxCoeff();
        meta.tolerances["stderr_im_max"] = surf.std_error.imag().maxCoeff();
        meta.diagnostics["segments"] = lb.segments;
        meta.diagnostics["mean_n"] = lb.mean_n;
        break;
    }
    }
    require(surf.finite(), "non-finite values in the computed surface");
    write_outputs(a.out, surface_table(surf), meta);
}

// ---------------------------------------------------------------------------

inline void cmd_skewness(const CommandArgs& a) {
    require(!a.out.empty(), "--out is required");
    std::vector<double> ts = parse_values(a.times);
    for (double& t : ts) t = std::abs(t);
    RunMeta meta;
    meta.command = "skewness";
    meta.source = a.model;
    meta.params["times"] = a.times;
    CsvTable tab;
    tab.header = {"t", "c3_pos", "c3_neg", "c3_classical"};

    if (a.model == "shotnoise-lindblad" || a.model == "shotnoise-analytic-limits") {
        const auto p = resolve_cavity(a);
        meta.params.update(params_json(p));
        meta.params["n_dr"] = intracavity_drive_photons(p);
        const double th2 = std::pow(2.0 * p.n_th + 1.0, 2);
        auto classical = [&](double t) {
            return c_thermal_3(p, 0.0, t, t) + th2 * c_drive_classical_equal_time(p, t);
        };
        if (a.model == "shotnoise-lindblad") {
            const auto ws = build_workspace_auto(p, a.dim);
            meta.params["dim"] = ws.dim;
            meta.diagnostics["top_population"] = ws.top_population;
            for (double t : ts)
                tab.add({fmt17(t), fmt17(keldysh_c3(ws, t, t)), fmt17(keldysh_c3(ws, -t, -t)), fmt17(classical(t))});
        } else {
            auto total = [&](double t) { return c_thermal_3(p, 0.0, t, t) + c_drive_equal_time(p, t); };
            for (double t : ts) tab.add({fmt17(t), fmt17(total(t)), fmt17(total(-t)), fmt17(classical(t))});
        }
    } else if (a.model == "squeezed-analytic") {
        const auto sp = resolve_squeezed(a);
        meta.params.update(params_json(sp));
        for (double t : ts)
            tab.add({fmt17(t), fmt17(c3_squeezed_equal_time(sp, t)), fmt17(c3_squeezed_equal_time(sp, -t)),
                     fmt17(c3_squeezed_classical_equal_time(sp, t))});
    } else if (a.model == "squeezed-langevin") {
        const auto sp = resolve_squeezed(a);
        meta.params.update(params_json(sp));
        SdeConfig cfg = sde_config(a, a.t_f.value_or(500.0 / a.gamma));
        cfg.validate(sp.gamma);
        meta.seeds = {cfg.seed};
        meta.params["sde"] = sde_json(cfg);
        std::vector<std::pair<double, double>> pairs;
        for (double t : ts) {
            pairs.emplace_back(t, t);
            pairs.emplace_back(-t, -t);
        }
        const TrajectorySource src = [&](std::size_t i) { return simulate_squeezed_one(sp, cfg, i); };
        const auto est = estimate_c3(src, static_cast<std::size_t>(cfg.n_traj), pairs, a.threads);
        tab.header = {"t", "c3_pos", "c3_neg", "c3_classical", "c3_pos_stderr", "c3_neg_stderr"};
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const auto& pos = est[2 * k];
            const auto& neg = est[2 * k + 1];
            tab.add({fmt17(ts[k]), fmt17(pos.mean), fmt17(neg.mean), fmt17(c3_squeezed_classical_equal_time(sp, ts[k])),
                     fmt17(pos.stderr_), fmt17(neg.stderr_)});
        }
    } else {
        throw std::invalid_argument("unknown model '" + a.model +
                                    "' (shotnoise-lindblad, shotnoise-analytic-limits, squeezed-analytic, "
                                    "squeezed-langevin)");
    }
    write_outputs(a.out, tab, meta);
}

// ---------------------------------------------------------------------------

inline void cmd_spectroscopy(const CommandArgs& a) {
    require(!a.out.empty(), "--out is required");
    const auto p = resolve_cavity(a);
    const auto omegas = parse_values(a.omega);
    const auto lambdas = parse_values(a.lambdas);
    for (double l : lambdas) require(l >= 0.0, "couplings must be >= 0");
    const IntegratorConfig cfg;
    RunMeta meta;
    meta.command = "spectroscopy";
    meta.source = "phase-space";
    meta.params = params_json(p);
    meta.params["n_dr"] = intracavity_drive_photons(p);
    meta.params["omega"] = omegas;
    meta.params["lambdas"] = lambdas;
    meta.tolerances["rel_tol"] = cfg.rel_tol;
    meta.tolerances["abs_tol"] = cfg.abs_tol;
    meta.tolerances["rate_divisor"] = k_phase_rate_divisor;

    CsvTable tab;
    tab.header = {"omega", "lambda", "im_chi_over_tf", "analytic_prediction", "flag_sign_flip"};
    nlohmann::json durations = nlohmann::json::array();
    int unconverged = 0;
    for (double w : omegas) {
        const double t_f = a.t_f ? *a.t_f : default_duration(w, p.gamma);
        durations.push_back(t_f);
        const double im_s = s_total(p, {w, w}).imag();
        const auto rates = phase_rates(p, w, lambdas, t_f, cfg, a.threads);
        for (const auto& r : rates) {
            const double pred = predicted_phase_rate(r.lambda, im_s);
            const bool flip = r.rate != 0.0 && pred != 0.0 && (r.rate > 0.0) != (pred > 0.0);
            unconverged += r.flagged ? 1 : 0;
            tab.add({fmt17(w), fmt17(r.lambda), fmt17(r.rate), fmt17(pred), flip ? "1" : "0"});
        }
    }
    meta.params["t_f"] = durations;
    meta.diagnostics["nonlinear_drift_flags"] = unconverged;
    write_outputs(a.out, tab, meta);
}

// ---------------------------------------------------------------------------

// Returns true when every check passed.
inline bool cmd_check(const CommandArgs& a, std::ostream& os = std::cout) {
    SuiteOptions opt;
    if (a.level == "quick") opt.level = CheckLevel::quick;
    else if (a.level == "full") opt.level = CheckLevel::full;
    else throw std::invalid_argument("level must be quick or full");
    opt.threads = a.threads;
    if (!a.mutation.empty()) opt.model = AnalyticModel(FormulaTerms::flipped(a.mutation));
    opt.on_result = [&os](const CheckResult& r) {
        os << (r.passed ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << std::left << std::setw(34)
           << r.name << std::right << std::fixed << std::setprecision(2) << std::setw(8) << r.seconds << " s  "
           << r.detail << '\n'
           << std::flush;
        os.unsetf(std::ios::floatfield);
    };
    if (!a.mutation.empty()) os << "analytic model mutated: " << a.mutation << " sign flipped\n";
    const auto results = run_suite(opt);
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    os << (failed ? std::to_string(failed) + " of " + std::to_string(results.size()) + " checks failed"
                  : "all " + std::to_string(results.size()) + " checks passed")
       << '\n';
    return failed == 0;
}

} // namespace qbs
