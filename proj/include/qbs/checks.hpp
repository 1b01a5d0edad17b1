// checks.hpp — acceptance criteria as callable checks (used by `qbs check` and the acceptance test)

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qbs/analytic.hpp"
#include "qbs/io.hpp"
#include "qbs/langevin.hpp"
#include "qbs/lindblad.hpp"
#include "qbs/quadrature.hpp"
#include "qbs/spectroscopy.hpp"

namespace qbs {

enum class CheckLevel { quick, full };

struct CheckResult {
    int id{0};
    std::string name;
    bool passed{false};
    std::string detail;
    double seconds{0.0};
};

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_{std::chrono::steady_clock::now()};
};

inline std::string sci(double x, int digits = 3) {
    std::ostringstream os;
    os.precision(digits);
    os << std::scientific << x;
    return os.str();
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Finishes a result: pass requires the numeric test and the time budget.
inline CheckResult finish(int id, std::string name, bool ok, std::string detail, const Stopwatch& sw,
                          double budget_s) {
    const double t = sw.seconds();
    if (t > budget_s) {
        ok = false;
        detail += "; over time budget " + std::to_string(static_cast<int>(budget_s)) + " s";
    }
    return {id, std::move(name), ok, std::move(detail), t};
}

} // namespace detail

// ---------------------------------------------------------------------------
// 1. Analytic identities on random samples

struct IdentityReport {
    int failures{0};
    double worst{0.0};
    std::string first_failure;
};

inline IdentityReport analytic_identities(const AnalyticModel& m, int samples, std::uint64_t seed = 12345) {
    std::mt19937_64 rng(seed);
    auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    IdentityReport rep;
    auto note = [&](bool ok, double err, const std::string& what) {
        rep.worst = std::max(rep.worst, err);
        if (!ok && rep.failures++ == 0) rep.first_failure = what;
    };
    constexpr double rel = 1e-12, abs_tol = 1e-10;
    auto close = [&](cplx a, cplx b) {
        const double d = std::abs(a - b);
        return std::pair{d <= rel * std::max(std::abs(a), std::abs(b)) + abs_tol, d / std::max(std::abs(b), 1.0)};
    };
    for (int s = 0; s < samples; ++s) {
        const double g = U(0.3, 3.0);
        const auto p = CavityParams::from_drive_photons(g, U(-3.0, 3.0) * g, U(0.0, 2.0), U(0.0, 3.0));
        const double w1 = U(-5.0, 5.0) * g, w2 = U(-5.0, 5.0) * g, w3 = -(w1 + w2);
        const cplx S = m.s_total(p, {w1, w2});

        for (const FreqTriple perm : {FreqTriple{w2, w1}, FreqTriple{w1, w3}, FreqTriple{w3, w2}}) {
            const auto [ok, e] = close(m.s_total(p, perm), S);
            note(ok, e, "permutation symmetry");
        }
        {
            const auto [ok, e] = close(m.s_total(p, {-w1, -w2}), std::conj(S));
            note(ok, e, "hermitian symmetry");
        }
        for (const FreqTriple ax : {FreqTriple{0.0, w2}, FreqTriple{w1, 0.0}, FreqTriple{w1, -w1}}) {
            const cplx v = m.s_total(p, ax);
            const double im = std::abs(v.imag());
            note(im <= rel * std::abs(v) + abs_tol, im, "axis reality");
        }
        {
            const double th = m.s_thermal(p, {w1, w2});
            note(th >= 0.0, th < 0.0 ? -th : 0.0, "thermal positivity");
            const double cl = m.s_drive_classical_shape(p, {w1, w2});
            note(cl >= 0.0, cl < 0.0 ? -cl : 0.0, "classical-shape positivity");
        }
        {
            CavityParams q = p;
            q.delta = -p.delta;
            const auto [ok, e] = close(m.s_total(q, {w1, w2}), S);
            note(ok, e, "detuning parity");
        }
    }
    return rep;
}

inline CheckResult check_identities(const AnalyticModel& m = default_model(), int samples = 1000) {
    detail::Stopwatch sw;
    const auto rep = analytic_identities(m, samples);
    std::string d = std::to_string(samples) + " samples, worst deviation " + detail::sci(rep.worst);
    if (rep.failures) d += ", " + std::to_string(rep.failures) + " failures (first: " + rep.first_failure + ")";
    return detail::finish(1, "analytic identities", rep.failures == 0, d, sw, 5.0);
}

// ---------------------------------------------------------------------------
// 2. Fourier consistency of the thermal lag cumulant

inline CheckResult check_fourier(const AnalyticModel& m = default_model()) {
    detail::Stopwatch sw;
    const CavityParams p{1.0, 0.7, 0.0, 0.0, 1.0};
    const FreqGrid2D grid{{-1.3, -0.4, 0.0, 0.6, 1.7}, {-1.1, -0.2, 0.3, 0.9, 2.1}};
    const auto q = fourier_transform_2d([&](double a, double b) { return c_thermal_3(p, 0.0, a, b); },
                                        40.0 / p.gamma, grid, 1e-6, 201, 3201);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j)
            worst = std::max(worst, detail::rel_err(q.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                                                    m.s_thermal(p, {grid.omega1_values[i], grid.omega2_values[j]})));
    return detail::finish(2, "fourier consistency", worst < 1e-4,
                          "25 pairs, window 40/gamma, max relative error " + detail::sci(worst), sw, 10.0);
}

// ---------------------------------------------------------------------------
// 3. Master-equation cumulant against the thermal closed form

inline CheckResult check_lindblad_thermal() {
    detail::Stopwatch sw;
    const CavityParams p{1.0, 1.0, 0.0, 0.0, 1.0};
    const auto ws = build_workspace(p, 40);
    const std::vector<std::pair<double, double>> lags = {
        {0.3, 0.7},   {0.7, 0.3},   {-0.5, 0.8}, {0.8, -0.5}, {-1.2, -0.4}, {-0.4, -1.2}, {1.5, 1.5},
        {-1.0, -1.0}, {2.0, 0.5},   {0.5, 2.0},  {-2.0, 1.0}, {1.0, -2.0},  {0.25, 0.0}, {0.0, -0.6},
        {3.0, 1.0},   {-3.0, -2.5}, {1.1, 2.7},  {-0.9, 1.9}, {2.2, -1.4},  {0.1, 0.2}};
    double worst = 0.0;
    for (const auto& [a, b] : lags)
        worst = std::max(worst, detail::rel_err(keldysh_c3(ws, a, b), c_thermal_3(p, 0.0, a, b)));
    return detail::finish(3, "lindblad vs thermal cumulant", worst < 1e-3,
                          "20 lag pairs, dim 40, max relative error " + detail::sci(worst), sw, 120.0);
}

// ---------------------------------------------------------------------------
// 4. Master-equation bispectrum against the driven closed forms

inline const std::vector<std::pair<double, double>>& driven_oracle_pairs() {
    static const std::vector<std::pair<double, double>> v = {
        {-1.2, 0.3}, {-1.2, -0.3}, {-0.9, 1.2}, {-0.6, -0.6}, {0.3, 0.9},
        {0.6, -1.5}, {0.9, 0.3},   {1.2, -0.9}, {-1.5, -0.9}, {0.9, 0.9}};
    return v;
}

struct DrivenOracleCase {
    CavityParams params;
    std::vector<cplx> values; // at driven_oracle_pairs()
    double quadrature_error{0.0};
};

// The expensive half of criterion 4, computed once and reused for mutants.
inline std::vector<DrivenOracleCase> driven_oracle_cases(CheckLevel level, int threads = 1) {
    std::vector<double> temps = {0.0, 0.5};
    if (level == CheckLevel::quick) temps = {0.0};
    std::vector<double> w1s, w2s;
    for (const auto& [a, b] : driven_oracle_pairs()) {
        w1s.push_back(a);
        w2s.push_back(b);
    }
    std::sort(w1s.begin(), w1s.end());
    w1s.erase(std::unique(w1s.begin(), w1s.end()), w1s.end());
    std::sort(w2s.begin(), w2s.end());
    w2s.erase(std::unique(w2s.begin(), w2s.end()), w2s.end());
    const FreqGrid2D grid{w1s, w2s};
    auto index = [](const std::vector<double>& v, double x) {
        return static_cast<Eigen::Index>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };
    std::vector<DrivenOracleCase> out;
    for (double n_th : temps) {
        DrivenOracleCase c;
        c.params = CavityParams::from_drive_photons(1.0, 1.0, 0.5, n_th);
        const auto ws = build_workspace_auto(c.params, 25);
        OracleOptions opt;
        opt.threads = threads;
        const auto o = oracle_bispectrum(ws, grid, 30.0, 241, opt);
        for (const auto& [a, b] : driven_oracle_pairs()) {
            const Eigen::Index i = index(w1s, a), j = index(w2s, b);
            c.values.push_back(o.surface.values(i, j));
            c.quadrature_error = std::max(c.quadrature_error, o.quadrature_error(i, j));
        }
        out.push_back(std::move(c));
    }
    return out;
}

inline double driven_oracle_worst(const AnalyticModel& m, const std::vector<DrivenOracleCase>& cases) {
    double worst = 0.0;
    for (const auto& c : cases)
        for (std::size_t k = 0; k < c.values.size(); ++k) {
            const auto [a, b] = driven_oracle_pairs()[k];
            worst = std::max(worst, detail::rel_err(c.values[k], m.s_total(c.params, {a, b})));
        }
    return worst;
}

inline CheckResult check_lindblad_driven(const AnalyticModel& m, const std::vector<DrivenOracleCase>& cases,
                                         double oracle_seconds) {
    detail::Stopwatch sw;
    const double worst = driven_oracle_worst(m, cases);
    auto r = detail::finish(4, "lindblad vs driven bispectrum", worst < 0.05,
                            std::to_string(cases.size()) + " temperature(s) x 10 pairs, max relative error " +
                                detail::sci(worst),
                            sw, 1200.0);
    r.seconds += oracle_seconds;
    if (r.seconds > 1200.0) r.passed = false;
    return r;
}

// ---------------------------------------------------------------------------
// 5. Equal-time decomposition into anticommutator and double commutator

inline CheckResult check_skewness_decomposition() {
    detail::Stopwatch sw;
    const auto p = CavityParams::from_drive_photons(1.0, 5.0, 1.0, 0.0);
    const auto ws = build_workspace_auto(p);
    double worst = 0.0, asym = 0.0;
    for (int k = 1; k <= 10; ++k) {
        const double t = 0.25 * k;
        const double pos = keldysh_c3(ws, t, t), neg = keldysh_c3(ws, -t, -t);
        worst = std::max({worst, detail::rel_err(pos, skewness_decomposition(ws, t)),
                          detail::rel_err(neg, skewness_decomposition(ws, -t))});
        asym = std::max(asym, std::abs(pos - neg) / std::max(std::abs(pos), std::abs(neg)));
    }
    return detail::finish(5, "skewness decomposition", worst < 1e-6 && asym > 1e-3,
                          "10 times, max relative error " + detail::sci(worst) + ", max time asymmetry " +
                              detail::sci(asym),
                          sw, 60.0);
}

// ---------------------------------------------------------------------------
// 6. Phase drift of a weakly coupled probe

inline CheckResult check_spectroscopy(const AnalyticModel& m = default_model(), int threads = 1) {
    detail::Stopwatch sw;
    const auto p = CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0);
    const double omega = 3.0;
    const double t_f = default_duration(omega);
    const IntegratorConfig cfg;
    const auto est = estimate_im_bispectrum(p, omega, {0.05, 0.1, 0.2, 0.3}, t_f, cfg, threads);
    const double an = m.s_total(p, {omega, omega}).imag();
    const double rel = std::abs(est.estimate - an) / std::abs(an);
    const auto sc = scaling_exponent(p, omega, {0.03, 0.05, 0.1, 0.15, 0.2, 0.3}, t_f, cfg, threads);
    const bool ok = rel < 0.1 && sc.resolved && std::abs(sc.exponent - 3.0) <= 0.1;
    return detail::finish(6, "spectroscopy", ok,
                          "Im S estimate " + detail::sci(est.estimate, 4) + " vs " + detail::sci(an, 4) +
                              " (relative " + detail::sci(rel) + "), exponent " + std::to_string(sc.exponent),
                          sw, 300.0);
}

// ---------------------------------------------------------------------------
// 7. Classical Langevin bispectrum at large occupation

inline const std::vector<std::pair<double, double>>& langevin_pairs() {
    static const std::vector<std::pair<double, double>> v = {
        {0.3, 0.4}, {0.5, -0.2}, {1.0, 0.4}, {0.8, 0.8}, {1.5, -0.5}};
    return v;
}

inline CheckResult check_langevin(int threads = 1, std::uint64_t seed = 2024) {
    detail::Stopwatch sw;
    const auto p = CavityParams::from_drive_photons(1.0, 0.0, 50.0, 50.0);
    SdeConfig cfg;
    cfg.dt = 0.01;
    cfg.total_time = 200.0;
    cfg.burn_in = 10.0;
    cfg.n_traj = 2000;
    cfg.seed = seed;
    cfg.sample_stride = 10;
    const TrajectorySource src = [&](std::size_t i) { return simulate_driven_one(p, cfg, i); };
    std::vector<double> w1s, w2s;
    for (const auto& [a, b] : langevin_pairs()) {
        w1s.push_back(a);
        w2s.push_back(b);
    }
    std::sort(w1s.begin(), w1s.end());
    w1s.erase(std::unique(w1s.begin(), w1s.end()), w1s.end());
    std::sort(w2s.begin(), w2s.end());
    w2s.erase(std::unique(w2s.begin(), w2s.end()), w2s.end());
    // One pass over the ensemble for all points.
    const auto B = estimate_bispectrum(src, static_cast<std::size_t>(cfg.n_traj), FreqGrid2D{w1s, w2s}, 100.0,
                                       Window::hann, threads);
    double worst_sigma = 0.0, sum_rel = 0.0;
    const double th = 2.0 * p.n_th + 1.0;
    const double n_dr = intracavity_drive_photons(p);
    for (const auto& [a, b] : langevin_pairs()) {
        const auto i = static_cast<Eigen::Index>(std::find(w1s.begin(), w1s.end(), a) - w1s.begin());
        const auto j = static_cast<Eigen::Index>(std::find(w2s.begin(), w2s.end(), b) - w2s.begin());
        const double an = s_thermal(p, {a, b}) + n_dr * th * th * s_drive_classical_shape(p, {a, b});
        const cplx v = B.surface.values(i, j), se = B.surface.std_error(i, j);
        worst_sigma = std::max({worst_sigma, std::abs(v.real() - an) / se.real(), std::abs(v.imag()) / se.imag()});
        sum_rel += std::abs(v.real() - an) / an;
    }
    const double mean_rel = sum_rel / static_cast<double>(langevin_pairs().size());
    return detail::finish(7, "langevin vs classical bispectrum", worst_sigma <= 3.0 && mean_rel <= 0.1,
                          std::to_string(cfg.n_traj) + " trajectories, worst deviation " +
                              std::to_string(worst_sigma) + " sigma, mean systematic " + detail::sci(mean_rel),
                          sw, 600.0);
}

// ---------------------------------------------------------------------------
// 8. Squeezed bath

inline CheckResult check_squeezed(int threads = 1, std::uint64_t seed = 3) {
    detail::Stopwatch sw;
    double r0 = 0.0;
    for (double n : {0.0, 0.4, 2.0})
        for (double d : {0.0, 1.3})
            for (double t : {-2.0, -0.5, 0.3, 1.7}) {
                const double a = c3_squeezed_equal_time({1.0, d, 0.0, n}, t);
                const double b = c_thermal_3({1.0, d, 0.0, 0.0, n}, 0.0, t, t);
                r0 = std::max(r0, std::abs(a - b) / std::max(std::abs(b), 1e-300));
            }

    const SqueezedBathParams sp{1.0, 1.0, 0.5, 0.3};
    const auto ws = build_workspace(sp, 30);
    double worst = 0.0;
    for (double t : {-2.0, -1.2, -0.6, -0.2, 0.2, 0.6, 1.2, 2.0})
        worst = std::max(worst, detail::rel_err(keldysh_c3(ws, t, t), c3_squeezed_equal_time(sp, t)));

    SdeConfig cfg;
    cfg.dt = 0.01;
    cfg.total_time = 500.0;
    cfg.burn_in = 10.0;
    cfg.n_traj = 200;
    cfg.seed = seed;
    cfg.sample_stride = 10;
    const TrajectorySource src = [&](std::size_t i) { return simulate_squeezed_one(sp, cfg, i); };
    const auto diff = estimate_c3_difference(src, 200, {1.0, 1.0}, {-1.0, -1.0}, threads);
    const double sig = std::abs(diff.mean) / diff.stderr_;

    return detail::finish(8, "squeezed bath", r0 <= 1e-12 && worst < 0.02 && sig > 3.0,
                          "r=0 reduction " + detail::sci(r0) + ", lindblad max relative error " +
                              detail::sci(worst) + ", classical asymmetry " + std::to_string(sig) + " sigma",
                          sw, 300.0);
}

// ---------------------------------------------------------------------------
// 9. Figure surfaces, written to CSV and re-read

struct CsvSurface {
    std::vector<double> w1, w2, re, im;
};

inline CsvSurface read_surface_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    require(line == "omega1,omega2,re,im", "unexpected header in " + path.string());
    CsvSurface s;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string a, b, c, d;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        std::getline(ls, c, ',');
        std::getline(ls, d, ',');
        s.w1.push_back(std::stod(a));
        s.w2.push_back(std::stod(b));
        s.re.push_back(std::stod(c));
        s.im.push_back(std::stod(d));
    }
    return s;
}

struct FigureCase {
    std::string name;
    CavityParams params;
    Source source;
};

inline std::vector<FigureCase> figure_cases() {
    return {
        {"fig1a", CavityParams::from_drive_photons(1.0, 10.0, 1.0, 1e6), Source::analytic_total},
        {"fig1b", CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0), Source::analytic_drive},
        {"fig1c", CavityParams::from_drive_photons(1.0, 10.0, 1.0, 0.0), Source::analytic_total},
        {"fig2a", CavityParams::from_drive_photons(1.0, 0.0, 1.0, 0.0), Source::analytic_total},
        {"fig2b", CavityParams::from_drive_photons(1.0, 1.0, 1.0, 0.0), Source::analytic_total},
    };
}

inline CheckResult check_figures(const AnalyticModel& m, const std::filesystem::path& dir) {
    detail::Stopwatch sw;
    std::filesystem::create_directories(dir);
    std::string detail_text;
    bool ok = true;
    for (const auto& fc : figure_cases()) {
        const bool fig1 = fc.name.rfind("fig1", 0) == 0;
        const FreqGrid2D grid = fig1 ? FreqGrid2D::square(-15.0, 15.0, 101) : FreqGrid2D::square(-3.0, 3.0, 61);
        const auto path = dir / (fc.name + ".csv");
        write_atomic(path, surface_table(eval_surface(fc.params, grid, fc.source, m)).str());
        const auto s = read_surface_csv(path);
        double min_re = 1e300, max_re = -1e300, max_im = 0.0, axis_im = 0.0;
        for (std::size_t k = 0; k < s.re.size(); ++k) {
            min_re = std::min(min_re, s.re[k]);
            max_re = std::max(max_re, s.re[k]);
            max_im = std::max(max_im, std::abs(s.im[k]));
            const bool on_axis = s.w1[k] == 0.0 || s.w2[k] == 0.0 || std::abs(s.w1[k] + s.w2[k]) < 1e-12;
            if (on_axis) axis_im = std::max(axis_im, std::abs(s.im[k]));
        }
        bool good = s.re.size() == grid.rows() * grid.cols();
        if (fc.name == "fig1a") good = good && min_re > 0.0 && max_im < 1e-6 * max_re;
        else if (fig1) good = good && min_re < 0.0 && max_im > 0.0;
        else good = good && max_im > 1e-3 * max_re && axis_im <= 1e-10 * max_re;
        ok = ok && good;
        detail_text += fc.name + (good ? " ok " : " FAILED ");
    }
    return detail::finish(9, "figure surfaces", ok, detail_text, sw, 60.0);
}

// ---------------------------------------------------------------------------
// 10. Mutation sentinel

struct MutationOutcome {
    std::string term;
    bool caught{false};
    std::string by;
};

inline std::vector<MutationOutcome> mutation_outcomes(const std::vector<DrivenOracleCase>& cases, int samples = 200) {
    std::vector<MutationOutcome> out;
    for (const auto& t : FormulaTerms::catalogue()) {
        const AnalyticModel m(FormulaTerms::flipped(t.name));
        MutationOutcome o{t.name, false, ""};
        if (analytic_identities(m, samples).failures > 0) o = {t.name, true, "identities"};
        else if (!check_fourier(m).passed) o = {t.name, true, "fourier"};
        else if (driven_oracle_worst(m, cases) >= 0.05) o = {t.name, true, "lindblad driven"};
        out.push_back(o);
    }
    return out;
}

inline CheckResult check_mutations(const std::vector<DrivenOracleCase>& cases) {
    detail::Stopwatch sw;
    const auto outs = mutation_outcomes(cases);
    std::string missed;
    for (const auto& o : outs)
        if (!o.caught) missed += (missed.empty() ? "" : ", ") + o.term;
    return detail::finish(10, "mutation sentinel", missed.empty(),
                          std::to_string(outs.size()) + " single-term sign flips" +
                              (missed.empty() ? ", all caught" : ", missed: " + missed),
                          sw, 600.0);
}

// ---------------------------------------------------------------------------

struct SuiteOptions {
    CheckLevel level{CheckLevel::quick};
    int threads{1};
    std::filesystem::path scratch_dir{std::filesystem::temp_directory_path() / "qbs-check"};
    AnalyticModel model{};
    std::function<void(const CheckResult&)> on_result; // progress callback
};

inline std::vector<CheckResult> run_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    auto add = [&](CheckResult r) {
        if (opt.on_result) opt.on_result(r);
        out.push_back(std::move(r));
    };
    auto guarded = [&](int id, const char* name, const std::function<CheckResult()>& f) {
        try {
            add(f());
        } catch (const std::exception& e) {
            add({id, name, false, std::string("error: ") + e.what(), 0.0});
        }
    };
    const AnalyticModel& m = opt.model;
    guarded(1, "analytic identities", [&] { return check_identities(m); });
    guarded(2, "fourier consistency", [&] { return check_fourier(m); });
    guarded(3, "lindblad vs thermal cumulant", [&] { return check_lindblad_thermal(); });

    std::vector<DrivenOracleCase> cases;
    double oracle_s = 0.0;
    guarded(4, "lindblad vs driven bispectrum", [&] {
        detail::Stopwatch sw;
        cases = driven_oracle_cases(opt.level, opt.threads);
        oracle_s = sw.seconds();
        return check_lindblad_driven(m, cases, oracle_s);
    });
    guarded(5, "skewness decomposition", [&] { return check_skewness_decomposition(); });
    guarded(6, "spectroscopy", [&] { return check_spectroscopy(m, opt.threads); });
    guarded(7, "langevin vs classical bispectrum", [&] { return check_langevin(opt.threads); });
    guarded(8, "squeezed bath", [&] { return check_squeezed(opt.threads); });
    guarded(9, "figure surfaces", [&] { return check_figures(m, opt.scratch_dir); });
    guarded(10, "mutation sentinel", [&] {
        require(!cases.empty(), "driven oracle unavailable");
        return check_mutations(cases);
    });
    return out;
}

} // namespace qbs
