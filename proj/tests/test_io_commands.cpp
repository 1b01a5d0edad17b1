// test_io_commands.cpp — CSV/metadata output, subcommand results and CLI exit codes

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "qbs/commands.hpp"

using namespace qbs;
namespace fs = std::filesystem;

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::out_of_range("no column " + name);
    }
    std::vector<double> column(const std::string& name) const {
        const auto c = col(name);
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Table read_table(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    Table t;
    std::string line;
    std::getline(in, line);
    t.header = split(line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        for (const auto& c : split(line)) row.push_back(std::stod(c));
        EXPECT_EQ(row.size(), t.header.size());
        t.rows.push_back(std::move(row));
    }
    return t;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "qbs-test-io";
    fs::create_directories(d);
    return d / name;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QBS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

} // namespace

TEST(Io, Fmt17RoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
        EXPECT_EQ(std::stod(fmt17(x)), x);
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
    const auto p = scratch("sub/atomic.txt");
    fs::remove(p);
    write_atomic(p, "hello\n");
    write_atomic(p, "again\n");
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    EXPECT_EQ(s, "again");
    fs::path tmp = p;
    tmp += ".partial";
    EXPECT_FALSE(fs::exists(tmp));
}

TEST(Io, CsvRowWidthChecked) {
    CsvTable t;
    t.header = {"a", "b"};
    t.add({"1", "2"});
    EXPECT_THROW(t.add({"1"}), std::invalid_argument);
    EXPECT_EQ(t.str(), "a,b\n1,2\n");
}

TEST(Io, MetadataFields) {
    RunMeta m;
    m.command = "bispectrum";
    m.source = "lindblad";
    m.params = params_json(CavityParams{1.0, 2.0, 0.5, 0.0, 0.1});
    m.seeds = {42};
    const auto j = m.to_json();
    for (const char* k : {"tool", "version", "timestamp", "command", "source", "params", "seeds", "tolerances",
                          "diagnostics"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["params"]["delta"], 2.0);
    EXPECT_EQ(j["seeds"][0], 42);
    EXPECT_EQ(meta_path("x/out.csv").string(), "x/out.csv.meta.json");
}

TEST(Args, ParseValuesAndConflicts) {
    EXPECT_EQ(parse_values("0:1:3"), (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(parse_values("0.1, 2,3"), (std::vector<double>{0.1, 2.0, 3.0}));
    EXPECT_THROW(parse_values("a,b"), std::invalid_argument);
    CommandArgs a;
    a.n_dr = 1.0;
    a.drive_re = 0.5;
    EXPECT_THROW(resolve_cavity(a), std::invalid_argument);
    a.drive_re.reset();
    a.delta = 10.0;
    EXPECT_NEAR(intracavity_drive_photons(resolve_cavity(a)), 1.0, 1e-12);
    EXPECT_THROW(parse_window("kaiser"), std::invalid_argument);
}

TEST(Bispectrum, LargeDetuningSurface) {
    CommandArgs a;
    a.source = "analytic-drive";
    a.delta = 10.0;
    a.n_dr = 1.0;
    a.grid = "-15:15:101";
    a.out = scratch("drive.csv").string();
    cmd_bispectrum(a);
    const auto t = read_table(a.out);
    EXPECT_EQ(t.header, (std::vector<std::string>{"omega1", "omega2", "re", "im"}));
    ASSERT_EQ(t.rows.size(), 10201u);
    const auto re = t.column("re"), im = t.column("im");
    EXPECT_LT(*std::min_element(re.begin(), re.end()), 0.0);
    double max_im = 0.0;
    for (double v : im) max_im = std::max(max_im, std::abs(v));
    EXPECT_GT(max_im, 0.0);
    const auto j = read_json(meta_path(a.out));
    EXPECT_EQ(j["command"], "bispectrum");
    EXPECT_EQ(j["source"], "analytic-drive");
    EXPECT_NEAR(j["params"]["n_dr"].get<double>(), 1.0, 1e-12);
}

TEST(Bispectrum, HotCavityIsNearlyReal) {
    CommandArgs a;
    a.n_th = 1e6;
    a.n_dr = 1.0;
    a.delta = 10.0;
    a.grid = "-15:15:31";
    a.out = scratch("hot.csv").string();
    cmd_bispectrum(a);
    const auto t = read_table(a.out);
    double max_re = 0.0, max_im = 0.0;
    for (const auto& r : t.rows) {
        max_re = std::max(max_re, std::abs(r[2]));
        max_im = std::max(max_im, std::abs(r[3]));
    }
    EXPECT_LT(max_im / max_re, 1e-9);
}

TEST(Bispectrum, VacuumThermalIsZero) {
    CommandArgs a;
    a.source = "analytic-thermal";
    a.grid = "-2:2:5";
    a.out = scratch("vac.csv").string();
    cmd_bispectrum(a);
    for (const auto& r : read_table(a.out).rows) {
        EXPECT_EQ(r[2], 0.0);
        EXPECT_EQ(r[3], 0.0);
    }
}

TEST(Bispectrum, MasterEquationSourceWritesDiagnostics) {
    CommandArgs a;
    a.source = "lindblad";
    a.n_th = 1.0;
    a.grid = "0:0.5:2";
    a.window_T = 20.0;
    a.n_tau = 161;
    a.out = scratch("me.csv").string();
    cmd_bispectrum(a);
    const auto t = read_table(a.out);
    const CavityParams p{1.0, 0.0, 0.0, 0.0, 1.0};
    for (const auto& r : t.rows) EXPECT_NEAR(r[2] / s_thermal(p, {r[0], r[1]}), 1.0, 0.03);
    const auto j = read_json(meta_path(a.out));
    EXPECT_TRUE(j["params"].contains("dim"));
    EXPECT_TRUE(j["tolerances"].contains("quadrature_error_max"));
}

TEST(Bispectrum, RequiresOutput) {
    CommandArgs a;
    EXPECT_THROW(cmd_bispectrum(a), std::invalid_argument);
    a.out = scratch("x.csv").string();
    a.source = "magic";
    EXPECT_THROW(cmd_bispectrum(a), std::invalid_argument);
}

TEST(Skewness, MasterEquationIsTimeAsymmetric) {
    CommandArgs a;
    a.model = "shotnoise-lindblad";
    a.delta = 5.0;
    a.n_dr = 1.0;
    a.times = "0.5,1,1.5";
    a.out = scratch("skew.csv").string();
    cmd_skewness(a);
    const auto t = read_table(a.out);
    EXPECT_EQ(t.header, (std::vector<std::string>{"t", "c3_pos", "c3_neg", "c3_classical"}));
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& r : t.rows) EXPECT_GT(std::abs(r[1] - r[2]), 1e-3);
}

TEST(Skewness, AnalyticLimitsClassicalColumnSymmetric) {
    CommandArgs a;
    a.delta = 0.0;
    a.n_dr = 1.0;
    a.n_th = 0.5;
    a.times = "0:2:5";
    a.out = scratch("limits.csv").string();
    cmd_skewness(a);
    const auto t = read_table(a.out);
    ASSERT_EQ(t.rows.size(), 5u);
    // the classical column is evaluated at +t only, so compare against −t directly
    const auto p = resolve_cavity(a);
    for (const auto& r : t.rows)
        EXPECT_NEAR(r[3],
                    c_thermal_3(p, 0.0, -r[0], -r[0]) + 4.0 * c_drive_classical_equal_time(p, -r[0]),
                    1e-12 * std::abs(r[3]));
}

TEST(Skewness, UnsqueezedBathMatchesThermal) {
    CommandArgs a;
    a.model = "squeezed-analytic";
    a.delta = 1.0;
    a.r = 0.0;
    a.n_cl = 0.4;
    a.times = "0.5,1.5";
    a.out = scratch("sq.csv").string();
    cmd_skewness(a);
    const CavityParams p{1.0, 1.0, 0.0, 0.0, 0.4};
    for (const auto& r : read_table(a.out).rows) {
        EXPECT_NEAR(r[1], c_thermal_3(p, 0.0, r[0], r[0]), 1e-13);
        EXPECT_NEAR(r[2], r[1], 1e-13);
    }
    a.model = "bogus";
    EXPECT_THROW(cmd_skewness(a), std::invalid_argument);
}

TEST(Spectroscopy, CubicCouplingLaw) {
    CommandArgs a;
    a.delta = 10.0;
    a.n_dr = 1.0;
    a.omega = "3";
    a.lambdas = "0,0.05,0.1";
    a.out = scratch("spec.csv").string();
    cmd_spectroscopy(a);
    const auto t = read_table(a.out);
    ASSERT_EQ(t.rows.size(), 3u);
    const auto rate = t.column("im_chi_over_tf"), pred = t.column("analytic_prediction");
    EXPECT_EQ(rate[0], 0.0);
    EXPECT_EQ(pred[0], 0.0);
    EXPECT_NEAR(rate[1] / pred[1], 1.0, 0.1);
    EXPECT_NEAR(std::log(rate[2] / rate[1]) / std::log(2.0), 3.0, 0.1);
    for (double f : t.column("flag_sign_flip")) EXPECT_EQ(f, 0.0);
}

TEST(Spectroscopy, DistinctFrequenciesGiveDistinctPredictions) {
    CommandArgs a;
    a.delta = 1.0;
    a.n_dr = 1.0;
    a.omega = "0.7,2";
    a.lambdas = "0.1";
    a.out = scratch("spec2.csv").string();
    cmd_spectroscopy(a);
    const auto t = read_table(a.out);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_NE(t.rows[0][3], t.rows[1][3]);
    EXPECT_TRUE(read_json(meta_path(a.out))["params"].contains("t_f"));
}

TEST(Cli, ExitCodes) {
    const auto out = scratch("cli.csv").string();
    EXPECT_EQ(run_cli("--version"), 0);
    EXPECT_EQ(run_cli("bispectrum --source analytic-total --grid -1:1:3 --out " + out), 0);
    EXPECT_TRUE(fs::exists(out));
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("bispectrum --no-such-flag 1"), 1);
    EXPECT_EQ(run_cli("bispectrum --grid 1:0:3 --out " + out), 1);
    EXPECT_EQ(run_cli("bispectrum --ndr 1 --drive-re 0.5 --out " + out), 1);
}

TEST(Cli, ConfigFileAndOverride) {
    const auto cfg = scratch("run.cfg");
    const auto out = scratch("cfg.csv");
    {
        std::ofstream f(cfg);
        f << "source=analytic-thermal\nnth=1\ngrid=0:0:1\nout=" << out.string() << "\n";
    }
    ASSERT_EQ(run_cli("bispectrum --config " + cfg.string()), 0);
    EXPECT_DOUBLE_EQ(read_table(out).rows.at(0)[2], 36.0);
    ASSERT_EQ(run_cli("bispectrum --config " + cfg.string() + " --nth 0"), 0);
    EXPECT_EQ(read_table(out).rows.at(0)[2], 0.0);
}

TEST(Cli, MutatedModelFailsCheck) {
    EXPECT_EQ(run_cli("check --level quick --mutation quantum.prefactor"), 3);
    EXPECT_EQ(run_cli("check --mutation no.such.term"), 1);
}
