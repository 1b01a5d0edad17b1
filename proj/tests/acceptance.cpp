// acceptance.cpp — runs every acceptance criterion at full level, one PASS/FAIL line each

#include <cstdio>
#include <cstdlib>
#include <string>

#include "qbs/checks.hpp"

int main(int argc, char** argv) {
    qbs::SuiteOptions opt;
    opt.level = qbs::CheckLevel::full;
    if (argc > 1) opt.scratch_dir = argv[1];
    opt.on_result = [](const qbs::CheckResult& r) {
        std::printf("[%s] criterion %2d  %-34s %8.2f s  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.seconds, r.detail.c_str());
        std::fflush(stdout);
    };
    const auto results = qbs::run_suite(opt);

    // The sentinel is only meaningful if every mutant was caught; list them.
    const auto cases = qbs::driven_oracle_cases(qbs::CheckLevel::quick);
    for (const auto& m : qbs::mutation_outcomes(cases))
        std::printf("         mutant %-22s %s\n", m.term.c_str(), m.caught ? ("caught by " + m.by).c_str() : "MISSED");

    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
