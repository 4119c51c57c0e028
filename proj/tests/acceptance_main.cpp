// Acceptance gate: runs every criterion of the verification suite against
// the reference configuration and prints one line per criterion. Exits
// nonzero if anything fails. Pass a config file path to override the
// defaults (e.g. smaller budgets, which soft-skip the Monte Carlo
// criteria).

#include <cstdio>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiment.hpp"

int main(int argc, char** argv) {
    using namespace rrw;
    ExperimentConfig cfg;
    if (argc > 1) {
        try {
            cfg = ExperimentConfig::load(argv[1]);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return 2;
        }
    }
    cfg.out_dir = "acceptance_out";

    std::vector<CriterionResult> results;
    try {
        results = run_acceptance(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance suite error: %s\n", e.what());
        return 2;
    }

    int failures = 0;
    for (const auto& r : results) {
        std::printf("%-4s %2d %-28s measured %.6g  tolerance %.6g  (%.1fs)  %s\n",
                    r.status.c_str(), r.id, r.name.c_str(), r.measured, r.tolerance,
                    r.seconds, r.detail.c_str());
        if (r.status == "FAIL") ++failures;
    }
    std::printf("%s: %d/%zu criteria failed\n", failures ? "FAIL" : "PASS", failures,
                results.size());
    return failures ? 1 : 0;
}
