#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace rrw {

// Runs one CLI subcommand: conjugate, rate, simulate, tail-w1, tail-vbar,
// findim, oracle, or verify. Writes CSV tables plus JSON sidecars under
// cfg.out_dir and returns the summary JSON text. Pure function of the
// config; repeated runs produce identical outputs.
std::string run_command(const std::string& cmd, const ExperimentConfig& cfg);

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string status;  // PASS | FAIL | SKIP
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
    double seconds = 0.0;
};

// The acceptance suite: every criterion with its pinned tolerance, run in
// dependency order. Writes the verdict table under cfg.out_dir.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg);

}  // namespace rrw
