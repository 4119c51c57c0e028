#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"

namespace rrw {

// Experiment configuration: whitespace-separated "key value..." lines,
// '#' comments, later lines override earlier ones. serialize() emits a
// canonical form that re-parses to the same config.
struct ExperimentConfig {
    std::string model_family = "two-point";
    std::vector<double> model_params = {0.3};
    double p = 1.0;
    std::uint64_t seed = 20260810;
    std::string out_dir = "out";
    std::string format = "csv";

    // cycle-area tail
    long cycles = 10000000;
    std::vector<double> w1_levels;  // empty: derived from the solver value

    // in-progress-cycle tail
    long vbar_reps = 300000;
    std::vector<long> vbar_n = {64, 144, 256, 400};
    std::vector<double> vbar_b = {0.25, 1.0};
    std::string start_mode = "both";  // zero | warmed | both

    // finite-dimensional window check
    std::vector<double> findim_times = {0.5, 1.0};
    std::vector<double> findim_thresholds;  // empty: derived from lambda
    std::vector<long> findim_n = {64, 144, 256};
    long findim_reps = 200000;

    // solver
    int solver_m = 400;
    int bpi_k = 64;
    int bpi_m = 200;
    std::vector<double> y_grid;  // empty: 9 points on [0, 1.2 ybar]

    // oracle
    int oracle_K = 500;
    bool oracle_on = true;
    long oracle_max_tau = 10000;
    double oracle_max_area = 16384.0;
    int duality_n = 100;
    double duality_b = 0.5;

    // path diagnostics
    double m1p_mesh = 5e-4;
    std::vector<long> eqv_n = {1000, 10000, 100000};
    int eqv_reps = 31;

    // simulate command
    long sim_cycles = 100000;
    long sim_n = 10000;
    int sim_reps = 4;
    int sim_grid = 64;

    // estimation policy
    int min_exceed = 30;
    double band_z = 4.0;

    IncrementModel model() const;
    std::string serialize() const;
    std::uint64_t hash() const;  // FNV-1a over the canonical serialization

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);
};

}  // namespace rrw
