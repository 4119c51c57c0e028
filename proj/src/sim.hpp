#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rates.hpp"

namespace rrw {

// X_{n+1} = [X_n + U_{n+1}]^+ from X_0 = 0; the clip produces exact zeros,
// so regenerations are detected by equality.
std::vector<double> simulate_chain(const IncrementModel& m, long n,
                                   std::uint64_t seed, std::uint64_t stream);

// exactly `count` completed regeneration cycles (length, area, peak)
std::vector<CycleRecord> harvest_cycles(const IncrementModel& m, long count, double p,
                                        std::uint64_t seed, std::uint64_t stream);

enum class StartMode { Zero, Warmed };

// one draw of the scaled area of the cycle in progress at time n:
// (1/n) * sum_{i > last regeneration} X_i^p. A warmed start discards a
// burn-in of roughly 50 mean cycle lengths before the window opens.
double sample_Vbar(const IncrementModel& m, long n, double p, std::uint64_t seed,
                   std::uint64_t stream, StartMode start, long warm_steps = -1);

struct ScaledProcessSample {
    long n = 0;
    std::vector<double> grid;   // t values in [0, 1]
    std::vector<double> Ybar;   // (1/n) sum_{i <= nt} X_i^p
    std::vector<double> Zbar;   // (1/n) sum of completed-cycle areas by nt
    double Vbar = 0.0;          // area of the in-progress cycle at n, / n
    long cycles = 0;            // N(n)
    // staircase corners of the two processes, for graph construction:
    // (t, value) after each step where the value moved
    std::vector<std::pair<double, double>> Ysteps, Zsteps;
};

std::vector<ScaledProcessSample> sample_paths(const IncrementModel& m, long n, double p,
                                              const std::vector<double>& grid,
                                              int replications, std::uint64_t seed,
                                              std::uint64_t stream0,
                                              bool record_steps = false);

// warm-up length used by the Warmed start when none is supplied
long default_warm_steps(const IncrementModel& m, double p, std::uint64_t seed);

}  // namespace rrw
