#pragma once

#include <utility>
#include <vector>

#include "model.hpp"

namespace rrw {

// Finite-state truncation of the reflected chain for lattice increments:
// states 0..K with X' = min(max(X + U, 0), K). Everything here is exact
// up to the reported truncation leak.
struct LatticeChain {
    std::vector<int> support;
    std::vector<double> prob;
    int K = 0;

    static LatticeChain from_model(const IncrementModel& m, int K);
    int next_state(int x, int u) const;
};

struct StationaryResult {
    std::vector<double> pi;   // over states 0..K
    double residual = 0.0;    // max |pi P - pi|
    double cap_mass = 0.0;    // probability flow clipped at the cap in steady state
};

// pi P = pi by dense solve with iterative refinement; throws on a chain
// whose class containing 0 is not closed under return
StationaryResult stationary(const LatticeChain& chain);

enum class DualityMode { Exhaustive, DP };

struct DualityResult {
    double lhs = 0.0;  // forward chain from 0
    double rhs = 0.0;  // reversed stationary chain, weighted by 1/pi(0)
    double gap = 0.0;
};

// Both sides of the time-reversal identity for the event "the area since
// the last visit to 0 exceeds n*b at time n". The reversed side is
// normalized by pi0_div (default pi[0]); passing a wrong value is the
// negative control and shows up as a large gap.
DualityResult duality_check(const LatticeChain& chain, const std::vector<double>& pi,
                            int n, double b, double p, DualityMode mode,
                            double pi0_div = -1.0);

struct LastCycleReport {
    double lhs = 0.0;          // reversed-cycle area tail at horizon n
    double upper = 0.0;        // (n+1) * stationary forward-cycle tail
    double lower_core = 0.0;   // (pi0^2/2) * P_0(cycle area >= x, T <= n - n0)
    double dropped = 0.0;      // part of the lower bound cut by the horizon
    int n0 = 0;                // mixing threshold used by the lower bound
    bool upper_ok = false;
    bool lower_ok = false;
    bool regime_ok = false;    // n >= n0, the precondition of the lower bound
};

LastCycleReport last_cycle_bounds_check(const LatticeChain& chain,
                                        const std::vector<double>& pi, int n, double x,
                                        double p);

struct CycleLaw {
    std::vector<double> tau_pmf;    // P(T1 = m), m = 1..max_tau
    double tau_leak = 0.0;          // P(T1 > max_tau)
    double Etau = 0.0;
    std::vector<double> area_tail;  // P(W1 >= k * bin) for k = 0..bins
    double bin = 1.0;               // 1 for integer areas (p = 1)
    bool exact_bins = false;        // true when areas live on the bin lattice
};

// Law of one regeneration cycle by forward dynamic programming. The area
// tail is swept by accumulated area (every in-excursion step adds >= 1),
// so it carries no time-truncation error; mass beyond the last bin is
// counted into the tail, keeping P(W1 >= t) exact for t within range.
CycleLaw exact_cycle_law(const LatticeChain& chain, double p, long max_tau, double max_area);

// P_0(X_k = 0) for k = 0..n
std::vector<double> return_probability(const LatticeChain& chain, int n);

// least-squares slope of log pi(k) over a state window
double stationary_log_tail_slope(const std::vector<double>& pi, int k_lo, int k_hi);

// widest state window where pi is resolvable above the solve noise
std::pair<int, int> tail_fit_window(const StationaryResult& st);

}  // namespace rrw
