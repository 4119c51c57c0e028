#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rrw {

namespace {

inline double step_chain(double x, double u) { return std::max(x + u, 0.0); }

inline double area_term(double x, double p) {
    if (x == 0.0) return 0.0;
    return p == 1.0 ? x : std::pow(x, p);
}

}  // namespace

std::vector<double> simulate_chain(const IncrementModel& m, long n,
                                   std::uint64_t seed, std::uint64_t stream) {
    if (n < 1) throw std::invalid_argument("simulate_chain: n must be >= 1");
    RngStream rng(seed, stream);
    std::vector<double> x(static_cast<size_t>(n));
    double cur = 0.0;
    for (long i = 0; i < n; ++i) {
        cur = step_chain(cur, sample_one(m, rng));
        x[static_cast<size_t>(i)] = cur;
    }
    return x;
}

std::vector<CycleRecord> harvest_cycles(const IncrementModel& m, long count, double p,
                                        std::uint64_t seed, std::uint64_t stream) {
    if (count < 1) throw std::invalid_argument("harvest_cycles: count must be >= 1");
    RngStream rng(seed, stream);
    std::vector<CycleRecord> out;
    out.reserve(static_cast<size_t>(count));
    double x = 0.0;
    CycleRecord cur;
    while (static_cast<long>(out.size()) < count) {
        x = step_chain(x, sample_one(m, rng));
        cur.tau += 1;
        cur.W += area_term(x, p);
        cur.peak = std::max(cur.peak, x);
        if (x == 0.0) {
            out.push_back(cur);
            cur = CycleRecord{};
        }
    }
    return out;
}

long default_warm_steps(const IncrementModel& m, double p, std::uint64_t seed) {
    // 50 mean cycle lengths, with the mean taken from a short pilot run
    const auto pilot = harvest_cycles(m, 512, p, seed, 0x77a7u);
    double st = 0.0;
    for (const auto& c : pilot) st += c.tau;
    return static_cast<long>(std::ceil(50.0 * st / pilot.size()));
}

double sample_Vbar(const IncrementModel& m, long n, double p, std::uint64_t seed,
                   std::uint64_t stream, StartMode start, long warm_steps) {
    if (n < 1) throw std::invalid_argument("sample_Vbar: n must be >= 1");
    RngStream rng(seed, stream);
    double x = 0.0;
    if (start == StartMode::Warmed) {
        long w = warm_steps;
        if (w < 0) w = 0;
        for (long i = 0; i < w; ++i) x = step_chain(x, sample_one(m, rng));
    }
    double partial = 0.0;
    for (long i = 0; i < n; ++i) {
        x = step_chain(x, sample_one(m, rng));
        if (x == 0.0)
            partial = 0.0;
        else
            partial += area_term(x, p);
    }
    return partial / static_cast<double>(n);
}

std::vector<ScaledProcessSample> sample_paths(const IncrementModel& m, long n, double p,
                                              const std::vector<double>& grid,
                                              int replications, std::uint64_t seed,
                                              std::uint64_t stream0, bool record_steps) {
    if (n < 1) throw std::invalid_argument("sample_paths: n must be >= 1");
    for (size_t g = 1; g < grid.size(); ++g)
        if (!(grid[g] >= grid[g - 1]))
            throw std::invalid_argument("sample_paths: grid must be sorted");
    for (double t : grid)
        if (!(t >= 0.0 && t <= 1.0))
            throw std::invalid_argument("sample_paths: grid values must lie in [0,1]");

    std::vector<ScaledProcessSample> out;
    out.reserve(static_cast<size_t>(replications));
    const double inv_n = 1.0 / static_cast<double>(n);

    for (int rep = 0; rep < replications; ++rep) {
        RngStream rng(seed, stream0 + static_cast<std::uint64_t>(rep));
        ScaledProcessSample s;
        s.n = n;
        s.grid = grid;
        s.Ybar.assign(grid.size(), 0.0);
        s.Zbar.assign(grid.size(), 0.0);

        double x = 0.0;
        double completed = 0.0;  // sum of finished cycle areas
        double partial = 0.0;    // area of the cycle in progress
        size_t gi = 0;
        while (gi < grid.size() && static_cast<long>(std::floor(grid[gi] * n)) < 1) {
            // grid points before the first step see the empty sums
            s.Ybar[gi] = 0.0;
            s.Zbar[gi] = 0.0;
            ++gi;
        }
        for (long i = 1; i <= n; ++i) {
            x = step_chain(x, sample_one(m, rng));
            if (x == 0.0) {
                completed += partial;
                partial = 0.0;
                s.cycles += 1;
                if (record_steps) s.Zsteps.push_back({i * inv_n, completed * inv_n});
            } else {
                partial += area_term(x, p);
                if (record_steps) s.Ysteps.push_back({i * inv_n, (completed + partial) * inv_n});
            }
            while (gi < grid.size() && static_cast<long>(std::floor(grid[gi] * n)) == i) {
                s.Ybar[gi] = (completed + partial) * inv_n;
                s.Zbar[gi] = completed * inv_n;
                ++gi;
            }
        }
        while (gi < grid.size()) {
            s.Ybar[gi] = (completed + partial) * inv_n;
            s.Zbar[gi] = completed * inv_n;
            ++gi;
        }
        s.Vbar = partial * inv_n;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace rrw
