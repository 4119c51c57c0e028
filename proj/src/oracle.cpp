#include "oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace rrw {

LatticeChain LatticeChain::from_model(const IncrementModel& m, int K) {
    if (!m.is_lattice())
        throw std::invalid_argument("LatticeChain: requires a lattice increment model");
    if (K < 1) throw std::invalid_argument("LatticeChain: K must be >= 1");
    LatticeChain c;
    c.support = m.support;
    c.prob = m.prob;
    c.K = K;
    return c;
}

int LatticeChain::next_state(int x, int u) const {
    return std::min(std::max(x + u, 0), K);
}

namespace {

// aggregated sparse forward transitions: for each x, the list (x', prob)
std::vector<std::vector<std::pair<int, double>>> forward_transitions(const LatticeChain& c) {
    std::vector<std::vector<std::pair<int, double>>> fwd(c.K + 1);
    for (int x = 0; x <= c.K; ++x) {
        for (size_t u = 0; u < c.support.size(); ++u) {
            const int t = c.next_state(x, c.support[u]);
            bool merged = false;
            for (auto& pr : fwd[x])
                if (pr.first == t) {
                    pr.second += c.prob[u];
                    merged = true;
                    break;
                }
            if (!merged) fwd[x].push_back({t, c.prob[u]});
        }
    }
    return fwd;
}

// reversed-chain transitions from each state: P*(x, y) = pi(y) P(y, x) / pi(x)
std::vector<std::vector<std::pair<int, double>>> reversed_transitions(
    const LatticeChain& c, const std::vector<double>& pi) {
    const auto fwd = forward_transitions(c);
    std::vector<std::vector<std::pair<int, double>>> rev(c.K + 1);
    for (int y = 0; y <= c.K; ++y) {
        if (pi[y] <= 0.0) continue;
        for (const auto& [t, pr] : fwd[y]) {
            if (pi[t] <= 0.0) continue;
            rev[t].push_back({y, pi[y] * pr / pi[t]});
        }
    }
    return rev;
}

}  // namespace

StationaryResult stationary(const LatticeChain& chain) {
    const int K = chain.K;
    const auto fwd = forward_transitions(chain);

    // communicating class of 0: forward-reachable states must return
    std::vector<char> reach(K + 1, 0);
    {
        std::vector<int> stack{0};
        reach[0] = 1;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (const auto& [t, pr] : fwd[x]) {
                (void)pr;
                if (!reach[t]) {
                    reach[t] = 1;
                    stack.push_back(t);
                }
            }
        }
        // states that can reach 0 (backward closure over reachable states)
        std::vector<char> back(K + 1, 0);
        back[0] = 1;
        bool changed = true;
        while (changed) {
            changed = false;
            for (int x = 0; x <= K; ++x) {
                if (!reach[x] || back[x]) continue;
                for (const auto& [t, pr] : fwd[x]) {
                    (void)pr;
                    if (back[t]) {
                        back[x] = 1;
                        changed = true;
                        break;
                    }
                }
            }
        }
        for (int x = 0; x <= K; ++x)
            if (reach[x] && !back[x])
                throw std::invalid_argument("stationary: class of 0 is not closed under return");
    }

    std::vector<int> states;
    for (int x = 0; x <= K; ++x)
        if (reach[x]) states.push_back(x);
    const int n = static_cast<int>(states.size());
    std::vector<int> index(K + 1, -1);
    for (int i = 0; i < n; ++i) index[states[i]] = i;

    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (const auto& [t, pr] : fwd[states[i]]) M(index[t], i) += pr;
        M(i, i) -= 1.0;
    }
    for (int j = 0; j < n; ++j) M(n - 1, j) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd x = lu.solve(b);
    for (int refine = 0; refine < 2; ++refine) {
        Eigen::VectorXd r = b - M * x;
        x += lu.solve(r);
    }

    StationaryResult res;
    res.pi.assign(K + 1, 0.0);
    double tot = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = std::max(x(i), 0.0);
        res.pi[states[i]] = v;
        tot += v;
    }
    for (auto& v : res.pi) v /= tot;

    // residual of the balance equations
    double resid = 0.0;
    std::vector<double> piP(K + 1, 0.0);
    for (int s = 0; s <= K; ++s)
        for (const auto& [t, pr] : fwd[s]) piP[t] += res.pi[s] * pr;
    for (int s = 0; s <= K; ++s) resid = std::max(resid, std::abs(piP[s] - res.pi[s]));
    res.residual = resid;

    // steady-state probability flow clipped at the cap
    double leak = 0.0;
    for (int s = 0; s <= K; ++s)
        for (size_t u = 0; u < chain.support.size(); ++u)
            if (s + chain.support[u] > K) leak += res.pi[s] * chain.prob[u];
    res.cap_mass = leak;
    return res;
}

namespace {

// area index increments per landing state: exact integers for p = 1,
// floor-rounded multiples of `bin` otherwise
std::vector<int> area_increments(int K, double p, double bin) {
    std::vector<int> inc(K + 1, 0);
    for (int x = 0; x <= K; ++x)
        inc[x] = (p == 1.0 && bin == 1.0)
                     ? x
                     : static_cast<int>(std::floor(std::pow(double(x), p) / bin));
    return inc;
}

inline int sat_add(int a, int d, int sat) { return std::min(a + d, sat); }

}  // namespace

DualityResult duality_check(const LatticeChain& chain, const std::vector<double>& pi,
                            int n, double b, double p, DualityMode mode,
                            double pi0_div) {
    if (n < 1) throw std::invalid_argument("duality_check: n must be >= 1");
    const int K = chain.K;
    const double nb = n * b;
    // integer-area threshold for "area > n b"
    double bin = 1.0;
    if (p != 1.0) bin = std::max(nb, 1.0) / 65536.0;
    const int thr = (p == 1.0) ? static_cast<int>(std::floor(nb)) + 1
                               : static_cast<int>(std::floor(nb / bin)) + 1;
    const auto inc = area_increments(K, p, bin);
    const double pi0 = pi0_div > 0.0 ? pi0_div : pi[0];
    if (!(pi0 > 0.0)) throw std::invalid_argument("duality_check: pi(0) must be positive");

    DualityResult res;
    if (mode == DualityMode::Exhaustive) {
        if (std::pow(double(chain.support.size()), n) > 2.5e7)
            throw std::invalid_argument("duality_check: exhaustive mode too large for this n");
        // forward side: paths from 0, area since the last visit to 0
        double lhs = 0.0;
        std::function<void(int, int, double, int)> go_fwd = [&](int step, int x, double pr,
                                                                int area) {
            if (step == n) {
                if (area >= thr) lhs += pr;
                return;
            }
            for (size_t u = 0; u < chain.support.size(); ++u) {
                const int t = chain.next_state(x, chain.support[u]);
                const int a2 = (t == 0) ? 0 : sat_add(area, inc[t], thr);
                go_fwd(step + 1, t, pr * chain.prob[u], a2);
            }
        };
        go_fwd(0, 0, 1.0, 0);
        // reversed side: start from pi, accumulate until the first zero,
        // require state 0 at time n
        const auto rev = reversed_transitions(chain, pi);
        double rhs = 0.0;
        std::function<void(int, int, double, int, bool)> go_rev =
            [&](int step, int x, double pr, int area, bool frozen) {
                if (step == n) {
                    if (x == 0 && area >= thr) rhs += pr;
                    return;
                }
                for (const auto& [y, q] : rev[x]) {
                    const bool fz = frozen || y == 0;
                    const int a2 = frozen ? area : sat_add(area, inc[y], thr);
                    go_rev(step + 1, y, pr * q, fz ? area : a2, fz || y == 0);
                }
            };
        for (int x0 = 0; x0 <= K; ++x0) {
            if (pi[x0] <= 0.0) continue;
            go_rev(0, x0, pi[x0], sat_add(0, inc[x0], thr), x0 == 0);
        }
        res.lhs = lhs;
        res.rhs = rhs / pi0;
    } else {
        const auto fwd = forward_transitions(chain);
        // forward DP over (state, area since last zero)
        std::vector<double> f((K + 1) * (thr + 1), 0.0), g(f.size(), 0.0);
        auto at = [&](std::vector<double>& v, int x, int a) -> double& {
            return v[size_t(x) * (thr + 1) + a];
        };
        at(f, 0, 0) = 1.0;
        for (int step = 0; step < n; ++step) {
            std::fill(g.begin(), g.end(), 0.0);
            for (int x = 0; x <= K; ++x)
                for (int a = 0; a <= thr; ++a) {
                    const double pr = at(f, x, a);
                    if (pr == 0.0) continue;
                    for (const auto& [t, q] : fwd[x]) {
                        const int a2 = (t == 0) ? 0 : sat_add(a, inc[t], thr);
                        at(g, t, a2) += pr * q;
                    }
                }
            f.swap(g);
        }
        double lhs = 0.0;
        for (int x = 0; x <= K; ++x) lhs += at(f, x, thr);
        // reversed DP with freezing at the first zero
        const auto rev = reversed_transitions(chain, pi);
        // state layout: frozen flag * (K+1) * (thr+1)
        std::vector<double> rf(2 * (K + 1) * (thr + 1), 0.0), rg(rf.size(), 0.0);
        auto rat = [&](std::vector<double>& v, int fr, int x, int a) -> double& {
            return v[(size_t(fr) * (K + 1) + x) * (thr + 1) + a];
        };
        for (int x0 = 0; x0 <= K; ++x0) {
            if (pi[x0] <= 0.0) continue;
            rat(rf, x0 == 0 ? 1 : 0, x0, sat_add(0, inc[x0], thr)) += pi[x0];
        }
        for (int step = 0; step < n; ++step) {
            std::fill(rg.begin(), rg.end(), 0.0);
            for (int fr = 0; fr < 2; ++fr)
                for (int x = 0; x <= K; ++x)
                    for (int a = 0; a <= thr; ++a) {
                        const double pr = rat(rf, fr, x, a);
                        if (pr == 0.0) continue;
                        for (const auto& [y, q] : rev[x]) {
                            if (fr) {
                                rat(rg, 1, y, a) += pr * q;
                            } else {
                                const bool fz = (y == 0);
                                const int a2 = fz ? a : sat_add(a, inc[y], thr);
                                rat(rg, fz ? 1 : 0, y, a2) += pr * q;
                            }
                        }
                    }
            rf.swap(rg);
        }
        double rhs = 0.0;
        for (int fr = 0; fr < 2; ++fr) rhs += rat(rf, fr, 0, thr);
        res.lhs = lhs;
        res.rhs = rhs / pi0;
    }
    res.gap = std::abs(res.lhs - res.rhs);
    return res;
}

LastCycleReport last_cycle_bounds_check(const LatticeChain& chain,
                                        const std::vector<double>& pi, int n, double x,
                                        double p) {
    if (n < 1) throw std::invalid_argument("last_cycle_bounds_check: n must be >= 1");
    const int K = chain.K;
    double bin = 1.0;
    if (p != 1.0) bin = std::max(x, 1.0) / 65536.0;
    // threshold for "area >= x" on the integer (or binned) lattice
    const int thr = (p == 1.0) ? static_cast<int>(std::ceil(x))
                               : static_cast<int>(std::ceil(x / bin));
    const auto inc = area_increments(K, p, bin);
    const double pi0 = pi[0];

    LastCycleReport rep;

    // reversed side: area from time 0 up to the first return to 0 (index >= 1),
    // chain pinned at 0 at time n
    {
        const auto rev = reversed_transitions(chain, pi);
        std::vector<double> rf(2 * (K + 1) * (thr + 1), 0.0), rg(rf.size(), 0.0);
        auto rat = [&](std::vector<double>& v, int fr, int xx, int a) -> double& {
            return v[(size_t(fr) * (K + 1) + xx) * (thr + 1) + a];
        };
        for (int x0 = 0; x0 <= K; ++x0)
            if (pi[x0] > 0.0) rat(rf, 0, x0, sat_add(0, inc[x0], thr)) += pi[x0];
        for (int step = 0; step < n; ++step) {
            std::fill(rg.begin(), rg.end(), 0.0);
            for (int fr = 0; fr < 2; ++fr)
                for (int xx = 0; xx <= K; ++xx)
                    for (int a = 0; a <= thr; ++a) {
                        const double pr = rat(rf, fr, xx, a);
                        if (pr == 0.0) continue;
                        for (const auto& [y, q] : rev[xx]) {
                            if (fr) {
                                rat(rg, 1, y, a) += pr * q;
                            } else {
                                // the first return (index >= 1) freezes the sum
                                const bool fz = (y == 0);
                                const int a2 = fz ? a : sat_add(a, inc[y], thr);
                                rat(rg, fz ? 1 : 0, y, a2) += pr * q;
                            }
                        }
                    }
            rf.swap(rg);
        }
        double lhs = 0.0;
        for (int fr = 0; fr < 2; ++fr) lhs += rat(rf, fr, 0, thr);
        rep.lhs = lhs;
    }

    const auto fwd = forward_transitions(chain);

    // forward stationary cycle tail: P_pi(area over [0, first return] >= x)
    {
        std::vector<double> f((K + 1) * (thr + 1), 0.0), g(f.size(), 0.0);
        auto at = [&](std::vector<double>& v, int xx, int a) -> double& {
            return v[size_t(xx) * (thr + 1) + a];
        };
        for (int x0 = 0; x0 <= K; ++x0)
            if (pi[x0] > 0.0) at(f, x0, sat_add(0, inc[x0], thr)) += pi[x0];
        double done_hit = 0.0;  // frozen with area >= x
        // iterate until the active mass is negligible
        for (int step = 0; step < 20000; ++step) {
            double active = 0.0;
            std::fill(g.begin(), g.end(), 0.0);
            for (int xx = 0; xx <= K; ++xx)
                for (int a = 0; a <= thr; ++a) {
                    const double pr = at(f, xx, a);
                    if (pr == 0.0) continue;
                    for (const auto& [t, q] : fwd[xx]) {
                        if (t == 0) {
                            if (a == thr) done_hit += pr * q;
                        } else {
                            at(g, t, sat_add(a, inc[t], thr)) += pr * q;
                            active += pr * q;
                        }
                    }
                }
            f.swap(g);
            if (active < 1e-18) break;
        }
        rep.upper = (n + 1.0) * done_hit;
    }

    // mixing threshold n0 and the horizon-limited lower bound from state 0
    {
        const auto p0 = return_probability(chain, n);
        int n0 = n + 1;
        for (int k = n; k >= 0; --k) {
            if (p0[k] >= pi0 / 2.0)
                n0 = k;
            else
                break;
        }
        // n0 = smallest k with P_0(X_j = 0) >= pi0/2 for all j in [k, n]
        rep.n0 = n0;
        rep.regime_ok = n0 <= n;

        const int horizon = std::max(n - n0, 0);
        std::vector<double> f((K + 1) * (thr + 1), 0.0), g(f.size(), 0.0);
        auto at = [&](std::vector<double>& v, int xx, int a) -> double& {
            return v[size_t(xx) * (thr + 1) + a];
        };
        at(f, 0, 0) = 1.0;
        double hit_in_time = 0.0, hit_total = 0.0;
        for (int step = 0; step < 20000; ++step) {
            double active = 0.0;
            std::fill(g.begin(), g.end(), 0.0);
            for (int xx = 0; xx <= K; ++xx)
                for (int a = 0; a <= thr; ++a) {
                    const double pr = at(f, xx, a);
                    if (pr == 0.0) continue;
                    for (const auto& [t, q] : fwd[xx]) {
                        if (t == 0) {
                            if (a == thr) {
                                hit_total += pr * q;
                                if (step + 1 <= horizon) hit_in_time += pr * q;
                            }
                        } else {
                            at(g, t, sat_add(a, inc[t], thr)) += pr * q;
                            active += pr * q;
                        }
                    }
                }
            f.swap(g);
            if (active < 1e-18) break;
        }
        rep.lower_core = 0.5 * pi0 * pi0 * hit_in_time;
        rep.dropped = 0.5 * pi0 * pi0 * (hit_total - hit_in_time);
    }

    rep.upper_ok = rep.lhs <= rep.upper + 1e-14;
    rep.lower_ok = rep.lhs >= rep.lower_core - 1e-14;
    return rep;
}

CycleLaw exact_cycle_law(const LatticeChain& chain, double p, long max_tau, double max_area) {
    if (max_tau < 1 || max_tau > 100000)
        throw std::invalid_argument("exact_cycle_law: max_tau out of range");
    const int K = chain.K;
    const auto fwd = forward_transitions(chain);
    CycleLaw law;

    // cycle-length law by forward DP killed at 0
    {
        std::vector<double> f(K + 1, 0.0), g(K + 1, 0.0);
        f[0] = 1.0;
        law.tau_pmf.assign(static_cast<size_t>(max_tau), 0.0);
        for (long step = 0; step < max_tau; ++step) {
            std::fill(g.begin(), g.end(), 0.0);
            double died = 0.0;
            for (int x = 0; x <= K; ++x) {
                if (f[x] == 0.0) continue;
                for (const auto& [t, q] : fwd[x]) {
                    if (t == 0)
                        died += f[x] * q;
                    else
                        g[t] += f[x] * q;
                }
            }
            law.tau_pmf[static_cast<size_t>(step)] = died;
            f.swap(g);
        }
        double leak = 0.0;
        for (int x = 1; x <= K; ++x) leak += f[x];
        law.tau_leak = leak;
        double e = 0.0;
        for (long m = 1; m <= max_tau; ++m) e += m * law.tau_pmf[static_cast<size_t>(m - 1)];
        law.Etau = e + leak * max_tau;  // lower bound on the truncated remainder
    }

    // area law by sweeping accumulated area: every in-excursion step adds at
    // least one area unit, so the recursion in `a` is strictly forward and
    // needs no time dimension
    {
        double bin = 1.0;
        bool exact = (p == 1.0);
        if (!exact) bin = max_area / 65536.0;
        const int bins = static_cast<int>(std::ceil(max_area / bin));
        const auto inc = area_increments(K, p, bin);
        const int window = *std::max_element(inc.begin(), inc.end()) + 1;
        if (static_cast<long>(window) * (K + 1) > 80'000'000)
            throw std::invalid_argument("exact_cycle_law: area sweep window too large");

        // ring buffer rows a .. a+window-1 of active mass per state
        std::vector<double> ring(static_cast<size_t>(window) * (K + 1), 0.0);
        auto cell = [&](long a, int x) -> double& {
            return ring[static_cast<size_t>(a % window) * (K + 1) + x];
        };
        std::vector<double> finished(static_cast<size_t>(bins) + 1, 0.0);
        double overflow = 0.0;

        // first step out of 0
        for (const auto& [t, q] : fwd[0]) {
            if (t == 0)
                finished[0] += q;
            else if (inc[t] <= bins)
                cell(inc[t], t) += q;
            else
                overflow += q;
        }
        for (long a = 0; a <= bins; ++a) {
            for (int x = 1; x <= K; ++x) {
                double& c = cell(a, x);
                if (c == 0.0) continue;
                const double pr = c;
                c = 0.0;
                for (const auto& [t, q] : fwd[x]) {
                    if (t == 0) {
                        finished[static_cast<size_t>(a)] += pr * q;
                    } else {
                        const long a2 = a + inc[t];
                        if (a2 <= bins)
                            cell(a2, t) += pr * q;
                        else
                            overflow += pr * q;
                    }
                }
            }
            // row a is spent; clear it for reuse at a + window
            for (int x = 0; x <= K; ++x) cell(a, x) = 0.0;
        }

        law.bin = bin;
        law.exact_bins = exact;
        law.area_tail.assign(static_cast<size_t>(bins) + 1, 0.0);
        double tail = overflow;
        for (long a = bins; a >= 0; --a) {
            tail += finished[static_cast<size_t>(a)];
            law.area_tail[static_cast<size_t>(a)] = tail;
        }
    }
    return law;
}

std::vector<double> return_probability(const LatticeChain& chain, int n) {
    const auto fwd = forward_transitions(chain);
    std::vector<double> f(chain.K + 1, 0.0), g(chain.K + 1, 0.0);
    f[0] = 1.0;
    std::vector<double> out;
    out.reserve(n + 1);
    out.push_back(1.0);
    for (int step = 1; step <= n; ++step) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int x = 0; x <= chain.K; ++x) {
            if (f[x] == 0.0) continue;
            for (const auto& [t, q] : fwd[x]) g[t] += f[x] * q;
        }
        f.swap(g);
        out.push_back(f[0]);
    }
    return out;
}

std::pair<int, int> tail_fit_window(const StationaryResult& st) {
    // fit only where pi stands clear of the linear-solve noise floor
    const double floor_val = std::max(1e3 * st.residual, 1e-250);
    int kmax = 0;
    for (int k = 0; k < static_cast<int>(st.pi.size()); ++k)
        if (st.pi[k] > floor_val) kmax = k;
    const int lo = std::max(1, kmax / 4);
    const int hi = std::max(lo + 1, (9 * kmax) / 10);
    return {lo, hi};
}

double stationary_log_tail_slope(const std::vector<double>& pi, int k_lo, int k_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int k = k_lo; k <= k_hi && k < static_cast<int>(pi.size()); ++k) {
        if (pi[k] <= 0.0) continue;
        const double xx = k, yy = std::log(pi[k]);
        sx += xx;
        sy += yy;
        sxx += xx * xx;
        sxy += xx * yy;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("stationary_log_tail_slope: not enough positive mass");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace rrw
