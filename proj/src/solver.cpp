#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace rrw {

namespace {

// ---------- small numeric helpers ----------

// int_0^d (a + s u)^pow du, nonnegative linear stretch
double pint(double a, double s, double d, double pw) {
    if (d <= 0.0) return 0.0;
    const double b = a + s * d;
    if (pw == 1.0) return d * 0.5 * (a + b);
    if (std::abs(s) * d <= 1e-12 * (std::abs(a) + std::abs(b) + 1e-300))
        return std::pow(std::max(0.5 * (a + b), 0.0), pw) * d;
    return (std::pow(std::max(b, 0.0), pw + 1.0) - std::pow(std::max(a, 0.0), pw + 1.0)) /
           (s * (pw + 1.0));
}

// int_0^d pw (a + s u)^{pw-1} du
double dpint(double a, double s, double d, double pw) {
    if (d <= 0.0) return 0.0;
    const double b = a + s * d;
    if (pw == 1.0) return d;
    if (std::abs(s) * d <= 1e-12 * (std::abs(a) + std::abs(b) + 1e-300))
        return pw * std::pow(std::max(0.5 * (a + b), 0.0), pw - 1.0) * d;
    return (std::pow(std::max(b, 0.0), pw) - std::pow(std::max(a, 0.0), pw)) / s;
}

// int_0^d pw (a + s u)^{pw-1} u du
double dtpint(double a, double s, double d, double pw) {
    if (d <= 0.0) return 0.0;
    const double b = a + s * d;
    if (std::abs(s) * d <= 1e-12 * (std::abs(a) + std::abs(b) + 1e-300))
        return pw * std::pow(std::max(0.5 * (a + b), 0.0), pw - 1.0) * 0.5 * d * d;
    const double bp = std::pow(std::max(b, 0.0), pw), ap = std::pow(std::max(a, 0.0), pw);
    const double bp1 = std::pow(std::max(b, 0.0), pw + 1.0), ap1 = std::pow(std::max(a, 0.0), pw + 1.0);
    // substitute x = a + s u: (1/s^2) [ pw/(pw+1) (b^{pw+1} - a^{pw+1}) - a (b^pw - a^pw) ]
    return (pw / (pw + 1.0) * (bp1 - ap1) - a * (bp - ap)) / (s * s);
}

// golden-section minimization on [a, b]
template <class F>
double golden_min(F&& f, double a, double b, int iters, double* fbest = nullptr) {
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    const double x = (f1 <= f2) ? x1 : x2;
    if (fbest) *fbest = std::min(f1, f2);
    return x;
}

// upper slope cap: keeps the conjugate and its gradient well defined
double slope_cap(const RateContext& ctx) {
    const double sup = ctx.model.ess_sup();
    if (std::isfinite(sup)) return sup * (1.0 - 1e-9);
    const ConvexConjugate conj = ctx.conjugate();
    double v = std::max(std::abs(ctx.model.mu), 1.0);
    while (legendre(conj, v) < 200.0) v *= 2.0;
    return v;
}

}  // namespace

HorizonBound horizon_bound(const RateContext& ctx, double y, double level) {
    if (!(ctx.model.mu < 0.0)) throw std::invalid_argument("horizon_bound: requires E U < 0");
    if (!(y >= 0.0) || !(level > 0.0)) throw std::invalid_argument("horizon_bound: bad arguments");
    // constraint level enters through exact scaling of paths
    const double c = std::pow(level, 1.0 / (1.0 + ctx.p));
    const double ys = y / c;

    const double mu = ctx.model.mu;
    const double ybar = ctx.ybar();
    HorizonBound hb;
    hb.y = y;
    hb.w = mu / 2.0;
    if (ys >= ybar) {
        hb.z = -mu;
        hb.M = c * (ys / -mu);
        return hb;
    }
    const ConvexConjugate conj = ctx.conjugate();
    const double target = 2.0 * legendre(conj, -mu);
    double z = -mu;
    // ascend toward the point where Lambda*(z) = target; fall back to |mu|
    {
        const double sup = ctx.model.ess_sup();
        double hi = std::isfinite(sup) ? sup * (1.0 - 1e-12) : std::max(1.0, -2.0 * mu);
        if (!std::isfinite(sup)) {
            while (legendre(conj, hi) < target && hi < 1e12) hi *= 2.0;
        }
        if (legendre(conj, hi) >= target) {
            double lo = -mu;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (legendre(conj, mid) >= target)
                    hi = mid;
                else
                    lo = mid;
                if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
            }
            z = 0.5 * (lo + hi);
        }
    }
    hb.z = z;
    const double Lz = legendre(conj, z);
    const double Lw = legendre(conj, hb.w);
    const double t1 = (ybar - ys) * Lz / (z * Lw);
    const double t2 = (ybar - ys) / z + ybar / -mu;
    const double up = std::isfinite(ctx.model.theta_plus)
                          ? (ybar - ys) * Lz / (z * ctx.model.theta_plus)
                          : 0.0;
    const double t3 = (ys + up) / -hb.w;
    hb.M = c * std::max({t1, t2, t3});
    return hb;
}

// ---------- direct solver ----------

namespace {

struct DirectEval {
    double F = 0.0;       // cost
    double Phi = 0.0;     // area of the positive part up to the first return
    double tau = kInf;    // first return time (kInf if none within T)
};

class DirectProblem {
public:
    DirectProblem(const RateContext& ctx, double y, int m, double level, double T)
        : ctx_(ctx), conj_(ctx.conjugate()), y_(y), m_(m), level_(level), T_(T),
          dt_(T / m), vlo_(ctx.model.mu), vhi_(slope_cap(ctx)) {}

    double dt() const { return dt_; }
    double vlo() const { return vlo_; }
    double vhi() const { return vhi_; }

    // evaluate cost, area, and optionally their gradients
    DirectEval eval(const std::vector<double>& v, std::vector<double>* gF = nullptr,
                    std::vector<double>* gPhi = nullptr) const {
        DirectEval e;
        const double pw = ctx_.p;
        if (gF) gF->assign(m_, 0.0);
        if (gPhi) gPhi->assign(m_, 0.0);
        std::vector<double> I1;
        if (gPhi) I1.assign(m_, 0.0);

        double x = y_;
        bool alive = true;
        for (int j = 0; j < m_; ++j) {
            const double c = legendre(conj_, v[j]);
            e.F += dt_ * c;
            if (gF) (*gF)[j] = dt_ * legendre_grad(conj_, v[j]);

            if (!alive) continue;
            const double b = x + dt_ * v[j];
            double d = dt_;
            if (x <= 0.0) {
                if (b <= x || x < 0.0) {
                    alive = false;
                    if (e.tau == kInf) e.tau = j * dt_;
                    continue;
                }
                // rising from an exact zero start
            } else if (b <= 0.0) {
                d = x / (-v[j]);
                e.tau = j * dt_ + d;
                alive = false;
            }
            e.Phi += pint(x, v[j], d, pw);
            if (gPhi) {
                I1[j] = dpint(x, v[j], d, pw);
                (*gPhi)[j] += dtpint(x, v[j], d, pw);
            }
            x = b;
        }
        if (gPhi) {
            double suffix = 0.0;
            for (int j = m_ - 1; j >= 0; --j) {
                (*gPhi)[j] += dt_ * suffix;
                suffix += I1[j];
            }
        }
        return e;
    }

    // projection onto { v nonincreasing, vlo <= v <= vhi }
    void project(std::vector<double>& v) const {
        // pool-adjacent-violators for the nonincreasing order, then clip
        static thread_local std::vector<double> sum;
        static thread_local std::vector<int> cnt;
        sum.clear();
        cnt.clear();
        for (double x : v) {
            sum.push_back(x);
            cnt.push_back(1);
            while (sum.size() >= 2) {
                const size_t k = sum.size();
                if (sum[k - 1] / cnt[k - 1] > sum[k - 2] / cnt[k - 2]) {
                    sum[k - 2] += sum[k - 1];
                    cnt[k - 2] += cnt[k - 1];
                    sum.pop_back();
                    cnt.pop_back();
                } else {
                    break;
                }
            }
        }
        size_t j = 0;
        for (size_t blk = 0; blk < sum.size(); ++blk) {
            const double val = std::min(std::max(sum[blk] / cnt[blk], vlo_), vhi_);
            for (int r = 0; r < cnt[blk]; ++r) v[j++] = val;
        }
    }

    // largest achievable area (constant profile at the slope cap)
    double max_area() const {
        return pint(y_, vhi_, T_, ctx_.p);
    }

    // feasible starting profile: constant slope with area ~ 1.2 * level
    std::vector<double> init_profile() const {
        double lo = vlo_, hi = vhi_;
        const double want = std::min(1.2 * level_, 0.995 * max_area());
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            std::vector<double> v(m_, mid);
            if (eval(v).Phi >= want)
                hi = mid;
            else
                lo = mid;
        }
        return std::vector<double>(m_, hi);
    }

    struct ALOut {
        std::vector<double> v;
        double F = 0.0, Phi = 0.0;
        double ell = 0.0;
        int iters = 0;
        bool feasible = false;
    };

    // augmented Lagrangian on Phi >= level with projected-gradient inner steps
    ALOut solve(std::vector<double> v0, int inner_budget = 160) const {
        ALOut out;
        if (max_area() < level_) return out;  // infeasible at this horizon
        std::vector<double> v = std::move(v0);
        if (static_cast<int>(v.size()) != m_) v = init_profile();
        project(v);

        const double rho0 = 8.0 / std::max(level_, 1e-6);
        double lam = 0.0, rho = rho0;
        double viol_prev = kInf;
        std::vector<double> gF, gPhi, w;
        double step = 0.05;
        int total_iters = 0;

        auto psi = [&](const DirectEval& e) {
            const double t = std::max(0.0, lam + rho * (level_ - e.Phi));
            return e.F + (t * t - lam * lam) / (2.0 * rho);
        };

        for (int outer = 0; outer < 20; ++outer) {
            step = std::max(step, 1e-3);
            DirectEval e = eval(v, &gF, &gPhi);
            double cur = psi(e);
            for (int it = 0; it < inner_budget; ++it) {
                ++total_iters;
                const double t = std::max(0.0, lam + rho * (level_ - e.Phi));
                // grad psi = gF - t * gPhi
                w = v;
                bool improved = false;
                for (int ls = 0; ls < 40; ++ls) {
                    for (int j = 0; j < m_; ++j) w[j] = v[j] - step * (gF[j] - t * gPhi[j]);
                    project(w);
                    DirectEval ew = eval(w);
                    const double pw_ = psi(ew);
                    if (pw_ <= cur - 1e-15 * std::max(1.0, std::abs(cur))) {
                        double delta = 0.0;
                        for (int j = 0; j < m_; ++j) delta = std::max(delta, std::abs(w[j] - v[j]));
                        v.swap(w);
                        e = ew;
                        cur = pw_;
                        step *= 1.7;
                        improved = true;
                        if (delta < 1e-13 * std::max(1.0, std::abs(vhi_))) it = inner_budget;
                        break;
                    }
                    step *= 0.3;
                    if (step < 1e-17) break;
                }
                if (!improved) break;
                eval(v, &gF, &gPhi);
            }
            const double c = level_ - e.Phi;
            const double viol = std::max(c, 0.0);
            lam = std::max(0.0, lam + rho * c);
            if (viol <= 1e-12 * level_ && outer >= 3 && lam * viol <= 1e-10) break;
            if (viol > 0.5 * viol_prev && outer > 0) rho = std::min(rho * 2.0, 1e5 * rho0);
            viol_prev = viol;
        }

        // feasibility restoration: lift the profile until the area binds
        DirectEval e = eval(v);
        if (e.Phi < level_) {
            double clo = 1.0, chi = 1.0;
            std::vector<double> w2(m_);
            auto lifted = [&](double cc) {
                for (int j = 0; j < m_; ++j) w2[j] = std::min(vlo_ + cc * (v[j] - vlo_), vhi_);
                return eval(w2);
            };
            while (lifted(chi).Phi < level_ && chi < 1e6) chi *= 1.5;
            if (lifted(chi).Phi < level_) return out;  // cannot restore
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (clo + chi);
                if (lifted(mid).Phi >= level_)
                    chi = mid;
                else
                    clo = mid;
            }
            lifted(chi);
            v = w2;
            e = eval(v);
        }
        out.v = std::move(v);
        out.F = e.F;
        out.Phi = e.Phi;
        out.ell = lam;
        out.iters = total_iters;
        out.feasible = true;
        return out;
    }

    const RateContext& ctx_;
    ConvexConjugate conj_;
    double y_;
    int m_;
    double level_;
    double T_;
    double dt_;
    double vlo_, vhi_;
};

// package a slope profile into the returned solution
VariationalSolution finish_direct(const RateContext& ctx, double y, double level,
                                  double T, const DirectProblem::ALOut& best, int m) {
    VariationalSolution sol;
    sol.y = y;
    sol.level = level;
    sol.method = SolveMethod::Direct;
    sol.value = best.F;
    sol.z = best.v.empty() ? 0.0 : best.v.front();
    sol.ell = best.ell;

    // truncate the profile at the return point so the path stays nonnegative
    const double dt = T / m;
    DirectProblem prob(ctx, y, m, level, T);
    DirectEval e = prob.eval(best.v);
    const double tau = (e.tau == kInf) ? T : e.tau;
    BVPath path;
    path.start = y;
    double done = 0.0;
    for (int j = 0; j < m && done < tau; ++j) {
        const double take = std::min(dt, tau - done);
        if (take > 1e-15 * std::max(1.0, tau)) path.segs.push_back({take, best.v[j]});
        done += take;
    }
    path.horizon = 0.0;
    for (const auto& s : path.segs) path.horizon += s.dur;
    if (path.segs.empty()) {
        path.segs.push_back({dt, ctx.model.mu});
        path.horizon = dt;
    }
    sol.path = path;
    sol.horizon = path.horizon;
    sol.diag.area_residual = std::abs(e.Phi - level);
    sol.diag.grid = m;
    sol.diag.search_horizon = T;
    sol.diag.iterations = best.iters;

    // first-order condition spread: grad_Lambda*(v_j) + ell * p*int_0^mid x^{p-1}
    // should be constant along the excursion (before the return to 0)
    {
        const ConvexConjugate conj = ctx.conjugate();
        std::vector<double> station;
        double x = y, Ap = 0.0;  // Ap(s) = p * int_0^s x^{p-1}
        for (int j = 0; j < m; ++j) {
            const double b = x + dt * best.v[j];
            const bool crosses = x > 0.0 && b <= 0.0;
            const double d = crosses ? x / (-best.v[j]) : dt;
            if (x <= 0.0 && j > 0) break;
            if (d >= dt / 2.0) {
                const double Ap_mid = Ap + dpint(x, best.v[j], dt / 2.0, ctx.p);
                station.push_back(legendre_grad(conj, best.v[j]) + best.ell * Ap_mid);
            }
            Ap += dpint(x, best.v[j], d, ctx.p);
            x = b;
            if (crosses) break;
        }
        double mean = 0.0;
        for (double s : station) mean += s;
        if (!station.empty()) mean /= station.size();
        double dev = 0.0;
        for (double s : station) dev = std::max(dev, std::abs(s - mean));
        sol.diag.stationarity_residual = station.empty() ? 0.0 : dev / std::max(1.0, std::abs(mean));
    }
    return sol;
}

// descent-only optimum for high starts: zero cost, straight line at mu
std::optional<VariationalSolution> trivial_descent(const RateContext& ctx, double y,
                                                   double level) {
    const double mu = ctx.model.mu;
    const double area = std::pow(y, 1.0 + ctx.p) / (std::abs(mu) * (1.0 + ctx.p));
    if (area < level) return std::nullopt;
    VariationalSolution sol;
    sol.y = y;
    sol.level = level;
    sol.method = SolveMethod::Direct;
    sol.value = 0.0;
    sol.z = mu;
    sol.ell = 0.0;
    sol.horizon = y / std::abs(mu);
    sol.path = BVPath::make(sol.horizon, y, {{sol.horizon, mu}});
    sol.diag.area_residual = area - level;
    return sol;
}

struct TProbe {
    double T;
    double value;
    DirectProblem::ALOut out;
};

TProbe probe_T(const RateContext& ctx, double y, int m, double level, double T,
               const std::vector<double>& warm) {
    DirectProblem prob(ctx, y, m, level, T);
    auto out = prob.solve(warm);
    return {T, out.feasible ? out.F : kInf, std::move(out)};
}

}  // namespace

double direct_value_at_horizon(const RateContext& ctx, double y, int m, double level,
                               double T) {
    if (m < 16) throw std::invalid_argument("direct_value_at_horizon: grid size must be >= 16");
    if (!(T > 0.0)) throw std::invalid_argument("direct_value_at_horizon: bad horizon");
    DirectProblem prob(ctx, y, m, level, T);
    auto out = prob.solve({});
    return out.feasible ? out.F : kInf;
}

VariationalSolution solve_direct(const RateContext& ctx, double y, int m, double level) {
    if (m < 16) throw std::invalid_argument("solve_direct: grid size must be >= 16");
    if (!(ctx.model.mu < 0.0)) throw std::invalid_argument("solve_direct: requires E U < 0");
    if (!(y >= 0.0) || !(level > 0.0)) throw std::invalid_argument("solve_direct: bad arguments");

    if (auto triv = trivial_descent(ctx, y, level)) {
        triv->diag.grid = m;
        return *triv;
    }

    const double M = horizon_bound(ctx, y, level).M;

    // smallest horizon that can carry the area at the slope cap
    double Tlo = M;
    {
        double lo = 1e-9 * M, hi = M;
        DirectProblem top(ctx, y, 8, level, M);
        if (top.max_area() < level)
            throw std::runtime_error("solve_direct: no feasible profile within the horizon bound");
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (DirectProblem(ctx, y, 8, level, mid).max_area() >= level)
                hi = mid;
            else
                lo = mid;
        }
        Tlo = hi;
    }

    const int mc = std::min(m, 96);
    // coarse horizon scan
    TProbe best{0.0, kInf, {}};
    std::vector<double> warm;
    const int nscan = 12;
    for (int i = 0; i < nscan; ++i) {
        const double f = static_cast<double>(i) / (nscan - 1);
        const double T = Tlo * 1.02 * std::pow(M / (Tlo * 1.02), f);
        auto pr = probe_T(ctx, y, mc, level, T, warm);
        if (pr.out.feasible) warm = pr.out.v;
        if (pr.value < best.value) best = std::move(pr);
    }
    if (best.value == kInf)
        throw std::runtime_error("solve_direct: no feasible profile within the horizon bound");

    // golden refinement of the horizon at the coarse grid
    {
        const double ratio = std::pow(M / (Tlo * 1.02), 1.0 / (nscan - 1));
        double a = best.T / ratio, b = std::min(best.T * ratio, M);
        a = std::max(a, Tlo);
        auto f = [&](double T) {
            auto pr = probe_T(ctx, y, mc, level, T, best.out.v);
            if (pr.value < best.value) best = std::move(pr);
            return pr.value;
        };
        golden_min(f, a, b, 16);
    }

    // polish at m/2 and m around the located horizon
    auto polish = [&](int grid, const TProbe& seed) {
        TProbe loc{0.0, kInf, {}};
        // re-expand the warm profile onto the finer grid
        auto expand = [&](const std::vector<double>& v, int g) {
            std::vector<double> w(g);
            for (int j = 0; j < g; ++j) {
                const double pos = (j + 0.5) / g * v.size() - 0.5;
                const int k = std::min<int>(std::max(0, (int)std::floor(pos)), (int)v.size() - 1);
                w[j] = v[k];
            }
            return w;
        };
        std::vector<double> w0 = expand(seed.out.v, grid);
        auto f = [&](double T) {
            DirectProblem prob(ctx, y, grid, level, T);
            auto out = prob.solve(loc.out.feasible ? expand(loc.out.v, grid) : w0);
            const double val = out.feasible ? out.F : kInf;
            if (val < loc.value) loc = {T, val, std::move(out)};
            return val;
        };
        golden_min(f, std::max(Tlo, seed.T * 0.85), std::min(M, seed.T * 1.18), 12);
        return loc;
    };
    TProbe half = polish(std::max(16, m / 2), best);
    TProbe full = polish(m, half.value < kInf ? half : best);
    const TProbe& fin = full.value <= half.value ? full : half;
    const int fin_m = full.value <= half.value ? m : std::max(16, m / 2);

    VariationalSolution sol = finish_direct(ctx, y, level, fin.T, fin.out, fin_m);
    sol.diag.richardson = full.value + (full.value - half.value) / 3.0;
    return sol;
}

// ---------- shooting solver ----------

namespace {

struct ShootResult {
    bool returned = false;
    double T = 0.0;
    double Phi = 0.0;
    double C = 0.0;
    std::vector<double> knot_s, knot_x;
};

// midpoint integration of the optimality dynamics, with per-step closed
// forms for the running integrals (exact for locally linear paths)
ShootResult integrate_el(const RateContext& ctx, double y, double z, double ell,
                         double smax, double h, bool record = false) {
    ShootResult res;
    const ConvexConjugate conj = ctx.conjugate();
    const IncrementModel& mdl = ctx.model;
    const double pw = ctx.p;
    const double eta0 = legendre_grad(conj, z);
    const double tlo = mdl.theta_minus, thi = mdl.theta_plus;

    auto slope_of = [&](double A) {
        const double eta = eta0 - ell * pw * A;
        if (std::isfinite(tlo) && eta <= tlo + 1e-12 * std::max(std::abs(tlo), 1.0))
            return mdl.mu;  // domain exit: coast at the mean, zero running cost
        if (std::isfinite(thi) && eta >= thi - 1e-12 * std::max(std::abs(thi), 1.0))
            return log_mgf_grad(mdl, thi - 1e-12 * std::max(std::abs(thi), 1.0));
        return log_mgf_grad(mdl, eta);
    };

    double x = y, A = 0.0, s = 0.0;
    if (record) {
        res.knot_s.push_back(0.0);
        res.knot_x.push_back(x);
    }
    const long max_steps = static_cast<long>(std::ceil(smax / h)) + 2;
    for (long step = 0; step < max_steps; ++step) {
        const double s1 = slope_of(A);
        if (x <= 0.0 && s1 <= 0.0 && step > 0) {
            res.returned = true;
            res.T = s;
            break;
        }
        if (x <= 0.0 && s1 <= 0.0 && step == 0) return res;  // leaves downward immediately
        const double Am = A + dpint(x, s1, h / 2.0, pw) / pw;
        const double s2 = slope_of(Am);
        double xn = x + s2 * h;
        if (xn <= 0.0 && x > 0.0) {
            // crossing inside the step: shrink the step to the return time
            double lo = 0.0, hi = h;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double Amm = A + dpint(x, s1, mid / 2.0, pw) / pw;
                const double sm = slope_of(Amm);
                if (x + sm * mid <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            const double hstar = 0.5 * (lo + hi);
            const double Amm = A + dpint(x, s1, hstar / 2.0, pw) / pw;
            const double sm = slope_of(Amm);
            res.Phi += pint(x, sm, hstar, pw);
            res.C += legendre(conj, sm) * hstar;
            res.T = s + hstar;
            res.returned = true;
            if (record) {
                res.knot_s.push_back(res.T);
                res.knot_x.push_back(0.0);
            }
            break;
        }
        res.Phi += pint(x, s2, h, pw);
        res.C += legendre(conj, s2) * h;
        A += dpint(x, s2, h, pw) / pw;
        x = xn;
        s += h;
        if (record) {
            res.knot_s.push_back(s);
            res.knot_x.push_back(x);
        }
    }
    return res;
}

BVPath knots_to_path(const ShootResult& r, double y, int max_segs = 512) {
    BVPath path;
    path.start = y;
    const size_t n = r.knot_s.size();
    if (n < 2) {
        path.horizon = std::max(r.T, 1e-12);
        path.segs.push_back({path.horizon, 0.0});
        return path;
    }
    const size_t stride = std::max<size_t>(1, (n - 1) / max_segs);
    double prev_s = r.knot_s.front(), prev_x = r.knot_x.front();
    for (size_t i = stride; i < n; i += stride) {
        const size_t k = std::min(i, n - 1);
        const double ds = r.knot_s[k] - prev_s;
        if (ds > 0.0) path.segs.push_back({ds, (r.knot_x[k] - prev_x) / ds});
        prev_s = r.knot_s[k];
        prev_x = r.knot_x[k];
    }
    if (prev_s < r.knot_s.back()) {
        const double ds = r.knot_s.back() - prev_s;
        path.segs.push_back({ds, (r.knot_x.back() - prev_x) / ds});
    }
    path.horizon = 0.0;
    for (const auto& sg : path.segs) path.horizon += sg.dur;
    return path;
}

// two-pass integration: locate the return coarsely, then resolve it
ShootResult integrate_refined(const RateContext& ctx, double y, double z, double ell,
                              double smax, bool record = false) {
    ShootResult coarse = integrate_el(ctx, y, z, ell, smax, smax / 4096.0);
    if (!coarse.returned) return coarse;
    const double h = std::max(coarse.T / 2048.0, 1e-9);
    return integrate_el(ctx, y, z, ell, coarse.T + 8.0 * h + smax * 1e-6, h, record);
}

}  // namespace

VariationalSolution solve_shooting(const RateContext& ctx, double y, double level) {
    if (!(ctx.model.mu < 0.0)) throw std::invalid_argument("solve_shooting: requires E U < 0");
    if (!(y >= 0.0) || !(level > 0.0)) throw std::invalid_argument("solve_shooting: bad arguments");
    const double mu = ctx.model.mu;
    const double alpha = ctx.alpha;
    const double smax = 4.0 * std::max(horizon_bound(ctx, y, level).M, 1.0);
    const double zcap = std::min(slope_cap(ctx), std::isfinite(ctx.model.ess_sup())
                                                     ? ctx.model.ess_sup() * (1.0 - 1e-6)
                                                     : kInf);

    VariationalSolution sol;
    sol.y = y;
    sol.level = level;
    sol.method = SolveMethod::Shooting;

    if (y == 0.0) {
        // scaling route: the cost/area^alpha ratio is invariant along the
        // scaling orbit, so the multiplier can be pinned at 1
        auto ratio = [&](double z) {
            ShootResult r = integrate_refined(ctx, y, z, 1.0, smax);
            if (!r.returned || r.Phi <= 0.0) return kInf;
            return r.C / std::pow(r.Phi, alpha);
        };
        // coarse scan then golden refinement
        double zbest = -mu, fbest = kInf;
        const double zlo = 1e-3 * std::abs(mu), zhi = std::min(zcap, 64.0 * std::abs(mu));
        for (int i = 0; i < 24; ++i) {
            const double z = zlo * std::pow(zhi / zlo, i / 23.0);
            const double f = ratio(z);
            if (f < fbest) {
                fbest = f;
                zbest = z;
            }
        }
        if (fbest == kInf) throw std::runtime_error("solve_shooting: no returning trajectory found");
        const double z = golden_min(ratio, zbest / 1.7, std::min(zbest * 1.7, zhi), 40, &fbest);
        ShootResult raw = integrate_refined(ctx, y, z, 1.0, smax);
        const double c = std::pow(level / raw.Phi, 1.0 / (1.0 + ctx.p));
        const double ell = std::pow(c, -ctx.p);
        ShootResult fin = integrate_refined(ctx, y, z, ell, smax * std::max(c, 1.0) * 2.0, true);
        if (!fin.returned) throw std::runtime_error("solve_shooting: normalized trajectory did not return");
        sol.value = fin.C;
        sol.z = z;
        sol.ell = ell;
        sol.horizon = fin.T;
        sol.path = knots_to_path(fin, y);
        sol.diag.area_residual = std::abs(fin.Phi - level);
        sol.diag.search_horizon = smax;
        return sol;
    }

    // y > 0: match the area by bisecting the multiplier, then optimize the
    // initial slope
    auto area_of = [&](double z, double ell) {
        ShootResult r = integrate_refined(ctx, y, z, ell, smax);
        if (!r.returned) return std::make_pair(kInf, r);  // treat as "too much area"
        return std::make_pair(r.Phi, r);
    };
    auto cost_at = [&](double z, double* ell_out = nullptr, ShootResult* r_out = nullptr) {
        // bracket the multiplier
        double ehi = 1.0;
        for (int it = 0; it < 80 && area_of(z, ehi).first > level; ++it) ehi *= 3.0;
        if (area_of(z, ehi).first > level) return kInf;
        double elo = ehi;
        bool lo_found = false;
        for (int it = 0; it < 80; ++it) {
            elo /= 3.0;
            if (elo < 1e-14) {
                elo = 0.0;
                lo_found = area_of(z, elo).first >= level;
                break;
            }
            if (area_of(z, elo).first >= level) {
                lo_found = true;
                break;
            }
        }
        if (!lo_found) {
            // even the straight trajectory carries too little area
            if (area_of(z, 0.0).first < level) return kInf;
            elo = 0.0;
        }
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (elo + ehi);
            if (area_of(z, mid).first >= level)
                elo = mid;
            else
                ehi = mid;
        }
        auto [phi, r] = area_of(z, elo);
        if (ell_out) *ell_out = elo;
        if (r_out) *r_out = r;
        (void)phi;
        return r.C;
    };

    double zbest = -mu, fbest = kInf;
    const double zmin = mu * (1.0 - 1e-9);
    const double zspan = std::min(zcap, 64.0 * std::abs(mu));
    for (int i = 0; i < 20; ++i) {
        const double z = zmin + (zspan - zmin) * i / 19.0;
        const double f = cost_at(z);
        if (f < fbest) {
            fbest = f;
            zbest = z;
        }
    }
    if (fbest == kInf) throw std::runtime_error("solve_shooting: no feasible trajectory found");
    const double width = (zspan - zmin) / 19.0;
    const double z = golden_min([&](double zz) { return cost_at(zz); },
                                std::max(zmin, zbest - width), std::min(zspan, zbest + width), 32);
    double ell = 0.0;
    ShootResult fin;
    const double val = cost_at(z, &ell, &fin);
    ShootResult rec = integrate_refined(ctx, y, z, ell, smax, true);
    sol.value = val;
    sol.z = z;
    sol.ell = ell;
    sol.horizon = rec.T;
    sol.path = knots_to_path(rec, y);
    sol.diag.area_residual = std::abs(rec.Phi - level);
    sol.diag.search_horizon = smax;
    return sol;
}

// ---------- steady-state variant and structural checks ----------

BpiResult solve_Bpi(const RateContext& ctx, int k, int m) {
    if (k < 2) throw std::invalid_argument("solve_Bpi: k must be >= 2");
    const double ybar = ctx.ybar();
    const double beta = tilt_root_beta(ctx.model);
    BpiResult res;
    res.k = k;
    double best = kInf, besty = 0.0;
    double offset_best = kInf;
    for (int i = 0; i <= k; ++i) {
        const double yi = ybar * i / k;
        const double Bi = solve_direct(ctx, yi, m).value;
        res.grid_y.push_back(yi);
        res.grid_B.push_back(Bi);
        const double cand = beta * yi + Bi;
        if (cand < best - 1e-15) {
            best = cand;
            besty = yi;
        }
        if (i >= 1) {
            const double off = beta * ybar * (i - 1) / k + Bi;
            offset_best = std::min(offset_best, off);
        }
    }
    res.value = best;
    res.argmin_y = besty;
    res.offset_grid_value = offset_best;
    return res;
}

PropertyReport property_checks(const RateContext& ctx, const std::vector<double>& ygrid,
                               int m, double tol) {
    PropertyReport rep;
    rep.grid_y = ygrid;
    for (size_t i = 1; i < ygrid.size(); ++i)
        if (!(ygrid[i] >= ygrid[i - 1]))
            throw std::invalid_argument("property_checks: grid must be sorted");
    for (double yv : ygrid) rep.values.push_back(solve_direct(ctx, yv, m).value);

    const double ybar = ctx.ybar();
    const double L1 = legendre(ctx.conjugate(), 1.0);
    for (size_t i = 0; i < ygrid.size(); ++i) {
        if (ygrid[i] >= ybar && rep.values[i] > tol)
            rep.violations.push_back({"zero-beyond-ybar", ygrid[i], ygrid[i], rep.values[i]});
        for (size_t j = i + 1; j < ygrid.size(); ++j) {
            if (rep.values[j] > rep.values[i] + tol)
                rep.violations.push_back(
                    {"monotonicity", ygrid[i], ygrid[j], rep.values[j] - rep.values[i]});
            const double bound = rep.values[j] + (ygrid[j] - ygrid[i]) * L1 + 2.0 * tol;
            if (rep.values[i] > bound)
                rep.violations.push_back({"lipschitz", ygrid[i], ygrid[j], rep.values[i] - bound});
        }
    }
    return rep;
}

}  // namespace rrw
