#include "rates.hpp"

#include <cmath>
#include <stdexcept>

namespace rrw {

namespace {

// jump penalty with the 0 * inf = 0 convention for zero mass
double jump_penalty(double price, double mass) {
    if (mass == 0.0) return 0.0;
    return price * mass;
}

double cost_over(const RateContext& ctx, const BVPath& path, double upto) {
    const ConvexConjugate conj = ctx.conjugate();
    const double theta_up = ctx.model.theta_plus;
    const double theta_dn = std::abs(ctx.model.theta_minus);
    double acc = 0.0;
    double t = 0.0;
    for (const auto& s : path.segs) {
        const double take = std::min(s.dur, upto - t);
        if (take > 0.0) {
            const double c = legendre(conj, s.slope);
            if (c == kInf) return kInf;
            acc += take * c;
        }
        t += s.dur;
        if (t >= upto) break;
    }
    double up_mass = 0.0, dn_mass = 0.0;
    for (const auto& j : path.ups)
        if (j.t <= upto) up_mass += j.size;
    for (const auto& j : path.downs)
        if (j.t <= upto) dn_mass += j.size;
    acc += jump_penalty(theta_up, up_mass);
    acc += jump_penalty(theta_dn, dn_mass);
    return acc;
}

}  // namespace

double pathcost_bv(const RateContext& ctx, const BVPath& path) {
    return cost_over(ctx, path, path.horizon);
}

double pathcost_excursion(const RateContext& ctx, const BVPath& path, double y,
                          bool allow_truncation) {
    if (path.start != y) return kInf;
    double T = hitting_time(path);
    if (T == kInf) {
        if (!allow_truncation)
            throw std::runtime_error(
                "pathcost_excursion: path does not return within its horizon");
        T = path.horizon;
    }
    return cost_over(ctx, path, T);
}

double rate_IY(const RateContext& ctx, const StepDriftPath& zeta) {
    zeta.check();
    if (zeta.drift != ctx.lambda) return kInf;
    double acc = 0.0;
    for (const auto& j : zeta.jumps) acc += std::pow(j.size, ctx.alpha);
    return ctx.B0star * acc;
}

double rate_IS(const RateContext& ctx, const StepDriftPath& zeta) {
    zeta.check();
    if (zeta.drift != 0.0) return kInf;
    if (zeta.jumps.empty()) return 0.0;
    if (zeta.jumps.size() > 1 || zeta.jumps[0].t != 1.0) return kInf;
    return ctx.B0star * std::pow(zeta.jumps[0].size, ctx.alpha);
}

double rate_findim(const RateContext& ctx, const std::vector<double>& times,
                   const std::vector<double>& values) {
    const size_t k = times.size();
    if (k == 0 || values.size() != k)
        throw std::invalid_argument("rate_findim: need equal-length nonempty lists");
    double prev_t = 0.0, prev_x = 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) {
        if (!(times[i] > prev_t) || times[i] > 1.0)
            throw std::invalid_argument("rate_findim: times must be strictly increasing in (0,1]");
        const double excess = values[i] - prev_x - ctx.lambda * (times[i] - prev_t);
        if (excess < 0.0) return kInf;
        acc += std::pow(excess, ctx.alpha);
        prev_t = times[i];
        prev_x = values[i];
    }
    return ctx.B0star * acc;
}

double rate_IK(const RateContext& ctx, const BVPath& path) {
    if (std::abs(path.horizon - 1.0) > 1e-12)
        throw std::invalid_argument("rate_IK: path horizon must be 1");
    if (path.start != 0.0) return kInf;
    return pathcost_bv(ctx, path);
}

LambdaEstimate estimate_lambda(const std::vector<CycleRecord>& cycles) {
    if (cycles.size() < 2)
        throw std::invalid_argument("estimate_lambda: need at least 2 cycles");
    const double n = static_cast<double>(cycles.size());
    double sw = 0.0, st = 0.0;
    for (const auto& c : cycles) {
        sw += c.W;
        st += c.tau;
    }
    const double lam = sw / st;
    const double taubar = st / n;
    double s2 = 0.0;
    for (const auto& c : cycles) {
        const double d = c.W - lam * c.tau;
        s2 += d * d;
    }
    s2 /= (n - 1.0);
    const double se = std::sqrt(s2 / n) / taubar;
    return {lam, se};
}

}  // namespace rrw
