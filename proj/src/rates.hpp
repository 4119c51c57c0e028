#pragma once

#include <cmath>
#include <stdexcept>

#include "model.hpp"
#include "path.hpp"

namespace rrw {

// Shared context for the rate-function evaluators: the increment law, the
// area exponent p (alpha = 1/(1+p) always), the long-run drift lambda of
// the scaled area process, and the excursion decay constant used by the
// sample-path rates.
struct RateContext {
    IncrementModel model;
    ConjugateMode conj_mode = ConjugateMode::Analytic;
    double conj_tol = 1e-12;
    double p = 1.0;
    double alpha = 0.5;
    double lambda = 0.0;
    double B0star = 0.0;

    RateContext(IncrementModel m, double p_, double lambda_ = 0.0, double B0_ = 0.0)
        : model(std::move(m)), p(p_), alpha(1.0 / (1.0 + p_)), lambda(lambda_), B0star(B0_) {
        if (!(p_ > 0.0)) throw std::invalid_argument("RateContext: p must be positive");
        if (!(lambda_ >= 0.0) || !(B0_ >= 0.0))
            throw std::invalid_argument("RateContext: lambda and B0star must be nonnegative");
    }

    ConvexConjugate conjugate() const { return {&model, conj_mode, conj_tol}; }
    // start level above which the free descent already carries unit area
    double ybar() const { return std::pow(std::abs(model.mu) * (p + 1.0), 1.0 / (1.0 + p)); }
};

// absolutely continuous cost plus jump penalties over the whole horizon:
// sum dur * Lambda*(slope) + theta+ * (up mass) + |theta-| * (down mass)
double pathcost_bv(const RateContext& ctx, const BVPath& path);

// same integrand, truncated at the first return of the reflected path to 0;
// +inf when the path does not start at y. When the path never returns
// within its horizon: integrate to the horizon if allow_truncation, else
// throw std::runtime_error.
double pathcost_excursion(const RateContext& ctx, const BVPath& path, double y,
                          bool allow_truncation = false);

// sample-path rate of the scaled area process: finite only on paths with
// drift exactly ctx.lambda, where it charges B0star * sum(jump^alpha)
double rate_IY(const RateContext& ctx, const StepDriftPath& zeta);

// end-jump rate: drift 0 and at most one jump, located at t = 1
double rate_IS(const RateContext& ctx, const StepDriftPath& zeta);

// finite-dimensional rate at strictly increasing times in [0,1]:
// B0star * sum (x_i - x_{i-1} - lambda dt_i)^alpha on the admissible cone
double rate_findim(const RateContext& ctx, const std::vector<double>& times,
                   const std::vector<double>& values);

// free random-walk rate on [0,1]: pathcost_bv gated on start = 0
double rate_IK(const RateContext& ctx, const BVPath& path);

struct CycleRecord {
    long tau = 0;       // cycle length in steps, >= 1
    double W = 0.0;     // cycle area sum X_i^p
    double peak = 0.0;  // max state over the cycle
};

struct LambdaEstimate {
    double value;
    double se;
};

// regenerative ratio estimator sum W / sum tau with delta-method error
LambdaEstimate estimate_lambda(const std::vector<CycleRecord>& cycles);

}  // namespace rrw
