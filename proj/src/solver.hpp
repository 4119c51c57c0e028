#pragma once

#include <string>
#include <vector>

#include "rates.hpp"

namespace rrw {

// Sufficient horizon for the excursion problem from start level y: no path
// can beat the best one that returns within M, so the search stops there.
struct HorizonBound {
    double y = 0.0;
    double w = 0.0;  // descent test slope in (mu, 0)
    double z = 0.0;  // ascent test slope, > 0
    double M = 0.0;
};

HorizonBound horizon_bound(const RateContext& ctx, double y, double level = 1.0);

enum class SolveMethod { Direct, Shooting };

struct SolverDiagnostics {
    int iterations = 0;
    double area_residual = 0.0;          // |Phi - level| of the returned path
    double stationarity_residual = 0.0;  // spread of the first-order condition
    double richardson = 0.0;             // value extrapolated from m/2 and m
    int grid = 0;
    double search_horizon = 0.0;         // horizon used by the outer search
};

struct VariationalSolution {
    double y = 0.0;
    double value = 0.0;
    SolveMethod method = SolveMethod::Direct;
    double level = 1.0;
    double horizon = 0.0;  // return time of the optimal path
    BVPath path;           // concave, nonnegative, start y, area >= level
    double z = 0.0;        // initial slope
    double ell = 0.0;      // area-constraint multiplier
    SolverDiagnostics diag;
};

// Direct minimization of the discretized finite-horizon problem over
// concave slope profiles (nonincreasing, bounded below by mu), with the
// area constraint handled by an augmented Lagrangian and an outer search
// over the horizon. The value is an upper bound that tightens as m grows.
VariationalSolution solve_direct(const RateContext& ctx, double y, int m,
                                 double level = 1.0);

// single fixed-horizon solve (no outer search); +inf when infeasible
double direct_value_at_horizon(const RateContext& ctx, double y, int m, double level,
                               double T);

// Shooting on the first-order optimality dynamics
//   slope(s) = grad_Lambda( grad_Lambda*(z) - ell * p * int_0^s xi^{p-1} )
// For y = 0 the area constraint is absorbed by scaling and the cost/area
// ratio is minimized; for y > 0 the multiplier is matched to the area.
VariationalSolution solve_shooting(const RateContext& ctx, double y,
                                   double level = 1.0);

struct BpiResult {
    double value = 0.0;        // grid minimum of beta*y + B_y*
    double argmin_y = 0.0;
    double offset_grid_value = 0.0;  // variant with the (i-1)/k offset
    int k = 0;
    std::vector<double> grid_y;
    std::vector<double> grid_B;
};

// Steady-state variant: minimum of beta*y + B_y* over the grid
// {i*ybar/k : i = 0..k}, with B_y* from solve_direct.
BpiResult solve_Bpi(const RateContext& ctx, int k, int m);

struct PropertyViolation {
    std::string what;
    double y1 = 0.0, y2 = 0.0;
    double excess = 0.0;
};

struct PropertyReport {
    std::vector<double> grid_y;
    std::vector<double> values;
    std::vector<PropertyViolation> violations;
    bool pass() const { return violations.empty(); }
};

// Structural checks of y -> B_y* on a sorted grid: nonincreasing, the
// slope-1 Lipschitz bound, and vanishing beyond ybar; slack `tol` covers
// solver and discretization error.
PropertyReport property_checks(const RateContext& ctx, const std::vector<double>& ygrid,
                               int m, double tol = 1e-3);

}  // namespace rrw
