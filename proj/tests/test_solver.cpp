#include <doctest.h>

#include <cmath>

#include "solver.hpp"

using namespace rrw;

namespace {

const double kGaussB0 = 4.0 / std::sqrt(6.0);  // closed-form optimum for gaussian(-1,1), p=1

RateContext gauss_ctx() { return RateContext(IncrementModel::gaussian(-1.0, 1.0), 1.0); }
RateContext tp_ctx() { return RateContext(IncrementModel::two_point(0.3), 1.0); }

}  // namespace

TEST_CASE("horizon bound") {
    auto ga = gauss_ctx();
    const double ybar = ga.ybar();

    // descent construction at and above ybar
    auto hb = horizon_bound(ga, ybar);
    CHECK(hb.M == doctest::Approx(ybar / 1.0).epsilon(1e-14));
    auto hb2 = horizon_bound(ga, 2.0 * ybar);
    auto hb3 = horizon_bound(ga, 3.0 * ybar);
    CHECK(hb3.M / hb2.M == doctest::Approx(1.5).epsilon(1e-14));

    // must cover the optimal return time
    CHECK(horizon_bound(ga, 0.0).M >= std::sqrt(6.0));

    // test slopes straddle zero as required by the construction
    CHECK(hb.w < 0.0);
    CHECK(hb.w > ga.model.mu);
    CHECK(horizon_bound(ga, 0.0).z > 0.0);

    // linear envelope: M(y) <= c y + d with module-level constants
    double d = 0.0;
    for (int i = 0; i <= 20; ++i) d = std::max(d, horizon_bound(ga, ybar * i / 20.0).M);
    const double c = 1.0 / std::abs(ga.model.mu);
    for (int i = 0; i <= 100; ++i) {
        const double y = 3.0 * ybar * i / 100.0;
        CHECK(horizon_bound(ga, y).M <= c * y + d + 1e-12);
    }

    // scaling in the constraint level
    CHECK(horizon_bound(ga, 0.0, 4.0).M ==
          doctest::Approx(2.0 * horizon_bound(ga, 0.0, 1.0).M).epsilon(1e-12));
}

TEST_CASE("gaussian closed form, both methods") {
    auto ga = gauss_ctx();
    const auto d = solve_direct(ga, 0.0, 200);
    CHECK(std::abs(d.value - kGaussB0) / kGaussB0 <= 0.01);
    CHECK(d.horizon == doctest::Approx(std::sqrt(6.0)).epsilon(0.02));
    CHECK(d.z == doctest::Approx(1.0).epsilon(0.05));
    CHECK(d.ell == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(0.02));
    CHECK(std::abs(d.diag.richardson - kGaussB0) / kGaussB0 <= 0.01);

    const auto s = solve_shooting(ga, 0.0);
    CHECK(std::abs(s.value - kGaussB0) / kGaussB0 <= 0.002);
    CHECK(s.horizon == doctest::Approx(std::sqrt(6.0)).epsilon(1e-3));
    CHECK(s.z == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(s.ell == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-3));
}

TEST_CASE("cross-method agreement") {
    auto ga = gauss_ctx();
    const double ybar = ga.ybar();
    for (double f : {0.0, 0.25, 0.5}) {
        const double vd = solve_direct(ga, f * ybar, 200).value;
        const double vs = solve_shooting(ga, f * ybar).value;
        CHECK(std::abs(vd - vs) / std::max(vd, 1e-12) <= 0.01);
    }
    // smooth one-sided family
    RateContext ex(IncrementModel::exp_shift(1.0, 2.0), 1.0);
    const double vd = solve_direct(ex, 0.0, 200).value;
    const double vs = solve_shooting(ex, 0.0).value;
    CHECK(std::abs(vd - vs) / vd <= 0.01);
    // the bounded-increment family also agrees where the dynamics stay interior
    auto tp = tp_ctx();
    const double td = solve_direct(tp, 0.0, 200).value;
    const double ts = solve_shooting(tp, 0.0).value;
    CHECK(std::abs(td - ts) / td <= 0.01);
}

TEST_CASE("scaling in the constraint level") {
    auto ga = gauss_ctx();
    const double base = solve_direct(ga, 0.0, 200).value;
    for (double L : {0.5, 2.0, 8.0}) {
        const double v = solve_direct(ga, 0.0, 200, L).value;
        CHECK(std::abs(v / base / std::pow(L, 0.5) - 1.0) <= 0.005);
    }
}

TEST_CASE("horizon sufficiency and monotone horizon dependence") {
    auto ga = gauss_ctx();
    const auto sol = solve_direct(ga, 0.0, 200);
    const double at_T = direct_value_at_horizon(ga, 0.0, 200, 1.0, sol.horizon);
    const double at_15T = direct_value_at_horizon(ga, 0.0, 200, 1.0, 1.5 * sol.horizon);
    CHECK(std::abs(at_15T - at_T) / at_T <= 0.001);
    // nonincreasing up to solver noise
    double prev = direct_value_at_horizon(ga, 0.0, 200, 1.0, 0.7 * sol.horizon);
    for (double f : {0.85, 1.0, 1.3, 1.7}) {
        const double cur = direct_value_at_horizon(ga, 0.0, 200, 1.0, f * sol.horizon);
        CHECK(cur <= prev + 2e-3 * at_T);
        prev = cur;
    }
    // far below the needed horizon there is no feasible profile
    CHECK(direct_value_at_horizon(ga, 0.0, 200, 1.0, 1e-4) == kInf);
}

TEST_CASE("returned paths are feasible excursions") {
    for (auto ctx : {gauss_ctx(), tp_ctx()}) {
        const double ybar = ctx.ybar();
        for (double f : {0.0, 0.4, 0.9}) {
            const auto sol = solve_direct(ctx, f * ybar, 128);
            CHECK(sol.path.start == f * ybar);
            CHECK(area_p(sol.path, ctx.p, sol.path.horizon) >= sol.level - 1e-8);
            double prev_slope = kInf;
            double x = sol.path.start;
            for (const auto& seg : sol.path.segs) {
                CHECK(seg.slope <= prev_slope + 1e-10);          // concave
                CHECK(seg.slope >= ctx.model.mu - 1e-10);        // bounded below by the mean
                CHECK(x >= -1e-9);                               // nonnegative until the return
                x += seg.slope * seg.dur;
                prev_slope = seg.slope;
            }
            CHECK(x >= -1e-6);
            // first-order condition holds along the excursion
            CHECK(sol.diag.stationarity_residual <= 10.0 * sol.horizon / sol.diag.grid);
        }
    }
}

TEST_CASE("free descent beyond ybar") {
    for (auto ctx : {gauss_ctx(), tp_ctx()}) {
        const double ybar = ctx.ybar();
        for (double f : {1.0, 1.3, 2.0}) {
            const auto sol = solve_direct(ctx, f * ybar, 64);
            CHECK(sol.value == 0.0);
            CHECK(sol.z == ctx.model.mu);
            CHECK(sol.horizon == doctest::Approx(f * ybar / std::abs(ctx.model.mu)));
        }
        const auto sh = solve_shooting(ctx, 1.5 * ybar);
        CHECK(sh.value <= 1e-3);
    }
}

TEST_CASE("structural property report") {
    auto ga = gauss_ctx();
    const double ybar = ga.ybar();
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(1.2 * ybar * i / 8.0);
    const auto rep = property_checks(ga, grid, 200, 1e-3);
    CHECK(rep.pass());
    REQUIRE(rep.values.size() == grid.size());
    // explicit instance of the slope-1 bound between the endpoints
    const double L1 = legendre(ga.conjugate(), 1.0);
    CHECK(rep.values.front() <= rep.values.back() + (grid.back() - grid.front()) * L1 + 2e-3);

    // single-point grid passes vacuously
    CHECK(property_checks(ga, {0.5 * ybar}, 96).pass());
    CHECK_THROWS_AS(property_checks(ga, {1.0, 0.5}, 96), std::invalid_argument);
}

TEST_CASE("steady-state grid variant") {
    auto tp = tp_ctx();
    const double beta = tilt_root_beta(tp.model);
    const double ybar = tp.ybar();
    const auto b8 = solve_Bpi(tp, 8, 96);
    const double b0 = solve_direct(tp, 0.0, 96).value;
    CHECK(b8.value >= 0.0);
    CHECK(b8.value <= b0 + 1e-12);  // y = 0 is on the grid
    CHECK(b8.argmin_y == 0.0);
    CHECK(b8.offset_grid_value <= b8.value + 1e-12);
    REQUIRE(b8.grid_y.size() == 9);
    CHECK(b8.grid_B.back() == 0.0);  // B vanishes at ybar

    // refinement inequality for the offset estimator
    const auto b4 = solve_Bpi(tp, 4, 96);
    CHECK(b8.offset_grid_value <= b4.offset_grid_value + beta * ybar / 4.0 + 2e-3);

    CHECK_THROWS_AS(solve_Bpi(tp, 1, 96), std::invalid_argument);
}

TEST_CASE("solver argument checks") {
    auto ga = gauss_ctx();
    CHECK_THROWS_AS(solve_direct(ga, 0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(solve_direct(ga, -1.0, 64), std::invalid_argument);
    RateContext bad(IncrementModel::two_point(0.6), 1.0);
    CHECK_THROWS_AS(solve_direct(bad, 0.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(solve_shooting(bad, 0.0), std::invalid_argument);
}
