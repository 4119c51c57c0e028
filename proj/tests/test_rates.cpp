#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "rates.hpp"
#include "rng.hpp"

using namespace rrw;

TEST_CASE("path cost over a fixed horizon") {
    RateContext ga(IncrementModel::gaussian(-1.0, 1.0), 1.0);

    BVPath drift = BVPath::make(3.0, 0.7, {{3.0, -1.0}});
    CHECK(pathcost_bv(ga, drift) == 0.0);  // Lambda*(mu) = 0

    BVPath flat = BVPath::make(2.0, 0.0, {{2.0, 0.0}});
    CHECK(pathcost_bv(ga, flat) == doctest::Approx(1.0).epsilon(1e-14));  // 2 * 0.5

    // any jump is infinitely expensive when the MGF is finite everywhere
    BVPath jumpy = BVPath::make(1.0, 0.0, {{1.0, 0.0}}, {{0.5, 0.1}});
    CHECK(pathcost_bv(ga, jumpy) == kInf);

    // two-point family prices jumps at finite theta... only when the domain
    // endpoint is finite; here both endpoints are infinite as well
    RateContext tp(IncrementModel::two_point(0.3), 1.0);
    CHECK(pathcost_bv(tp, jumpy) == kInf);

    // cost only depends on total jump mass, not on jump times
    RateContext ex(IncrementModel::exp_shift(1.0, 2.0), 1.0);
    RngStream rng(7, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const double b1 = 0.2 + rng.uniform(), b2 = 0.2 + rng.uniform();
        BVPath a = BVPath::make(1.0, 0.0, {{1.0, -0.5}}, {{0.2, b1}, {0.8, b2}});
        BVPath b = BVPath::make(1.0, 0.0, {{1.0, -0.5}}, {{0.5, b1 + b2}});
        CHECK(pathcost_bv(ex, a) == pathcost_bv(ex, b));
    }
}

TEST_CASE("excursion cost") {
    RateContext ga(IncrementModel::gaussian(-1.0, 1.0), 1.0);
    const double ybar = ga.ybar();
    CHECK(ybar == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    // zero-cost descent from any start at or above ybar
    for (double y : {ybar, 1.5 * ybar, 3.0 * ybar}) {
        const double T = y / 1.0;
        BVPath desc = BVPath::make(T, y, {{T, -1.0}});
        CHECK(hitting_time(desc) == doctest::Approx(T).epsilon(1e-12));
        CHECK(pathcost_excursion(ga, desc, y) == 0.0);
        CHECK(area_p(desc, 1.0, T) >= 1.0 - 1e-12);
    }

    // triangle from zero: Lambda*(1) + Lambda*(-1) = 2 + 0
    BVPath tri = BVPath::make(2.0, 0.0, {{1.0, 1.0}, {1.0, -1.0}});
    CHECK(pathcost_excursion(ga, tri, 0.0) == doctest::Approx(2.0).epsilon(1e-13));

    // start mismatch
    CHECK(pathcost_excursion(ga, tri, 0.5) == kInf);

    // no return within the horizon
    BVPath rising = BVPath::make(1.0, 0.5, {{1.0, 1.0}});
    CHECK_THROWS_AS(pathcost_excursion(ga, rising, 0.5), std::runtime_error);
    CHECK(pathcost_excursion(ga, rising, 0.5, true) ==
          doctest::Approx(pathcost_bv(ga, rising)));

    // cost beyond the return is not charged
    BVPath after = BVPath::make(3.0, 1.0, {{1.0, -1.0}, {2.0, 5.0}});
    CHECK(pathcost_excursion(ga, after, 1.0) ==
          doctest::Approx(legendre(ga.conjugate(), -1.0)).epsilon(1e-13));
}

TEST_CASE("sample-path rate functions") {
    RateContext ctx(IncrementModel::two_point(0.3), 1.0, 0.75, 1.3);
    CHECK(ctx.alpha == 0.5);

    StepDriftPath drift_only{0.75, {}};
    CHECK(rate_IY(ctx, drift_only) == 0.0);

    StepDriftPath one{0.75, {{0.4, 4.0}}};
    CHECK(rate_IY(ctx, one) == 2.0 * ctx.B0star);  // 4^(1/2) * B0

    StepDriftPath off{0.75 / 2.0, {{0.4, 4.0}}};
    CHECK(rate_IY(ctx, off) == kInf);

    StepDriftPath multi{0.75, {{0.2, 1.0}, {0.7, 9.0}}};
    CHECK(rate_IY(ctx, multi) == doctest::Approx(ctx.B0star * (1.0 + 3.0)).epsilon(1e-15));
}

TEST_CASE("end-jump rate") {
    RateContext ctx(IncrementModel::two_point(0.3), 1.0, 0.75, 1.3);
    StepDriftPath zero{0.0, {}};
    CHECK(rate_IS(ctx, zero) == 0.0);
    StepDriftPath good{0.0, {{1.0, 9.0}}};
    CHECK(rate_IS(ctx, good) == doctest::Approx(3.0 * ctx.B0star).epsilon(1e-15));
    StepDriftPath misplaced{0.0, {{0.5, 9.0}}};
    CHECK(rate_IS(ctx, misplaced) == kInf);
    StepDriftPath drifting{0.75, {{1.0, 9.0}}};
    CHECK(rate_IS(ctx, drifting) == kInf);

    // restricted to a single end jump with zero drift, the sample-path rate
    // agrees with the end-jump rate
    RateContext ctx0(IncrementModel::two_point(0.3), 1.0, 0.0, 1.3);
    CHECK(rate_IY(ctx0, good) == rate_IS(ctx0, good));
}

TEST_CASE("finite-dimensional rate") {
    RateContext ctx(IncrementModel::two_point(0.3), 1.0, 0.75, 1.3);
    // values exactly on the drift line cost nothing
    CHECK(rate_findim(ctx, {0.5, 1.0}, {0.375, 0.75}) == 0.0);
    // k = 1 with excess 4 matches the single-jump path exactly
    StepDriftPath one{0.75, {{0.4, 4.0}}};
    CHECK(rate_findim(ctx, {1.0}, {0.75 + 4.0}) == rate_IY(ctx, one));
    // any increment below the drift is inadmissible
    CHECK(rate_findim(ctx, {0.5, 1.0}, {0.375, 0.5}) == kInf);
    CHECK_THROWS_AS(rate_findim(ctx, {0.5, 0.4}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(rate_findim(ctx, {}, {}), std::invalid_argument);

    // merged jumps never cost more than split ones (concave power)
    RngStream rng(13, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const double b1 = rng.uniform() * 3.0 + 0.01, b2 = rng.uniform() * 3.0 + 0.01;
        StepDriftPath merged{0.0, {{0.5, b1 + b2}}};
        StepDriftPath split{0.0, {{0.25, b1}, {0.75, b2}}};
        RateContext c0(IncrementModel::two_point(0.3), 1.0, 0.0, 1.0);
        CHECK(rate_IY(c0, merged) <= rate_IY(c0, split) + 1e-14);
    }
}

TEST_CASE("free random-walk rate on the unit horizon") {
    RateContext ga(IncrementModel::gaussian(-1.0, 1.0), 1.0);
    BVPath zero = BVPath::make(1.0, 0.0, {{1.0, 0.0}});
    CHECK(rate_IK(ga, zero) == doctest::Approx(0.5));
    BVPath drift = BVPath::make(1.0, 0.0, {{1.0, -1.0}});
    CHECK(rate_IK(ga, drift) == 0.0);
    BVPath high = BVPath::make(1.0, 1.0, {{1.0, -1.0}});
    CHECK(rate_IK(ga, high) == kInf);
    BVPath longer = BVPath::make(2.0, 0.0, {{2.0, 0.0}});
    CHECK_THROWS_AS(rate_IK(ga, longer), std::invalid_argument);
}

TEST_CASE("regenerative drift estimator") {
    std::vector<CycleRecord> idle(100);
    for (auto& c : idle) c = {1, 0.0, 0.0};
    const auto e0 = estimate_lambda(idle);
    CHECK(e0.value == 0.0);
    CHECK(e0.se == 0.0);

    std::vector<CycleRecord> synth(50);
    for (auto& c : synth) c = {2, 1.0, 1.0};
    const auto e1 = estimate_lambda(synth);
    CHECK(e1.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e1.se == 0.0);

    CHECK_THROWS_AS(estimate_lambda({{1, 0.0, 0.0}}), std::invalid_argument);
}
