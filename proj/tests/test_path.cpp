#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "path.hpp"
#include "rng.hpp"

using namespace rrw;

namespace {

// random piecewise-linear path with jumps, for property checks
BVPath random_path(RngStream& rng, bool with_downs = true) {
    const int nseg = 1 + static_cast<int>(rng.uniform() * 5);
    std::vector<Seg> segs;
    double T = 0.0;
    for (int i = 0; i < nseg; ++i) {
        const double d = 0.2 + rng.uniform();
        segs.push_back({d, -1.5 + 3.0 * rng.uniform()});
        T += d;
    }
    std::vector<Jump> ups, downs;
    const int nup = static_cast<int>(rng.uniform() * 3);
    for (int i = 0; i < nup; ++i) ups.push_back({rng.uniform() * T, 0.1 + rng.uniform()});
    if (with_downs) {
        const int ndn = static_cast<int>(rng.uniform() * 3);
        for (int i = 0; i < ndn; ++i) downs.push_back({rng.uniform() * T, 0.1 + rng.uniform()});
    }
    // jump times collide with probability zero; make() would reject ties
    return BVPath::make(T, rng.uniform(), std::move(segs), std::move(ups), std::move(downs));
}

// Riemann-sum reference for the reflected-power area
double riemann_area(const BVPath& p, double power, double upper, double h = 1e-4) {
    const BVPath r = reflect(p);
    double acc = 0.0;
    for (double t = 0.5 * h; t < upper; t += h)
        acc += std::pow(std::max(evaluate(r, t), 0.0), power) * h;
    return acc;
}

}  // namespace

TEST_CASE("evaluate") {
    BVPath drift = BVPath::make(1.0, 0.0, {{1.0, -0.4}});
    CHECK(evaluate(drift, 1.0) == doctest::Approx(-0.4).epsilon(1e-15));

    BVPath jumpy = BVPath::make(1.0, 1.0, {{1.0, 0.0}}, {{0.5, 2.0}});
    CHECK(evaluate(jumpy, 0.5) == 3.0);
    CHECK(evaluate_left(jumpy, 0.5) == 1.0);

    BVPath two = BVPath::make(2.0, 0.0, {{1.0, 2.0}, {1.0, -1.0}});
    CHECK(evaluate(two, 1.5) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(evaluate(two, 2.5), std::out_of_range);
    CHECK_THROWS_AS(evaluate(two, -0.5), std::out_of_range);
}

TEST_CASE("reflection map") {
    // pure descent reflects to zero
    BVPath down = BVPath::make(1.0, 0.0, {{1.0, -1.0}});
    const BVPath r1 = reflect(down);
    for (double t = 0.0; t <= 1.0; t += 0.1) CHECK(evaluate(r1, t) == 0.0);

    // nonnegative path is untouched
    BVPath up = BVPath::make(2.0, 0.5, {{1.0, 1.0}, {1.0, -0.2}}, {{0.7, 0.3}});
    const BVPath r2 = reflect(up);
    for (double t = 0.0; t <= 2.0; t += 0.05)
        CHECK(evaluate(r2, t) == doctest::Approx(evaluate(up, t)).epsilon(1e-15));

    // vee from zero: flat then rising
    BVPath vee = BVPath::make(2.0, 0.0, {{1.0, -1.0}, {1.0, 1.0}});
    const BVPath r3 = reflect(vee);
    CHECK(evaluate(r3, 0.5) == 0.0);
    CHECK(evaluate(r3, 1.0) == 0.0);
    CHECK(evaluate(r3, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(evaluate(r3, 2.0) == doctest::Approx(1.0).epsilon(1e-15));

    // reflected paths never go negative, reflection is idempotent on the
    // piecewise representation (up to roundoff at the crossing splits)
    RngStream rng(11, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const BVPath p = random_path(rng);
        const BVPath r = reflect(p);
        const BVPath rr = reflect(r);
        CHECK(rr.ups.size() == r.ups.size());
        CHECK(rr.downs.size() == r.downs.size());
        for (double f = 0.0; f <= 1.0; f += 0.02) {
            const double t = f * p.horizon;
            const double scale = std::max(1.0, std::abs(evaluate(p, t)));
            CHECK(evaluate(r, t) >= -1e-12);
            CHECK(std::abs(evaluate(rr, t) - evaluate(r, t)) <= 1e-14 * scale);
        }
    }
}

TEST_CASE("reflection monotonicity under nondecreasing additions") {
    // adding a nonnegative nondecreasing piece never lowers the reflection
    RngStream rng(17, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const BVPath p = random_path(rng);
        const double extra_slope = rng.uniform();
        BVPath q = p;
        for (auto& s : q.segs) s.slope += extra_slope;
        q.ups.push_back({rng.uniform() * p.horizon * 0.999, 0.2 + rng.uniform()});
        std::sort(q.ups.begin(), q.ups.end(),
                  [](const Jump& a, const Jump& b) { return a.t < b.t; });
        const BVPath rp = reflect(p), rq = reflect(q);
        for (double f = 0.0; f <= 1.0; f += 0.01) {
            const double t = f * p.horizon;
            CHECK(evaluate(rq, t) >= evaluate(rp, t) - 1e-10);
        }
    }
}

TEST_CASE("hitting time") {
    BVPath desc = BVPath::make(4.0, 1.0, {{4.0, -0.5}});
    CHECK(hitting_time(desc) == doctest::Approx(2.0).epsilon(1e-15));

    BVPath leave_down = BVPath::make(1.0, 0.0, {{1.0, -0.3}});
    CHECK(hitting_time(leave_down) == 0.0);

    BVPath rising = BVPath::make(3.0, 1.0, {{3.0, 1.0}});
    CHECK(hitting_time(rising) == kInf);

    // down-jump straight onto the floor
    BVPath dj = BVPath::make(2.0, 1.0, {{2.0, 0.0}}, {}, {{0.75, 1.0}});
    CHECK(hitting_time(dj) == doctest::Approx(0.75).epsilon(1e-15));

    // rising from zero, then returning
    BVPath tri = BVPath::make(2.0, 0.0, {{1.0, 1.0}, {1.0, -1.0}});
    CHECK(hitting_time(tri) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("area of the reflected power") {
    BVPath down = BVPath::make(1.0, 0.0, {{1.0, -1.0}});
    CHECK(area_p(down, 1.0, 1.0) == 0.0);

    BVPath tri = BVPath::make(2.0, 0.0, {{1.0, 1.0}, {1.0, -1.0}});
    CHECK(area_p(tri, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(area_p(tri, 2.0, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(area_p(tri, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));

    // against a brute-force Riemann sum on random paths
    RngStream rng(23, 0);
    for (int rep = 0; rep < 25; ++rep) {
        const BVPath p = random_path(rng);
        for (double pw : {1.0, 2.0, 0.7}) {
            const double a = area_p(p, pw, p.horizon);
            const double b = riemann_area(p, pw, p.horizon);
            CHECK(a == doctest::Approx(b).epsilon(5e-4));
        }
    }
    CHECK_THROWS_AS(area_p(tri, 1.0, 3.0), std::invalid_argument);
}

TEST_CASE("discarding downward jumps") {
    BVPath plain = BVPath::make(1.0, 0.5, {{1.0, 0.2}});
    const BVPath same = discard_down_jumps(plain);
    CHECK(same.downs.empty());
    CHECK(same.segs.size() == plain.segs.size());

    BVPath with_down = BVPath::make(1.0, 0.5, {{1.0, 0.2}}, {}, {{0.5, 0.4}});
    const BVPath rid = discard_down_jumps(with_down);
    CHECK(rid.downs.empty());
    CHECK(evaluate(rid, 1.0) == doctest::Approx(evaluate(with_down, 1.0) + 0.4));

    // reflected area never drops when the downward jumps go away
    RngStream rng(5, 0);
    for (int rep = 0; rep < 1000; ++rep) {
        const BVPath p = random_path(rng);
        const BVPath q = discard_down_jumps(p);
        CHECK(area_p(q, 1.0, p.horizon) >= area_p(p, 1.0, p.horizon) - 1e-12);
    }
}

TEST_CASE("path literal round-trip") {
    RngStream rng(31, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const BVPath p = random_path(rng);
        const BVPath q = parse_path_literal(to_literal(p));
        CHECK(q.horizon == p.horizon);
        CHECK(q.start == p.start);
        REQUIRE(q.segs.size() == p.segs.size());
        for (size_t i = 0; i < p.segs.size(); ++i) {
            CHECK(q.segs[i].dur == p.segs[i].dur);
            CHECK(q.segs[i].slope == p.segs[i].slope);
        }
        REQUIRE(q.ups.size() == p.ups.size());
        for (size_t i = 0; i < p.ups.size(); ++i) {
            CHECK(q.ups[i].t == p.ups[i].t);
            CHECK(q.ups[i].size == p.ups[i].size);
        }
        REQUIRE(q.downs.size() == p.downs.size());
    }
    CHECK_THROWS_AS(parse_path_literal("seg 1 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_path_literal("bvpath 1 0\nwat 1 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_path_literal("bvpath 1 0\nseg abc 1\n"), std::invalid_argument);
}

TEST_CASE("path validation") {
    CHECK_THROWS_AS(BVPath::make(1.0, -0.1, {{1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(BVPath::make(1.0, 0.0, {{0.5, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(BVPath::make(1.0, 0.0, {{1.0, 0.0}}, {{0.3, 1.0}, {0.3, 2.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(BVPath::make(1.0, 0.0, {{1.0, 0.0}}, {{1.5, 1.0}}), std::invalid_argument);

    BVPath tv = BVPath::make(2.0, 0.0, {{1.0, 1.0}, {1.0, -2.0}}, {{0.5, 3.0}}, {{0.7, 0.5}});
    CHECK(tv.total_variation() == doctest::Approx(1.0 + 2.0 + 3.0 + 0.5));
}

TEST_CASE("step-drift paths") {
    StepDriftPath z{0.5, {{0.25, 1.0}, {0.75, 2.0}}};
    z.check();
    const BVPath p = z.to_bvpath();
    CHECK(evaluate(p, 1.0) == doctest::Approx(0.5 + 3.0));
    CHECK(evaluate(p, 0.5) == doctest::Approx(0.25 + 1.0));
    StepDriftPath bad{-0.1, {}};
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}
