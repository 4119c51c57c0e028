#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "model.hpp"

using namespace rrw;

namespace {

// independent two-point conjugate: ((1+v)/2) log((1+v)/(2q)) + ((1-v)/2) log((1-v)/(2(1-q)))
double two_point_conjugate_oracle(double q, double v) {
    const double a = 0.5 * (1.0 + v), b = 0.5 * (1.0 - v);
    double s = 0.0;
    if (a > 0) s += a * std::log(a / q);
    if (b > 0) s += b * std::log(b / (1.0 - q));
    return s;
}

}  // namespace

TEST_CASE("log-mgf closed forms") {
    auto tp = IncrementModel::two_point(0.3);
    CHECK(log_mgf(tp, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    // direct evaluation against the defining sum
    for (double th : {-3.0, -1.0, 0.5, 2.0, 30.0})
        CHECK(log_mgf(tp, th) ==
              doctest::Approx(std::log(0.3 * std::exp(th) + 0.7 * std::exp(-th))).epsilon(1e-13));

    auto ga = IncrementModel::gaussian(-1.0, 1.0);
    CHECK(log_mgf(ga, 2.0) == doctest::Approx(0.0));  // mu*th + th^2/2 = -2 + 2

    auto ex = IncrementModel::exp_shift(1.0, 2.0);
    CHECK(ex.mu == doctest::Approx(-1.0));
    CHECK(log_mgf(ex, 1.0) == kInf);  // boundary of the MGF domain
    CHECK(log_mgf(ex, 0.5) == doctest::Approx(-0.5 * 2.0 + std::log(1.0 / 0.5)));
}

TEST_CASE("legendre transform values") {
    auto tp = IncrementModel::two_point(0.3);
    auto ga = IncrementModel::gaussian(-1.0, 1.0);
    ConvexConjugate ta{&tp, ConjugateMode::Analytic, 1e-12};
    ConvexConjugate ganal{&ga, ConjugateMode::Analytic, 1e-12};

    CHECK(legendre(ta, tp.mu) == 0.0);
    CHECK(legendre(ganal, ga.mu) == 0.0);
    CHECK(legendre(ganal, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(legendre(ta, 0.0) == doctest::Approx(0.0871766935723889).epsilon(1e-12));
    CHECK(legendre(ta, 0.0) == doctest::Approx(two_point_conjugate_oracle(0.3, 0.0)).epsilon(1e-14));
    CHECK(legendre(ta, 1.0) == doctest::Approx(-std::log(0.3)).epsilon(1e-14));
    CHECK(legendre(ta, -1.0) == doctest::Approx(-std::log(0.7)).epsilon(1e-14));
    CHECK(legendre(ta, 1.5) == kInf);
    CHECK(legendre(ta, -1.5) == kInf);

    auto ex = IncrementModel::exp_shift(1.0, 2.0);
    ConvexConjugate cex{&ex, ConjugateMode::Analytic, 1e-12};
    CHECK(legendre(cex, ex.mu) == 0.0);
    CHECK(legendre(cex, -2.0) == kInf);  // at the essential infimum
    CHECK(legendre(cex, -2.5) == kInf);
    // r(v+c) - 1 - log(r(v+c)) at v = 0: 2 - 1 - log 2
    CHECK(legendre(cex, 0.0) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("numeric conjugate agrees with the closed forms") {
    auto tp = IncrementModel::two_point(0.3);
    auto ga = IncrementModel::gaussian(-1.0, 1.0);
    for (const IncrementModel* m : {&tp, &ga}) {
        ConvexConjugate ana{m, ConjugateMode::Analytic, 1e-12};
        ConvexConjugate num{m, ConjugateMode::Numeric, 1e-12};
        const double lo = m->family == Family::Gaussian ? -5.0 : -0.99;
        const double hi = m->family == Family::Gaussian ? 3.0 : 0.99;
        for (int i = 0; i < 200; ++i) {
            const double v = lo + (hi - lo) * i / 199.0;
            CHECK(std::abs(legendre(ana, v) - legendre(num, v)) <= 1e-8);
        }
        CHECK(legendre(num, m->mu) <= 1e-12);
    }
}

TEST_CASE("legendre gradient and conjugate duality") {
    auto tp = IncrementModel::two_point(0.3);
    auto ga = IncrementModel::gaussian(-1.0, 1.0);
    ConvexConjugate ta{&tp, ConjugateMode::Analytic, 1e-12};
    ConvexConjugate ganal{&ga, ConjugateMode::Analytic, 1e-12};

    CHECK(legendre_grad(ta, tp.mu) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(legendre_grad(ganal, 1.0) == doctest::Approx(2.0));
    CHECK(legendre_grad(ta, 0.0) == doctest::Approx(0.5 * std::log(7.0 / 3.0)).epsilon(1e-13));
    CHECK_THROWS_AS(legendre_grad(ta, 1.0), std::domain_error);
    CHECK_THROWS_AS(legendre_grad(ta, 1.5), std::domain_error);

    // Lambda(grad) + Lambda* = v * grad along a dense grid
    auto ex = IncrementModel::exp_shift(1.0, 2.0);
    ConvexConjugate cex{&ex, ConjugateMode::Analytic, 1e-12};
    struct Case {
        const IncrementModel* m;
        const ConvexConjugate* c;
        double lo, hi;
    };
    for (const Case& cs : {Case{&tp, &ta, -0.95, 0.95}, Case{&ga, &ganal, -4.0, 2.0},
                           Case{&ex, &cex, -1.9, 4.0}}) {
        for (int i = 0; i <= 100; ++i) {
            const double v = cs.lo + (cs.hi - cs.lo) * i / 100.0;
            const double g = legendre_grad(*cs.c, v);
            const double resid = log_mgf(*cs.m, g) + legendre(*cs.c, v) - v * g;
            CHECK(std::abs(resid) <= 1e-11);
            // gradient consistency with the forward derivative
            CHECK(log_mgf_grad(*cs.m, g) == doctest::Approx(v).epsilon(1e-9));
        }
    }
}

TEST_CASE("conjugate is monotone away from the mean") {
    auto tp = IncrementModel::two_point(0.3);
    ConvexConjugate ta{&tp, ConjugateMode::Analytic, 1e-12};
    double prev = legendre(ta, tp.mu);
    for (double v = tp.mu; v <= 0.999; v += 0.01) {
        const double cur = legendre(ta, v);
        CHECK(cur >= prev - 1e-14);
        prev = cur;
    }
    prev = legendre(ta, tp.mu);
    for (double v = tp.mu; v >= -0.999; v -= 0.01) {
        const double cur = legendre(ta, v);
        CHECK(cur >= prev - 1e-14);
        prev = cur;
    }
}

TEST_CASE("tilt root beta") {
    auto tp = IncrementModel::two_point(0.3);
    CHECK(tilt_root_beta(tp) == doctest::Approx(std::log(7.0 / 3.0)).epsilon(1e-12));
    auto ga = IncrementModel::gaussian(-1.0, 1.0);
    CHECK(tilt_root_beta(ga) == doctest::Approx(2.0).epsilon(1e-12));
    auto ex = IncrementModel::exp_shift(1.0, 2.0);
    const double b = tilt_root_beta(ex);
    CHECK(b > 0.0);
    CHECK(b < 1.0);  // always below the MGF boundary for this family
    CHECK(std::abs(log_mgf(ex, b)) <= 1e-10);
    // root of Lambda whenever beta < theta_plus
    CHECK(std::abs(log_mgf(tp, tilt_root_beta(tp))) <= 1e-12);
}

TEST_CASE("sampling contract") {
    auto tp = IncrementModel::two_point(0.3);
    CHECK(sample_increments(tp, 0, 1, 0).empty());
    const auto a = sample_increments(tp, 1000, 42, 7);
    const auto b = sample_increments(tp, 1000, 42, 7);
    CHECK(a == b);  // same (model, seed, stream) replays exactly
    const auto c = sample_increments(tp, 1000, 42, 8);
    CHECK(a != c);

    // empirical mean within 4 standard errors of 2q - 1
    const long n = 1000000;
    const auto xs = sample_increments(tp, n, 99, 1);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    const double se = std::sqrt((1.0 - tp.mu * tp.mu) / n);
    CHECK(std::abs(mean - tp.mu) <= 4.0 * se);

    // gaussian sampler moments
    auto ga = IncrementModel::gaussian(-1.0, 1.0);
    const auto gs = sample_increments(ga, n, 99, 2);
    double gm = 0.0, gv = 0.0;
    for (double x : gs) gm += x;
    gm /= n;
    for (double x : gs) gv += (x - gm) * (x - gm);
    gv /= n - 1;
    CHECK(std::abs(gm + 1.0) <= 4.0 / std::sqrt(double(n)));
    CHECK(gv == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("assumption validation") {
    CHECK(validate_assumptions(IncrementModel::two_point(0.3)).all_pass());
    CHECK(validate_assumptions(IncrementModel::gaussian(-1.0, 1.0)).all_pass());
    CHECK(validate_assumptions(IncrementModel::exp_shift(1.0, 2.0)).all_pass());

    const auto rep = validate_assumptions(IncrementModel::two_point(0.6));
    CHECK_FALSE(rep.all_pass());
    bool mean_failed = false;
    for (const auto& c : rep.checks)
        if (c.name == "mean-negative" && !c.pass) mean_failed = true;
    CHECK(mean_failed);

    // no upward mass at all
    const auto deg = validate_assumptions(IncrementModel::lattice({-1}, {1.0}));
    bool pos_failed = false;
    for (const auto& c : deg.checks)
        if (c.name == "positive-mass" && !c.pass) pos_failed = true;
    CHECK(pos_failed);
}

TEST_CASE("model construction errors") {
    CHECK_THROWS_AS(IncrementModel::two_point(0.0), std::invalid_argument);
    CHECK_THROWS_AS(IncrementModel::gaussian(0.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(IncrementModel::lattice({1, -1}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(IncrementModel::make("cauchy", {}), std::invalid_argument);
    CHECK_THROWS_AS(IncrementModel::make("two-point", {0.3, 0.4}), std::invalid_argument);
}
