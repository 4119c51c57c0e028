#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "oracle.hpp"

using namespace rrw;

TEST_CASE("stationary law") {
    // all-down chain: point mass at zero
    auto down = IncrementModel::lattice({-1}, {1.0});
    const auto st0 = stationary(LatticeChain::from_model(down, 10));
    CHECK(st0.pi[0] == doctest::Approx(1.0).epsilon(1e-15));

    // two-point chain: geometric with ratio q/(1-q)
    auto tp = IncrementModel::two_point(0.3);
    const auto st = stationary(LatticeChain::from_model(tp, 300));
    double tot = 0.0;
    for (double v : st.pi) tot += v;
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st.residual <= 1e-12);
    CHECK(st.pi[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    const double ratio = 0.3 / 0.7;
    for (int k = 1; k <= 20; ++k)
        CHECK(st.pi[k] / st.pi[k - 1] == doctest::Approx(ratio).epsilon(1e-9));

    // log-tail slope equals -beta on the resolvable window
    const auto [lo, hi] = tail_fit_window(st);
    const double slope = stationary_log_tail_slope(st.pi, lo, hi);
    const double beta = tilt_root_beta(tp);
    CHECK(std::abs(-slope - beta) / beta <= 0.005);
}

TEST_CASE("time-reversal identity") {
    auto tp = IncrementModel::two_point(0.3);
    const auto small = LatticeChain::from_model(tp, 24);
    const auto sts = stationary(small);

    for (int n : {1, 2, 5, 12}) {
        const auto ex = duality_check(small, sts.pi, n, 0.4, 1.0, DualityMode::Exhaustive);
        CHECK(ex.gap <= (n == 1 ? 1e-14 : 1e-12));
        const auto dp = duality_check(small, sts.pi, n, 0.4, 1.0, DualityMode::DP);
        // the two algorithms agree where both run
        CHECK(std::abs(dp.lhs - ex.lhs) <= 1e-13);
        CHECK(std::abs(dp.rhs - ex.rhs) <= 1e-13);
    }

    const auto big = LatticeChain::from_model(tp, 400);
    const auto stb = stationary(big);
    const auto dp = duality_check(big, stb.pi, 150, 0.5, 1.0, DualityMode::DP);
    CHECK(dp.gap <= 1e-10);
    CHECK(dp.lhs > 0.0);

    // a wrong atom mass breaks the normalization visibly
    const auto bad = duality_check(small, sts.pi, 6, 0.3, 1.0, DualityMode::Exhaustive,
                                   sts.pi[0] * 0.5);
    CHECK(bad.gap > 1e-3);
}

TEST_CASE("last-cycle bounds") {
    auto tp = IncrementModel::two_point(0.3);
    const auto chain = LatticeChain::from_model(tp, 300);
    const auto st = stationary(chain);

    // threshold zero: every probability is its unconditioned version
    const auto triv = last_cycle_bounds_check(chain, st.pi, 20, 0.0, 1.0);
    CHECK(triv.upper_ok);
    CHECK(triv.lower_ok);

    const auto rep = last_cycle_bounds_check(chain, st.pi, 50, 10.0, 1.0);
    CHECK(rep.regime_ok);
    CHECK(rep.upper_ok);
    CHECK(rep.lower_ok);
    // strict slack on both sides
    CHECK(rep.lhs < rep.upper);
    CHECK(rep.lhs > rep.lower_core);
    CHECK(rep.dropped >= 0.0);
}

TEST_CASE("exact cycle law") {
    // all-down chain: immediate returns
    auto down = IncrementModel::lattice({-1}, {1.0});
    const auto law0 = exact_cycle_law(LatticeChain::from_model(down, 8), 1.0, 100, 64.0);
    CHECK(law0.tau_pmf[0] == doctest::Approx(1.0));
    CHECK(law0.Etau == doctest::Approx(1.0));
    CHECK(law0.area_tail[0] == doctest::Approx(1.0));
    CHECK(law0.area_tail[1] == 0.0);

    auto tp = IncrementModel::two_point(0.3);
    const auto chain = LatticeChain::from_model(tp, 300);
    const auto st = stationary(chain);
    const auto law = exact_cycle_law(chain, 1.0, 10000, 4096.0);

    // Kac identity for the truncated chain
    CHECK(std::abs(law.Etau * st.pi[0] - 1.0) <= 1e-10);
    CHECK(law.tau_leak <= 1e-14);

    // hand-computable heads: P(T1=1) = 1-q, P(T1=2) = q(1-q)
    CHECK(law.tau_pmf[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(law.tau_pmf[1] == doctest::Approx(0.3 * 0.7).epsilon(1e-14));
    // W >= 1 iff the first step goes up; W in {0, 1} unless the start is
    // up-up, which already carries area 1 + 2 + 1 = 4, so P(W >= 2) = q^2
    CHECK(law.area_tail[1] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(law.area_tail[2] == doctest::Approx(0.09).epsilon(1e-13));
    CHECK(law.area_tail[4] == doctest::Approx(0.09).epsilon(1e-13));

    // the area tail is nonincreasing and strictly positive deep out
    for (size_t k = 1; k < 2000; ++k) CHECK(law.area_tail[k] <= law.area_tail[k - 1] + 1e-18);
    CHECK(law.area_tail[2000] > 0.0);
}

TEST_CASE("return probabilities") {
    auto tp = IncrementModel::two_point(0.3);
    const auto chain = LatticeChain::from_model(tp, 100);
    const auto p0 = return_probability(chain, 200);
    CHECK(p0[0] == 1.0);
    CHECK(p0[1] == doctest::Approx(0.7));
    const auto st = stationary(chain);
    CHECK(p0[200] == doctest::Approx(st.pi[0]).epsilon(1e-10));
    // started from the minimal state, the atom mass converges from above
    for (int k = 0; k <= 200; ++k) CHECK(p0[k] >= st.pi[0] - 1e-12);
}

TEST_CASE("oracle rejects non-lattice models") {
    CHECK_THROWS_AS(LatticeChain::from_model(IncrementModel::gaussian(-1.0, 1.0), 10),
                    std::invalid_argument);
}
