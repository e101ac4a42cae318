// Uniformly-randomized merging rules: closed forms, u = 1 reductions to the
// deterministic rules, randomizer plumbing, and monotonicity in u.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pmerge/merge_batch.hpp"
#include "pmerge/merge_exchangeable.hpp"
#include "pmerge/merge_randomized.hpp"
#include "pmerge/rng.hpp"

using namespace pmerge;
namespace rd = pmerge::rand;

namespace {

PVec random_pvec(rng::Stream& s, int n) {
    std::vector<double> v(n);
    for (double& x : v) x = s.uniform();
    return PVec::from_unchecked(std::move(v));
}

RandSource at(double u) { return RandSource::explicit_u_value(u); }

constexpr double kStep49 = 1.7763568394002505e-15;  // 2^-49

}  // namespace

TEST_CASE("randomized order statistic rule") {
    const auto p = PVec::from({0.5, 0.1, 0.4, 0.2});
    SUBCASE("a small u selects an earlier order statistic") {
        const auto out = rd::ur_ruger(p, 2, at(0.4));
        CHECK(out.value == doctest::Approx(0.2).epsilon(1e-15));
        CHECK(out.realized_u == 0.4);
    }
    SUBCASE("u = 1 recovers the deterministic rule exactly") {
        rng::Stream s(81, 0, 0);
        for (int trial = 0; trial < 500; ++trial) {
            const int n = 1 + trial % 8;
            const auto q = random_pvec(s, n);
            const int k = 1 + trial % n;
            CHECK(rd::ur_ruger(q, k, at(1.0)).value ==
                  batch::ruger(q, k).value);
        }
    }
    SUBCASE("k = 1 ignores the randomizer") {
        for (double u : {0.01, 0.4, 1.0})
            CHECK(rd::ur_ruger(p, 1, at(u)).value ==
                  batch::bonferroni(p).value);
    }
    SUBCASE("zero input and invalid u") {
        CHECK(rd::ur_ruger(PVec::from({0.0, 0.5}), 1, at(0.5)).value == 0.0);
        CHECK_THROWS_AS(rd::ur_ruger(p, 2, at(0.0)), std::invalid_argument);
        CHECK_THROWS_AS(rd::ur_ruger(p, 5, at(0.5)), std::invalid_argument);
    }
}

TEST_CASE("randomized average rule") {
    const auto p = PVec::from({0.1, 0.2, 0.6});
    SUBCASE("closed values at u = 0.5") {
        CHECK(rd::ua(p, at(0.5), Variant::simple).value ==
              doctest::Approx(0.4).epsilon(1e-15));
        CHECK(rd::ua(p, at(0.5), Variant::tight).value ==
              doctest::Approx(0.24).epsilon(1e-15));
        CHECK(rd::ua(p, at(0.5), Variant::wang).value ==
              doctest::Approx(0.3).epsilon(1e-15));
    }
    SUBCASE("u = 1 reductions") {
        rng::Stream s(82, 0, 0);
        for (int trial = 0; trial < 500; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 7);
            CHECK(rd::ua(q, at(1.0), Variant::simple).value ==
                  batch::twice_average(q).value);
            const double w = rd::ua(q, at(1.0), Variant::wang).value;
            CHECK(w == 1.0);  // denominator collapses, average is positive
        }
    }
    SUBCASE("wang and simple do not dominate each other") {
        const double a_lo = rd::ua(p, at(0.5), Variant::wang).value;
        const double s_lo = rd::ua(p, at(0.5), Variant::simple).value;
        CHECK(a_lo < s_lo);  // u below 2/3: the baseline is smaller
        const double a_hi = rd::ua(p, at(0.9), Variant::wang).value;
        const double s_hi = rd::ua(p, at(0.9), Variant::simple).value;
        CHECK(a_hi > s_hi);  // u above 2/3: the baseline is larger
    }
    SUBCASE("tight never exceeds simple") {
        rng::Stream s(83, 0, 0);
        for (int trial = 0; trial < 3000; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 7);
            const double u = s.uniform();
            CHECK(rd::ua(q, at(u), Variant::tight).value <=
                  rd::ua(q, at(u), Variant::simple).value + 1e-15);
        }
    }
    SUBCASE("tight returns zero on a zero input") {
        CHECK(rd::ua(PVec::from({0.0, 0.7}), at(0.3), Variant::tight).value ==
              0.0);
    }
    CHECK_THROWS_AS(rd::ua(p, at(0.5), Variant::classical),
                    std::invalid_argument);
}

TEST_CASE("randomized harmonic rule") {
    const auto p = PVec::from({0.1, 0.1});
    CHECK(rd::uh(p, at(0.5), Variant::simple).value ==
          doctest::Approx(0.166331712998914049).epsilon(1e-14));
    SUBCASE("u = 1 reductions are exact") {
        rng::Stream s(84, 0, 0);
        for (int trial = 0; trial < 500; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 7);
            CHECK(rd::uh(q, at(1.0), Variant::simple).value ==
                  batch::harmonic(q, false).value);
            CHECK(rd::uh(q, at(1.0), Variant::tight).value ==
                  batch::harmonic(q, true).value);
        }
    }
    CHECK_THROWS_AS(rd::uh(PVec::from({0.4}), at(0.5), Variant::simple),
                    std::invalid_argument);
}

TEST_CASE("randomized geometric rule") {
    CHECK(rd::ug(PVec::from({0.04, 0.09}), at(0.5), Variant::simple).value ==
          doctest::Approx(0.098923276242007689).epsilon(1e-14));
    CHECK(rd::ug(PVec::from({0.01, 1.0}), at(1.0), Variant::tight).value ==
          doctest::Approx(0.073890560989306502).epsilon(1e-14));
    SUBCASE("u = 1 reductions are exact") {
        rng::Stream s(85, 0, 0);
        for (int trial = 0; trial < 500; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 7);
            CHECK(rd::ug(q, at(1.0), Variant::simple).value ==
                  batch::geometric(q, false).value);
            CHECK(rd::ug(q, at(1.0), Variant::tight).value ==
                  batch::geometric(q, true).value);
        }
    }
}

TEST_CASE("randomized grid harmonic rule") {
    const auto p = PVec::from({0.1, 0.1});
    SUBCASE("the support indicator binds before the threshold") {
        for (double u : {0.5, 0.4}) {
            const double v = rd::u_hommel(p, at(u)).value;
            CHECK(v >= 0.15 - kStep49);
            CHECK(v <= 0.15 + kStep49);
            CHECK(rd::u_hommel(p, at(u), 50, Method::breakpoint_exact)
                      .value == doctest::Approx(0.15).epsilon(1e-15));
        }
    }
    SUBCASE("u = 1 equals the exact deterministic rule bitwise") {
        rng::Stream s(86, 0, 0);
        for (int trial = 0; trial < 300; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 7);
            CHECK(rd::u_hommel(q, at(1.0)).value ==
                  batch::hommel(q, true).value);
        }
    }
    SUBCASE("smaller u never increases the value") {
        rng::Stream s(87, 0, 0);
        for (int trial = 0; trial < 200; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 7);
            double prev = 0.0;
            for (double u : {0.1, 0.3, 0.5, 0.8, 1.0}) {
                const double v = rd::u_hommel(q, at(u)).value;
                CHECK(v + kStep49 >= prev);
                prev = v;
            }
        }
    }
    CHECK_THROWS_AS(rd::u_hommel(p, at(0.0)), std::invalid_argument);
}

TEST_CASE("randomized generalized mean rule") {
    SUBCASE("r = 1 and r = -1 match the average and harmonic forms") {
        rng::Stream s(88, 0, 0);
        for (int trial = 0; trial < 400; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 6);
            const double u = s.uniform();
            CHECK(rd::u_generalized_mean(q, 1.0, at(u), Variant::simple)
                      .value ==
                  doctest::Approx(rd::ua(q, at(u), Variant::simple).value)
                      .epsilon(1e-12));
            CHECK(rd::u_generalized_mean(q, -1.0, at(u), Variant::simple)
                      .value ==
                  doctest::Approx(rd::uh(q, at(u), Variant::simple).value)
                      .epsilon(1e-12));
        }
    }
    SUBCASE("u = 1 recovers the deterministic rule exactly") {
        rng::Stream s(89, 0, 0);
        for (double r : {-2.0, 0.5, 2.0}) {
            for (int trial = 0; trial < 200; ++trial) {
                const auto q = random_pvec(s, 2 + trial % 6);
                CHECK(rd::u_generalized_mean(q, r, at(1.0), Variant::simple)
                          .value == batch::generalized_mean(q, r).value);
            }
        }
        CHECK(rd::u_generalized_mean(PVec::from({0.3, 0.4}), 2.0, at(1.0),
                                     Variant::simple)
                  .value ==
              doctest::Approx(0.61237243569579447).epsilon(1e-14));
    }
    SUBCASE("tight never exceeds simple") {
        rng::Stream s(90, 0, 0);
        for (double r : {-2.0, 0.5, 2.0}) {
            for (int trial = 0; trial < 150; ++trial) {
                const auto q = random_pvec(s, 2 + trial % 6);
                const double u = s.uniform();
                CHECK(
                    rd::u_generalized_mean(q, r, at(u), Variant::tight).value <=
                    rd::u_generalized_mean(q, r, at(u), Variant::simple).value +
                        kStep49);
            }
        }
    }
    CHECK_THROWS_AS(rd::u_generalized_mean(PVec::from({0.1, 0.2}), 0.0,
                                           at(0.5), Variant::simple),
                    std::invalid_argument);
}

TEST_CASE("randomized exchangeable rule") {
    cal::CalibratorSpec arith;
    arith.family = cal::CalFamily::arithmetic;
    arith.K = 2;
    SUBCASE("u = 1 takes the better of first-value and prefix conditions") {
        const auto out = rd::randomized_ex(arith, PVec::from({0.1, 0.9}),
                                           at(1.0));
        CHECK(out.value >= 0.2 - kStep49);
        CHECK(out.value <= 0.2 + kStep49);
        CHECK(out.rule.mode == Mode::exchangeable_randomized);
    }
    SUBCASE("a small u lets the first p-value clear on its own") {
        const auto out = rd::randomized_ex(arith, PVec::from({0.3, 0.9}),
                                           at(0.01));
        CHECK(out.value >= 0.30150753768844221 - kStep49);
        CHECK(out.value <= 0.30150753768844221 + kStep49);
    }
    SUBCASE("never worse than the pure exchangeable rule") {
        rng::Stream s(91, 0, 0);
        for (int trial = 0; trial < 500; ++trial) {
            const auto q = random_pvec(s, 2 + trial % 5);
            const double u = s.uniform();
            cal::CalibratorSpec cs = arith;
            cs.K = static_cast<int>(q.size());
            CHECK(rd::randomized_ex(cs, q, at(u)).value <=
                  ex::ex_average(q, Variant::tight).value + kStep49);
        }
    }
    CHECK_THROWS_AS(rd::randomized_ex(arith, PVec::from({0.1, 0.9}), at(0.0)),
                    std::invalid_argument);
}

TEST_CASE("monotone in the randomizer") {
    rng::Stream s(92, 0, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto q = random_pvec(s, 2 + trial % 6);
        double prev_r = 0.0, prev_a = 0.0, prev_h = 0.0, prev_g = 0.0;
        for (double u : {0.05, 0.2, 0.5, 0.75, 1.0}) {
            const double vr = rd::ur_ruger(q, 2, at(u)).value;
            const double va = rd::ua(q, at(u), Variant::tight).value;
            const double vh = rd::uh(q, at(u), Variant::tight).value;
            const double vg = rd::ug(q, at(u), Variant::simple).value;
            CHECK(vr + 1e-15 >= prev_r);
            CHECK(va + 1e-15 >= prev_a);
            CHECK(vh + 1e-15 >= prev_h);
            CHECK(vg + 1e-15 >= prev_g);
            prev_r = vr;
            prev_a = va;
            prev_h = vh;
            prev_g = vg;
        }
    }
}

TEST_CASE("randomizer sources") {
    const auto p = PVec::from({0.2, 0.3, 0.9});
    SUBCASE("seeded draws are replayable and recorded") {
        const auto a = rd::ua(p, RandSource::seeded(7), Variant::simple);
        const auto b = rd::ua(p, RandSource::seeded(7), Variant::simple);
        CHECK(a.value == b.value);
        CHECK(a.realized_u == b.realized_u);
        rng::Stream expect(7, 0, 1);
        CHECK(a.realized_u == expect.uniform());
        const auto c = rd::ua(p, RandSource::seeded(8), Variant::simple);
        CHECK(c.realized_u != a.realized_u);
        CHECK(rd::ua(p, at(*a.realized_u), Variant::simple).value == a.value);
    }
    SUBCASE("the first p-value can serve as the randomizer") {
        const auto out =
            rd::uh(PVec::from({0.5, 0.1, 0.1}), RandSource::first_pvalue(true),
                   Variant::simple);
        CHECK(out.realized_u == 0.5);
        CHECK(out.value ==
              rd::uh(PVec::from({0.1, 0.1}), at(0.5), Variant::simple).value);
        CHECK_THROWS_AS(rd::uh(PVec::from({0.5, 0.1, 0.1}),
                               RandSource::first_pvalue(false),
                               Variant::simple),
                        std::invalid_argument);
        CHECK_THROWS_AS(rd::ua(PVec::from({0.5}), RandSource::first_pvalue(true),
                               Variant::simple),
                        std::invalid_argument);
    }
    SUBCASE("explicit u is validated at construction") {
        CHECK_THROWS_AS(RandSource::explicit_u_value(-0.1),
                        std::invalid_argument);
        CHECK_THROWS_AS(RandSource::explicit_u_value(1.5),
                        std::invalid_argument);
    }
}
