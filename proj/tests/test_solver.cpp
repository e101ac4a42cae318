// Dual-form solver: bisection bracket guarantees, exact breakpoint
// enumeration for the indicator families, and agreement between the two.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pmerge/calibrator.hpp"
#include "pmerge/merge_exchangeable.hpp"
#include "pmerge/rng.hpp"
#include "pmerge/solver.hpp"

using namespace pmerge;
using cal::CalFamily;
using solver::DualCondition;
using solver::SolverMode;

namespace {

DualCondition make_cond(CalFamily f, SolverMode mode, int K, int k = 1,
                        double u = 1.0, std::vector<double> lambda = {}) {
    DualCondition c;
    c.cal.family = f;
    c.cal.K = K;
    c.cal.k = k;
    c.cal.lambda = std::move(lambda);
    c.mode = mode;
    c.u = u;
    return c;
}

PVec random_pvec(rng::Stream& s, int n) {
    std::vector<double> v(n);
    for (double& x : v) x = s.uniform();
    return PVec::from_unchecked(std::move(v));
}

constexpr double kStep50 = 8.881784197001252e-16;  // 2^-50

}  // namespace

TEST_CASE("bisection recovers hand-computed infima") {
    SUBCASE("arithmetic prefix condition") {
        auto c = make_cond(CalFamily::arithmetic, SolverMode::prefix_max, 3);
        const auto p = PVec::from({0.3, 0.1, 0.8});
        const auto out = solver::bisect(c, p, 50);
        CHECK(out.value >= 0.4);
        CHECK(out.value <= 0.4 + kStep50);
        CHECK(out.method == Method::bisection);
        CHECK(out.error_bound == doctest::Approx(kStep50).epsilon(1e-15));
    }
    SUBCASE("ruger indicator prefix condition") {
        auto c =
            make_cond(CalFamily::ruger_indicator, SolverMode::prefix_max, 4, 2);
        const auto p = PVec::from({0.5, 0.1, 0.4, 0.2});
        const auto out = solver::bisect(c, p, 50);
        CHECK(out.value >= 0.2);
        CHECK(out.value <= 0.2 + kStep50);
    }
    SUBCASE("grid harmonic batch condition at threshold one") {
        auto c = make_cond(CalFamily::grid_harmonic,
                           SolverMode::batch_threshold, 2);
        const auto p = PVec::from({0.1, 0.5});
        const auto out = solver::bisect(c, p, 50);
        CHECK(out.value >= 0.3 - kStep50);
        CHECK(out.value <= 0.3 + kStep50);
    }
    SUBCASE("all-ones input leaves the condition empty") {
        const auto p = PVec::from({1.0, 1.0, 1.0});
        for (auto f : {CalFamily::grid_harmonic, CalFamily::arithmetic,
                       CalFamily::harmonic, CalFamily::geometric}) {
            auto c = make_cond(f, SolverMode::prefix_max, 3);
            CHECK(solver::bisect(c, p, 50).value == 1.0);
        }
    }
}

TEST_CASE("breakpoint enumeration is exact") {
    SUBCASE("grid harmonic batch example") {
        auto c = make_cond(CalFamily::grid_harmonic,
                           SolverMode::batch_threshold, 2);
        const auto out = solver::breakpoint_exact(c, PVec::from({0.1, 0.5}));
        CHECK(out.value == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(out.method == Method::breakpoint_exact);
        CHECK(out.error_bound == 0.0);
    }
    SUBCASE("ruger prefix matches the exchangeable closed form exactly") {
        rng::Stream s(31, 0, 0);
        for (int trial = 0; trial < 200; ++trial) {
            const auto p = random_pvec(s, 5);
            auto c = make_cond(CalFamily::ruger_indicator,
                               SolverMode::prefix_max, 5, 3);
            const double exact = solver::breakpoint_exact(c, p).value;
            const double closed = ex::ex_ruger(p, 3).value;
            CHECK(exact == doctest::Approx(closed).epsilon(1e-15));
        }
    }
    SUBCASE("hommel grid reduces the generalized grid to grid harmonic") {
        const int K = 5;
        std::vector<double> grid{0.0};
        for (int j = 1; j <= K; ++j) grid.push_back(j / static_cast<double>(K));
        rng::Stream s(32, 0, 0);
        for (int trial = 0; trial < 200; ++trial) {
            const auto p = random_pvec(s, K);
            for (auto mode :
                 {SolverMode::batch_threshold, SolverMode::prefix_max}) {
                auto gh = make_cond(CalFamily::grid_harmonic, mode, K);
                auto gg = make_cond(CalFamily::generalized_grid, mode, K, 1,
                                    1.0, grid);
                CHECK(solver::breakpoint_exact(gh, p).value ==
                      doctest::Approx(solver::breakpoint_exact(gg, p).value)
                          .epsilon(1e-12));
            }
        }
    }
    SUBCASE("an exact zero collapses the infimum to zero") {
        auto c = make_cond(CalFamily::ruger_indicator, SolverMode::prefix_max,
                           3, 2);
        const auto p = PVec::from({0.4, 0.0, 0.9});
        CHECK(solver::breakpoint_exact(c, p).value == 0.0);
        CHECK(solver::bisect(c, p, 50).value <= kStep50);
    }
    SUBCASE("smooth families are rejected") {
        auto c = make_cond(CalFamily::harmonic, SolverMode::batch_threshold, 3);
        CHECK_THROWS_AS(solver::breakpoint_exact(c, PVec::from({0.2, 0.3})),
                        std::invalid_argument);
    }
}

TEST_CASE("bisection refinement brackets the infimum") {
    rng::Stream s(33, 0, 0);
    std::vector<DualCondition> conds{
        make_cond(CalFamily::arithmetic, SolverMode::prefix_max, 4),
        make_cond(CalFamily::harmonic, SolverMode::batch_threshold, 4),
        make_cond(CalFamily::geometric, SolverMode::batch_threshold, 4, 1,
                  0.7),
        make_cond(CalFamily::grid_harmonic, SolverMode::prefix_max, 4),
    };
    for (auto& c : conds) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto p = random_pvec(s, 4);
            for (int B : {10, 20, 40}) {
                const double coarse = solver::bisect(c, p, B).value;
                const double fine = solver::bisect(c, p, B + 1).value;
                CHECK(fine <= coarse);
                CHECK(coarse <= fine + std::ldexp(1.0, -B));
            }
        }
    }
}

TEST_CASE("the predicate is monotone in alpha") {
    rng::Stream s(34, 0, 0);
    std::vector<DualCondition> conds{
        make_cond(CalFamily::arithmetic, SolverMode::batch_threshold, 3, 1,
                  0.6),
        make_cond(CalFamily::grid_harmonic, SolverMode::prefix_max, 3),
        make_cond(CalFamily::generalized_mean, SolverMode::batch_threshold, 3),
        make_cond(CalFamily::arithmetic, SolverMode::ex_or_rand, 3, 1, 0.4),
    };
    conds[2].cal.r = -2.0;
    for (auto& c : conds) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto p = random_pvec(s, 3);
            bool seen = false;
            for (int i = 1; i <= 200; ++i) {
                const bool h = solver::condition_holds(c, p, i / 200.0);
                CHECK((h || !seen));  // once true, stays true
                seen = seen || h;
            }
        }
    }
}

TEST_CASE("solver input validation") {
    const auto p = PVec::from({0.2, 0.4});
    auto c = make_cond(CalFamily::arithmetic, SolverMode::batch_threshold, 2);
    CHECK_THROWS_AS(solver::bisect(c, p, 0), std::invalid_argument);
    CHECK_THROWS_AS(solver::bisect(c, PVec::from({}), 50),
                    std::invalid_argument);
    c.u = 0.0;
    CHECK_THROWS_AS(solver::bisect(c, p, 50), std::invalid_argument);
    c.u = 1.5;
    CHECK_THROWS_AS(solver::bisect(c, p, 50), std::invalid_argument);
    c.u = 0.5;
    CHECK_THROWS_AS(solver::condition_holds(c, p, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(solver::condition_holds(c, p, 1.5),
                    std::invalid_argument);
}
