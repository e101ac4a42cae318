// Calibrator families: frozen point values, threshold constants, closed-form
// integrals against quadrature, and the grid validation report.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pmerge/calibrator.hpp"

using namespace pmerge;
using cal::CalFamily;
using cal::CalibratorSpec;

namespace {

CalibratorSpec make(CalFamily f, int K, int k = 1, double r = 1.0,
                    std::vector<double> lambda = {}) {
    CalibratorSpec s;
    s.family = f;
    s.K = K;
    s.k = k;
    s.r = r;
    s.lambda = std::move(lambda);
    return s;
}

const std::vector<double> kQuartiles{0.0, 0.25, 0.5, 0.75, 1.0};

}  // namespace

TEST_CASE("harmonic numbers and grid constants") {
    CHECK(cal::harmonic_number(1) == 1.0);
    CHECK(cal::harmonic_number(2) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(cal::harmonic_number(3) ==
          doctest::Approx(11.0 / 6.0).epsilon(1e-15));
    // h_M for the quartile grid: 1 + 0.25/0.5 + 0.25/0.75 + 0.25/1
    CHECK(cal::grid_constant(kQuartiles) ==
          doctest::Approx(1.0 + 0.5 + 1.0 / 3.0 + 0.25).epsilon(1e-15));
    // the Hommel grid (0, 1/K, ..., 1) reproduces the harmonic number
    std::vector<double> hommel_grid{0.0};
    for (int j = 1; j <= 5; ++j) hommel_grid.push_back(j / 5.0);
    CHECK(cal::grid_constant(hommel_grid) ==
          doctest::Approx(cal::harmonic_number(5)).epsilon(1e-14));
}

TEST_CASE("harmonic threshold T_K = ln K + ln ln K + 1") {
    CHECK(cal::harmonic_threshold(2) ==
          doctest::Approx(1.3266342599782810).epsilon(1e-15));
    CHECK(cal::harmonic_threshold(100) ==
          doctest::Approx(7.1323498117959925).epsilon(1e-15));
    // the validity condition at K = 2: 2T + 1 = 3.6533 <= e^T = 3.7683
    const double T = cal::harmonic_threshold(2);
    CHECK(2.0 * T + 1.0 <= std::exp(T));
}

TEST_CASE("threshold inequalities across the full K range") {
    // K T_K + 1 <= e^{T_K} for K in 2..10^4
    for (int K = 2; K <= 10000; ++K) {
        const double T = cal::harmonic_threshold(K);
        CHECK(K * T + 1.0 <= std::exp(T));
    }
    // T_K + 1 < e ln K for K in 4..10^4 (the constant improvement claim)
    for (int K = 4; K <= 10000; ++K) {
        const double T = cal::harmonic_threshold(K);
        CHECK(T + 1.0 < std::exp(1.0) * std::log(static_cast<double>(K)));
    }
}

TEST_CASE("generalized mean threshold and scale") {
    SUBCASE("positive r: T = r^2/(r+1), independent of K") {
        CHECK(cal::generalized_mean_threshold(1.0, 2) ==
              doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cal::generalized_mean_threshold(1.0, 50) ==
              doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cal::generalized_mean_threshold(2.0, 10) ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("scale a_{r,K} = (1 - T/r)^{-1/r} = (r+1)^{1/r} for r > 0") {
        CHECK(cal::generalized_mean_scale(1.0, 5) ==
              doctest::Approx(2.0).epsilon(1e-15));
        CHECK(cal::generalized_mean_scale(2.0, 5) ==
              doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
        CHECK(cal::generalized_mean_scale(3.0, 5) ==
              doctest::Approx(std::pow(4.0, 1.0 / 3.0)).epsilon(1e-14));
    }
    SUBCASE("r = -1 reuses the harmonic threshold") {
        CHECK(cal::generalized_mean_threshold(-1.0, 7) ==
              cal::harmonic_threshold(7));
    }
    SUBCASE("other negative r: threshold makes the integral one") {
        for (double r : {-2.0, -0.5}) {
            for (int K : {2, 10, 50}) {
                auto s = make(CalFamily::generalized_mean, K, 1, r);
                CHECK(cal::integral_quadrature(s) ==
                      doctest::Approx(1.0).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("pointwise evaluation of each family") {
    SUBCASE("ruger indicator") {
        const cal::Calibrator c(make(CalFamily::ruger_indicator, 4, 2));
        CHECK(c.eval(0.5) == 2.0);   // p in (0, k/K]
        CHECK(c.eval(0.25) == 2.0);
        CHECK(c.eval(0.51) == 0.0);  // outside the support
        CHECK(c.eval(1.5) == 0.0);
        CHECK(std::isinf(c.eval(0.0)));
    }
    SUBCASE("grid harmonic") {
        const cal::Calibrator c(make(CalFamily::grid_harmonic, 3));
        // h_3 = 11/6; K h_3 p = 0.55 -> ceil = 1 -> value 3
        CHECK(c.eval(0.1) == 3.0);
        CHECK(c.eval(0.0) == 3.0);  // finite at zero: the cap value K
        // h_3 p > 1 switches the indicator off
        CHECK(c.eval(0.6) == 0.0);
        CHECK(c.eval(2.0) == 0.0);
    }
    SUBCASE("generalized grid with quartiles") {
        auto s = make(CalFamily::generalized_grid, 4, 1, 1.0, kQuartiles);
        const cal::Calibrator c(s);
        const double hM = cal::grid_constant(kQuartiles);
        CHECK(c.eval(0.2 / hM) == doctest::Approx(4.0).epsilon(1e-15));
        CHECK(c.eval(0.4 / hM) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(c.eval(0.9 / hM) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(c.eval(1.01 / hM) == 0.0);
        CHECK(std::isinf(c.eval(0.0)));
    }
    SUBCASE("arithmetic") {
        const cal::Calibrator c(make(CalFamily::arithmetic, 3));
        CHECK(c.eval(0.25) == doctest::Approx(1.5).epsilon(1e-15));
        CHECK(c.eval(1.0) == 0.0);
        CHECK(c.eval(1.5) == 0.0);
        CHECK(std::isinf(c.eval(0.0)));
        CHECK(c.eval_signed(1.5) == doctest::Approx(-1.0).epsilon(1e-15));
    }
    SUBCASE("harmonic") {
        const cal::Calibrator c(make(CalFamily::harmonic, 2));
        const double T = cal::harmonic_threshold(2);
        CHECK(c.eval(0.5) == doctest::Approx(2.0 / T - 1.0 / T).epsilon(1e-14));
        CHECK(c.eval(0.0) == 2.0);  // capped at K
        CHECK(c.eval(1.0) == 0.0);
        CHECK(c.eval(2.0) == 0.0);
    }
    SUBCASE("geometric") {
        const cal::Calibrator c(make(CalFamily::geometric, 5));
        CHECK(c.eval(std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(c.eval(1.0) == 0.0);
        CHECK(c.eval(1.2) == 0.0);
        CHECK(std::isinf(c.eval(0.0)));
        CHECK(c.eval_signed(std::exp(1.0)) ==
              doctest::Approx(-1.0).epsilon(1e-14));
    }
    SUBCASE("generalized mean, r = 1 equals the arithmetic shape") {
        const cal::Calibrator c(make(CalFamily::generalized_mean, 5, 1, 1.0));
        CHECK(c.eval(0.25) == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(c.eval(0.0) == 2.0);  // (r+1)/r below the cap K
        CHECK(c.eval(1.0) == 0.0);
    }
}

TEST_CASE("every family is nonincreasing and zero past one") {
    std::vector<CalibratorSpec> specs;
    for (int K : {2, 7}) {
        specs.push_back(make(CalFamily::ruger_indicator, K, (K + 1) / 2));
        specs.push_back(make(CalFamily::grid_harmonic, K));
        specs.push_back(
            make(CalFamily::generalized_grid, K, 1, 1.0, kQuartiles));
        specs.push_back(make(CalFamily::arithmetic, K));
        specs.push_back(make(CalFamily::harmonic, K));
        specs.push_back(make(CalFamily::geometric, K));
        for (double r : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0})
            specs.push_back(make(CalFamily::generalized_mean, K, 1, r));
    }
    for (const auto& s : specs) {
        const cal::Calibrator c(s);
        double prev = c.eval(1e-9);
        for (int i = 1; i <= 400; ++i) {
            const double p = i / 400.0;
            const double v = c.eval(p);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
        CHECK(c.eval(1.0 + 1e-9) == 0.0);
        CHECK(c.eval(7.3) == 0.0);
    }
}

TEST_CASE("closed integrals match quadrature") {
    for (int K = 2; K <= 50; ++K) {
        std::vector<CalibratorSpec> specs{
            make(CalFamily::ruger_indicator, K, 1),
            make(CalFamily::ruger_indicator, K, (K + 1) / 2),
            make(CalFamily::grid_harmonic, K),
            make(CalFamily::generalized_grid, K, 1, 1.0, kQuartiles),
            make(CalFamily::arithmetic, K),
            make(CalFamily::harmonic, K),
            make(CalFamily::geometric, K),
        };
        for (const auto& s : specs)
            CHECK(cal::integral(s) ==
                  doctest::Approx(cal::integral_quadrature(s)).epsilon(1e-8));
    }
    // the harmonic closed form log(K T + 1)/T at K = 2
    CHECK(cal::integral(make(CalFamily::harmonic, 2)) ==
          doctest::Approx(0.97662354342318681).epsilon(1e-14));
    // positive r without the cap binding: the threshold normalizes exactly
    for (double r : {1.0, 2.0, 3.0})
        for (int K : {2, 5, 20})
            CHECK(cal::integral_quadrature(
                      make(CalFamily::generalized_mean, K, 1, r)) ==
                  doctest::Approx(1.0).epsilon(1e-8));
    // r = 0.5, K = 2: the cap K binds near zero, so the mass drops below one
    CHECK(cal::integral_quadrature(
              make(CalFamily::generalized_mean, 2, 1, 0.5)) < 1.0);
}

TEST_CASE("grid validation report") {
    SUBCASE("healthy specs pass") {
        CHECK(cal::validate(make(CalFamily::harmonic, 10), 1000).pass);
        CHECK(cal::validate(make(CalFamily::geometric, 10), 1000).pass);
        CHECK(cal::validate(make(CalFamily::grid_harmonic, 10), 1000).pass);
        CHECK(cal::validate(make(CalFamily::generalized_mean, 10, 1, -2.0),
                            1000)
                  .pass);
    }
    SUBCASE("a corrupted harmonic threshold fails the integral check") {
        auto s = make(CalFamily::harmonic, 10);
        s.threshold_override = 0.1;  // integral = log(0.1 K + 1)/0.1 = 6.93
        const auto rep = cal::validate(s, 1000);
        CHECK_FALSE(rep.pass);
        CHECK(!rep.message.empty());
    }
}

TEST_CASE("spec validation rejects malformed parameters") {
    CHECK_THROWS_AS((cal::Calibrator(make(CalFamily::ruger_indicator, 4, 0))),
                    std::invalid_argument);
    CHECK_THROWS_AS((cal::Calibrator(make(CalFamily::ruger_indicator, 4, 5))),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        (cal::Calibrator(make(CalFamily::generalized_mean, 4, 1, 0.0))),
        std::invalid_argument);
    CHECK_THROWS_AS((cal::Calibrator(make(CalFamily::grid_harmonic, 0))),
                    std::invalid_argument);
    // lambda must start at zero and increase
    CHECK_THROWS_AS((cal::Calibrator(make(CalFamily::generalized_grid, 4, 1,
                                          1.0, {0.25, 0.5, 1.0}))),
                    std::invalid_argument);
    CHECK_THROWS_AS((cal::Calibrator(make(CalFamily::generalized_grid, 4, 1,
                                          1.0, {0.0, 0.5, 0.5, 1.0}))),
                    std::invalid_argument);
}
