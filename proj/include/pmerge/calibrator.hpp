#pragma once
// Calibrator families f: [0, inf) -> [0, inf]. A calibrator is decreasing,
// zero on (1, inf), and integrates to at most 1 on [0, 1]; it maps p-values
// to e-values, and every merging rule in this library arises from one via
// the dual construction evaluated by the solver module.

#include <optional>
#include <string>
#include <vector>

namespace pmerge::cal {

enum class CalFamily {
    ruger_indicator,   // (K/k) 1{p in (0, k/K]}, infinity at 0
    grid_harmonic,     // K 1{h_K p <= 1} / ceil(K h_K p), value K at 0
    generalized_grid,  // sum_j (1/lambda_j) 1{p in (lambda_{j-1}/h_M, lambda_j/h_M]}, infinity at 0
    arithmetic,        // (2 - 2p)_+, infinity at 0
    harmonic,          // min{1/(T_K p) - 1/T_K, K}
    geometric,         // (-log p)_+, infinity at 0
    generalized_mean,  // min{r (1 - p^r) / T_{r,K}, K}
};

struct CalibratorSpec {
    CalFamily family = CalFamily::arithmetic;
    int K = 2;                   // number of p-values the calibrator is tuned to
    int k = 1;                   // ruger_indicator order
    double r = 1.0;              // generalized_mean exponent, r != 0
    std::vector<double> lambda;  // generalized_grid: 0 = l_0 < l_1 < ... <= 1
    // Harmonic / generalized_mean threshold override; used by validation
    // tests to probe deliberately broken constants.
    std::optional<double> threshold_override;
};

// Throws std::invalid_argument if the spec violates a family invariant.
void validate_spec(const CalibratorSpec& spec);

// K-th harmonic number h_K = sum_{j=1}^K 1/j.
double harmonic_number(int K);

// h_M = sum_j (lambda_j - lambda_{j-1}) / lambda_j for a quantile grid.
double grid_constant(const std::vector<double>& lambda);

// T_K = ln K + ln ln K + 1. Asserts the validity condition
// K T_K + 1 <= exp(T_K), which makes min{1/(T_K p) - 1/T_K, K} a calibrator.
double harmonic_threshold(int K);

// Generalized-mean threshold T_{r,K}: r^2/(r+1) for r > 0, T_K for r = -1,
// and for other r < 0 the root of integral = 1 (bisection on T with
// quadrature, relative tolerance 1e-9).
double generalized_mean_threshold(double r, int K);

// Scaling constant a_{r,K} = (1 - T_{r,K}/r)^{-1/r}.
double generalized_mean_scale(double r, int K);

// Evaluation engine with the family constants resolved once.
class Calibrator {
public:
    explicit Calibrator(const CalibratorSpec& spec);

    // The calibrator itself: capped at K where the family says so, clipped
    // to zero outside the support, with the stated value at p = 0.
    double eval(double p) const;

    // The uncapped, unclipped expression behind the calibrator (may be
    // negative for p near 1 and exceeds the cap for small p). This is what
    // generates the "plain"/"simple" closed forms.
    double eval_signed(double p) const;

    const CalibratorSpec& spec() const { return spec_; }
    double threshold() const { return T_; }

private:
    CalibratorSpec spec_;
    double T_ = 0.0;       // harmonic / generalized_mean threshold
    double hK_ = 0.0;      // grid_harmonic constant
    double hM_ = 0.0;      // generalized_grid constant
    std::vector<double> edges_;  // generalized_grid: lambda_j / h_M
};

// Integral of the calibrator over [0, 1]: closed form for every family
// except generalized_mean, which uses adaptive quadrature.
double integral(const CalibratorSpec& spec);

// Quadrature route for any family: adaptive Simpson split at the points
// where the calibrator jumps or switches off its cap, abs tol 1e-10.
// The geometric family is integrated on [1e-12, 1]; the neglected mass is
// below 3e-11.
double integral_quadrature(const CalibratorSpec& spec);

struct ValidationReport {
    bool pass = true;
    std::string message;          // empty on pass, first violation otherwise
    double violation_point = -1;  // p where the first check failed
};

// Grid checks: f nonincreasing on [0, 1], f = 0 at sampled points > 1,
// integral <= 1 + 1e-9. Failures are reported, not thrown.
ValidationReport validate(const CalibratorSpec& spec, int grid_size);

}  // namespace pmerge::cal
