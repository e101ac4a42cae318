#pragma once
// Generic dual-form evaluation: a merging rule is inf{alpha in (0,1):
// condition(alpha)}, where the condition averages calibrated e-values
// f(p_i/alpha). Computed either by bisection on the monotone predicate
// (iteration error 2^-B) or, for the piecewise-constant indicator families,
// exactly by enumerating the jump points.

#include "pmerge/calibrator.hpp"
#include "pmerge/types.hpp"

namespace pmerge::solver {

enum class SolverMode {
    // exists a prefix l <= n with (1/l) sum_{i<=l} f(p_i/alpha) >= 1
    prefix_max,
    // (1/n) sum_i f(p_i/alpha) >= u
    batch_threshold,
    // f(p_1/alpha) >= u, or the prefix_max condition with threshold 1
    ex_or_rand,
};

struct DualCondition {
    cal::CalibratorSpec cal;
    SolverMode mode = SolverMode::batch_threshold;
    double u = 1.0;    // threshold for the randomized modes
    // true: evaluate the calibrator itself (clipped at zero, capped at K).
    // false: evaluate the signed, uncapped expression behind it; this is
    // what generates the plain/simple closed forms and serves as their
    // oracle.
    bool clip = true;
};

// The monotone predicate alpha -> condition(alpha); exposed so tests can
// probe the bracket invariant directly.
bool condition_holds(const DualCondition& cond, const PVec& p, double alpha);

// Bisection on [0, 1], B iterations, returns the upper endpoint; guarantee
// true_inf <= result <= true_inf + 2^-B. inf over the empty set is 1.
MergedP bisect(const DualCondition& cond, const PVec& p, int B = 50);

// Exact infimum for the indicator families (ruger_indicator, grid_harmonic,
// generalized_grid) by enumerating the finitely many alpha where a term
// jumps. Agrees with bisect within 2^-B.
MergedP breakpoint_exact(const DualCondition& cond, const PVec& p);

}  // namespace pmerge::solver
