#pragma once
// Uniformly-randomized merging rules: each consumes one uniform draw u and
// is valid on average over u under arbitrary dependence. u = 1 recovers the
// corresponding deterministic rule. The realized u is always recorded in
// the result so a randomized decision can be audited and replayed.

#include "pmerge/calibrator.hpp"
#include "pmerge/types.hpp"

namespace pmerge::rand {

// (K/k) * p_(ceil(u k)), zero if any input is zero; u must be positive.
MergedP ur_ruger(const PVec& p, int k, const RandSource& src);

// simple: 2 A(p) / (2 - u).
// tight: min_m 2 A(p_(m)) / (2 - K u / m)_+, zero if any input is zero.
// wang: A(p) / (2 - 2u), a comparison baseline that neither dominates nor
// is dominated by the other two.
MergedP ua(const PVec& p, const RandSource& src, Variant variant);

// simple: (T_K u + 1) H(p).  tight: min_m (u K T_K / m + 1) H(p_(m)).
MergedP uh(const PVec& p, const RandSource& src, Variant variant);

// simple: e^u G(p).  tight: min_m e^(u K / m) G(p_(m)).
MergedP ug(const PVec& p, const RandSource& src, Variant variant);

// Solver-evaluated: batch mode on the grid-harmonic calibrator with
// threshold u; u must be positive. u = 1 equals hommel(exact).
MergedP u_hommel(const PVec& p, const RandSource& src, int B = 50,
                 Method solver_method = Method::bisection);

// simple: M_r(p) / (1 - u T_{r,K} / r)^(1/r).
// tight: solver-evaluated (batch mode with threshold u on the
// generalized-mean calibrator).
MergedP u_generalized_mean(const PVec& p, double r, const RandSource& src,
                           Variant variant, int B = 50);

// Exchangeable + randomized rule for an arbitrary calibrator: bisection on
// the condition "f(p_1/alpha) >= u or some prefix average of f(p_i/alpha)
// reaches 1"; u must be positive. Requires inputs exchangeable under the
// null. Never worse than the pure exchangeable rule of the same calibrator.
MergedP randomized_ex(const cal::CalibratorSpec& cs, const PVec& p,
                      const RandSource& src, int B = 50);

}  // namespace pmerge::rand
