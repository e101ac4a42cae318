#pragma once
// Closed-form merging rules valid under arbitrary dependence. Outputs are
// capped at 1; a single p-value is returned unchanged by every rule. Rules
// marked "exact"/solver-backed are evaluated through the solver module.

#include <vector>

#include "pmerge/types.hpp"

namespace pmerge::batch {

// k = ceil(K/2): the "twice the median" preset.
int twice_median_k(int K);

// K * p_(1)
MergedP bonferroni(const PVec& p);

// (K/k) * p_(k)
MergedP ruger(const PVec& p, int k);

// exact = false: the classical form h_K * min_k (K/k) p_(k).
// exact = true: the dominating grid-harmonic rule, evaluated by the solver
// (bisection with B iterations, or exact jump enumeration).
MergedP hommel(const PVec& p, bool exact, int B = 50,
               Method solver_method = Method::bisection);

// Quantile-grid generalization: h_M * min_j (1/lambda_j) p_(ceil(lambda_j K))
// in the closed form; exact = true routes through the solver on the
// generalized grid calibrator.
MergedP generalized_hommel(const PVec& p, const std::vector<double>& lambda,
                           bool exact, int B = 50,
                           Method solver_method = Method::bisection);

// 2 * mean(p)
MergedP twice_average(const PVec& p);

// improved = false: (T_K + 1) H(p).
// improved = true: min_m (K T_K / m + 1) H(p_(m)).
MergedP harmonic(const PVec& p, bool improved);

// improved = false: e G(p).  improved = true: min_m e^(K/m) G(p_(m)).
MergedP geometric(const PVec& p, bool improved);

// a_{r,K} M_r(p) with a_{r,K} = (1 - T_{r,K}/r)^(-1/r); r = 1 reproduces
// twice_average and r = -1 reproduces harmonic(plain).
MergedP generalized_mean(const PVec& p, double r);

}  // namespace pmerge::batch
