#pragma once
// Special functions and numerical helpers: normal/Student-t/chi-square CDFs,
// adaptive quadrature, bisection on monotone predicates and functions.

#include <functional>

namespace pmerge::stats {

// Standard normal CDF via erfc; absolute error < 1e-15.
double norm_cdf(double x);

// Inverse standard normal CDF (Wichura's PPND16 rational approximation),
// absolute error < 1e-13 over (0, 1); the tails use the log expansion.
double norm_quantile(double p);

// Regularized incomplete beta I_x(a, b) via the continued fraction
// (modified Lentz), relative error ~1e-14.
double reg_inc_beta(double a, double b, double x);

// Lower regularized incomplete gamma P(a, x) via series / continued fraction.
double reg_inc_gamma_lower(double a, double x);

// Student-t CDF with nu degrees of freedom, via the incomplete beta.
double t_cdf(double t, double nu);

// Chi-square CDF with nu degrees of freedom.
double chi2_cdf(double x, double nu);

// Adaptive Simpson quadrature of f on [a, b] with absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 50);

// Bisection for the root of a continuous function g with g(lo), g(hi) of
// opposite sign. Stops after max_iter iterations or when the bracket
// shrinks below rel_tol relative to its midpoint.
double bisect_root(const std::function<double(double)>& g, double lo,
                   double hi, int max_iter, double rel_tol);

}  // namespace pmerge::stats
