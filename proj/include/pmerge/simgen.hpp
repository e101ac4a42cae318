#pragma once
// Monte Carlo study of the merging rules: p-value generators with known
// dependence structure, a deterministic rejection-rate engine, and CSV/JSON
// report writers. Replications are driven by a counter-based generator, so
// results depend only on (spec, seed, replication) and are bit-identical
// across runs and worker counts.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmerge/types.hpp"

namespace pmerge::sim {

// Order of the emitted p-vector for designs that carry a side statistic
// (sample size, sum of squares) that is independent of the p-values under
// the null, so ordering by it preserves exchangeability.
enum class Ordering { as_given, by_stat_asc, by_stat_desc, random };

struct GeneratorSpec {
    enum class Kind {
        // X_k = rho Z + sqrt(1 - rho^2) Z_k - mu, P_k = Phi(X_k); rho = 0
        // gives iid p-values, rho = 1 identical copies.
        gauss_equicorr,
        // three p-values: iid with probability 0.9, one common draw with
        // probability 0.1; Beta(beta_a, 1) under the alternative.
        mixture_toy,
        // (P1, 1 - P1); P1 uniform under the null, Beta(beta_a, 1) under
        // the alternative.
        antithetic_pair,
        // K studies sharing a control sample: Xbar_i ~ N(sqrt(n_i) mu, 1),
        // T_k = (Xbar_k + Xbar_0)/sqrt(2), P_k = 2 Phi(-|T_k|); ordered by
        // the (fixed) sample sizes n_k.
        common_control,
        // K one-sample t-tests with n_per observations each, mean k * mu;
        // P_k = 2 G_{n-1}(-|T_k|), ordered by S_k^2 = sum of squares,
        // which is independent of T_k under the null.
        ttest_global,
    };

    Kind kind = Kind::gauss_equicorr;
    int K = 2;
    double rho = 0.0;
    double mu = 0.0;
    double beta_a = 0.2;
    bool under_alternative = false;
    std::vector<int> n;  // common_control per-study sample sizes
    int n0 = 25;         // common_control shared-control sample size
    int n_per = 10;      // ttest_global observations per study
    Ordering ordering = Ordering::as_given;

    std::string name() const;
    int size() const;  // length of the generated p-vector
    void validate() const;
};

GeneratorSpec gauss_equicorr(int K, double rho, double mu);
GeneratorSpec mixture_toy(bool under_alternative);
GeneratorSpec antithetic_pair(bool under_alternative);
// K = n.size() studies; defaults to n = 10, 20, ..., 100 with n0 = 25.
GeneratorSpec common_control(double mu, Ordering ordering,
                             std::vector<int> n = {}, int n0 = 25);
GeneratorSpec ttest_global(double mu, Ordering ordering, int K = 20,
                           int n_per = 10);

// Deterministic in (g, seed, replication).
PVec generate(const GeneratorSpec& g, std::uint64_t seed,
              std::uint64_t replication);

// Independence-only baselines, kept for comparison plots; rules::apply
// rejects them because they are invalid under arbitrary dependence.
double fisher_combination(const PVec& p);
double simes_combination(const PVec& p);

struct MCReport {
    RuleSpec rule;
    GeneratorSpec generator;
    double alpha = 0.05;
    std::int64_t reps = 0;
    std::int64_t rejections = 0;
    double rate = 0.0;
    double se = 0.0;  // sqrt(rate (1 - rate) / reps)
    std::uint64_t seed = 0;
};

// One pass over the replications evaluating every rule at every alpha; the
// generated vector is shared across rules within a replication, and each
// randomized rule consumes its own uniform from the replication's
// dedicated stream (in rule-list order). threads = 0 picks automatically;
// results do not depend on the worker count. Rows are rule-major, then
// alpha in the given order.
std::vector<MCReport> mc_grid(const std::vector<RuleSpec>& rules,
                              const GeneratorSpec& g,
                              const std::vector<double>& alphas,
                              std::int64_t reps, std::uint64_t seed,
                              int threads = 0);

MCReport mc_rejection(const RuleSpec& rule, const GeneratorSpec& g,
                      double alpha, std::int64_t reps, std::uint64_t seed);

// mc_grid per grid value with g.mu overridden; rows are mu-major.
std::vector<MCReport> power_curve(const std::vector<RuleSpec>& rules,
                                  GeneratorSpec g,
                                  const std::vector<double>& mu_grid,
                                  double alpha, std::int64_t reps,
                                  std::uint64_t seed, int threads = 0);

// Header: mu,rho,rule,variant,alpha,reps,rate,se,seed. Real numbers are
// written with 17 significant digits so reports replay bit-exactly.
void write_csv(std::ostream& os, const std::vector<MCReport>& rows);
void write_json(std::ostream& os, const std::vector<MCReport>& rows);

}  // namespace pmerge::sim
