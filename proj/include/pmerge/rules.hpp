#pragma once
// Uniform dispatch from a RuleSpec to the merging implementations, plus the
// canonical rule names used by reports and the command-line tool.

#include <string>
#include <vector>

#include "pmerge/types.hpp"

namespace pmerge::rules {

struct ApplyOptions {
    Method method = Method::bisection;  // route for solver-backed rules
    int iters = 50;                     // bisection iteration count
};

// Applies the rule to p. Randomized modes require src and record the
// realized uniform in the result; deterministic modes ignore src. Throws
// std::invalid_argument on parameter errors and for the independence-only
// baselines (fisher, simes), which only the simulation module evaluates.
MergedP apply(const RuleSpec& spec, const PVec& p,
              const RandSource* src = nullptr, const ApplyOptions& opts = {});

// "ruger", "ex_average", "u_hommel", "u_ex_average", ...
std::string base_name(const RuleSpec& spec);

// Resolved variant label ("tight", "classical", ...); "-" when the rule
// has a single form.
std::string variant_name(const RuleSpec& spec);

std::string family_token(Family f);
Family parse_family(const std::string& s);
Variant parse_variant(const std::string& s);

// Every dependence-valid rule configuration exercised by the validation
// suites, with representative k/r/lambda choices and fixed_K left open.
std::vector<RuleSpec> catalog();

}  // namespace pmerge::rules
