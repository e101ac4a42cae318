#include "pmerge/merge_randomized.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "closed_forms.hpp"
#include "pmerge/rng.hpp"
#include "pmerge/solver.hpp"

namespace pmerge::rand {

namespace {

using detail::cap01;
using detail::has_zero;
using detail::sorted_asc;

struct Resolved {
    double u = 1.0;
    PVec body;
};

// Turns a RandSource into the uniform value plus the vector the rule merges
// over. first_pvalue consumes p_1 as the randomizer, so the rule sees the
// remaining K-1 values and sizes its constants accordingly.
Resolved resolve(const PVec& p, const RandSource& src, bool positive_u,
                 const char* rule) {
    if (p.empty())
        throw std::invalid_argument(std::string(rule) + ": empty p-vector");
    Resolved r;
    switch (src.kind) {
        case RandSource::Kind::explicit_u:
            r.u = src.u;
            r.body = p;
            break;
        case RandSource::Kind::seeded: {
            rng::Stream s(src.seed, 0, 1);
            r.u = s.uniform();
            r.body = p;
            break;
        }
        case RandSource::Kind::first_pvalue: {
            if (!src.acknowledged_independent_first)
                throw std::invalid_argument(
                    std::string(rule) +
                    ": first_pvalue randomization requires acknowledging "
                    "that p_1 is independent of the rest");
            if (p.size() < 2)
                throw std::invalid_argument(
                    std::string(rule) +
                    ": first_pvalue randomization needs at least 2 p-values");
            r.u = p[0];
            r.body = PVec::from_unchecked(std::vector<double>(
                p.values().begin() + 1, p.values().end()));
            break;
        }
    }
    if (!(r.u >= 0.0 && r.u <= 1.0))
        throw std::invalid_argument(std::string(rule) +
                                    ": u must lie in [0, 1]");
    if (positive_u && r.u == 0.0)
        throw std::invalid_argument(std::string(rule) +
                                    ": u must be positive for this rule");
    return r;
}

RuleSpec make_spec(Family f, Variant v) {
    RuleSpec s;
    s.family = f;
    s.mode = Mode::randomized;
    s.variant = v;
    return s;
}

MergedP closed(double value, RuleSpec spec, double u) {
    MergedP out;
    out.value = value;
    out.rule = std::move(spec);
    out.method = Method::closed_form;
    out.realized_u = u;
    return out;
}

Variant resolve_st(Variant v, bool allow_wang, const char* rule) {
    switch (v) {
        case Variant::preset:
        case Variant::tight:
            return Variant::tight;
        case Variant::simple:
            return Variant::simple;
        case Variant::wang:
            if (allow_wang) return Variant::wang;
            break;
        default:
            break;
    }
    throw std::invalid_argument(std::string(rule) +
                                ": unsupported variant for this rule");
}

}  // namespace

MergedP ur_ruger(const PVec& p, int k, const RandSource& src) {
    const Resolved rv = resolve(p, src, true, "ur_ruger");
    const int K = static_cast<int>(rv.body.size());
    if (k == 0) k = (K + 1) / 2;
    if (k < 1 || k > K)
        throw std::invalid_argument("ur_ruger: k must lie in 1..K");
    RuleSpec spec = make_spec(Family::ruger, Variant::preset);
    spec.k = k;
    if (has_zero(rv.body)) return closed(0.0, std::move(spec), rv.u);
    int idx = static_cast<int>(std::ceil(rv.u * static_cast<double>(k)));
    idx = std::clamp(idx, 1, k);
    const auto s = sorted_asc(rv.body);
    const double scale = static_cast<double>(K) / k;
    return closed(cap01(s[idx - 1] * scale), std::move(spec), rv.u);
}

MergedP ua(const PVec& p, const RandSource& src, Variant variant) {
    const Variant v = resolve_st(variant, true, "ua");
    const Resolved rv = resolve(p, src, false, "ua");
    const auto spec = make_spec(Family::average, v);
    switch (v) {
        case Variant::simple:
            return closed(detail::ua_simple_value(rv.body, rv.u), spec, rv.u);
        case Variant::tight:
            return closed(detail::ua_tight_value(rv.body, rv.u), spec, rv.u);
        default: {  // wang
            long double s = 0.0L;
            for (double x : rv.body) s += x;
            const long double A = s / static_cast<long double>(rv.body.size());
            const double denom = 2.0 - 2.0 * rv.u;
            if (denom <= 0.0)
                return closed(A > 0.0L ? 1.0 : 0.0, spec, rv.u);
            return closed(cap01(A / denom), spec, rv.u);
        }
    }
}

MergedP uh(const PVec& p, const RandSource& src, Variant variant) {
    const Variant v = resolve_st(variant, false, "uh");
    const Resolved rv = resolve(p, src, false, "uh");
    const int K = static_cast<int>(rv.body.size());
    if (K < 2)
        throw std::invalid_argument("uh: needs at least 2 p-values to merge");
    const double T = cal::harmonic_threshold(K);
    const double val = v == Variant::tight
                           ? detail::uh_tight_value(rv.body, rv.u, T)
                           : detail::uh_simple_value(rv.body, rv.u, T);
    return closed(val, make_spec(Family::harmonic, v), rv.u);
}

MergedP ug(const PVec& p, const RandSource& src, Variant variant) {
    const Variant v = resolve_st(variant, false, "ug");
    const Resolved rv = resolve(p, src, false, "ug");
    const double val = v == Variant::tight
                           ? detail::ug_tight_value(rv.body, rv.u)
                           : detail::ug_simple_value(rv.body, rv.u);
    return closed(val, make_spec(Family::geometric, v), rv.u);
}

MergedP u_hommel(const PVec& p, const RandSource& src, int B,
                 Method solver_method) {
    const Resolved rv = resolve(p, src, true, "u_hommel");
    const int K = static_cast<int>(rv.body.size());
    if (K < 2)
        throw std::invalid_argument(
            "u_hommel: needs at least 2 p-values to merge");
    solver::DualCondition cond;
    cond.cal.family = cal::CalFamily::grid_harmonic;
    cond.cal.K = K;
    cond.mode = solver::SolverMode::batch_threshold;
    cond.u = rv.u;
    MergedP out = solver_method == Method::breakpoint_exact
                      ? solver::breakpoint_exact(cond, rv.body)
                      : solver::bisect(cond, rv.body, B);
    out.rule = make_spec(Family::hommel, Variant::preset);
    out.realized_u = rv.u;
    return out;
}

MergedP u_generalized_mean(const PVec& p, double r, const RandSource& src,
                           Variant variant, int B) {
    if (r == 0.0)
        throw std::invalid_argument(
            "u_generalized_mean: r must be nonzero (use the geometric rule)");
    const Variant v = resolve_st(variant, false, "u_generalized_mean");
    const Resolved rv = resolve(p, src, false, "u_generalized_mean");
    const int K = static_cast<int>(rv.body.size());
    if (r < 0.0 && K < 2)
        throw std::invalid_argument("u_generalized_mean: r < 0 needs K >= 2");
    RuleSpec spec = make_spec(Family::generalized_mean, v);
    spec.r = r;
    if (v == Variant::simple) {
        const double T = cal::generalized_mean_threshold(r, K);
        return closed(detail::genmean_simple_value(rv.body, r, rv.u, T),
                      std::move(spec), rv.u);
    }
    solver::DualCondition cond;
    cond.cal.family = cal::CalFamily::generalized_mean;
    cond.cal.K = std::max(K, 2);
    cond.cal.r = r;
    cond.mode = solver::SolverMode::batch_threshold;
    cond.u = rv.u;
    MergedP out = solver::bisect(cond, rv.body, B);
    out.rule = std::move(spec);
    out.realized_u = rv.u;
    return out;
}

MergedP randomized_ex(const cal::CalibratorSpec& cs, const PVec& p,
                      const RandSource& src, int B) {
    const Resolved rv = resolve(p, src, true, "randomized_ex");
    solver::DualCondition cond;
    cond.cal = cs;
    cond.mode = solver::SolverMode::ex_or_rand;
    cond.u = rv.u;
    MergedP out = solver::bisect(cond, rv.body, B);
    RuleSpec spec;
    spec.mode = Mode::exchangeable_randomized;
    spec.k = cs.k;
    spec.r = cs.r;
    spec.lambda = cs.lambda;
    spec.fixed_K = cs.K;
    switch (cs.family) {
        case cal::CalFamily::ruger_indicator: spec.family = Family::ruger; break;
        case cal::CalFamily::grid_harmonic: spec.family = Family::hommel; break;
        case cal::CalFamily::generalized_grid:
            spec.family = Family::generalized_hommel;
            break;
        case cal::CalFamily::arithmetic: spec.family = Family::average; break;
        case cal::CalFamily::harmonic: spec.family = Family::harmonic; break;
        case cal::CalFamily::geometric: spec.family = Family::geometric; break;
        case cal::CalFamily::generalized_mean:
            spec.family = Family::generalized_mean;
            break;
    }
    out.rule = std::move(spec);
    out.realized_u = rv.u;
    return out;
}

}  // namespace pmerge::rand
