#include "pmerge/merge_batch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "closed_forms.hpp"
#include "pmerge/calibrator.hpp"
#include "pmerge/solver.hpp"

namespace pmerge::batch {

namespace {

using detail::cap01;
using detail::sorted_asc;

RuleSpec make_spec(Family f, Variant v) {
    RuleSpec s;
    s.family = f;
    s.mode = Mode::batch;
    s.variant = v;
    return s;
}

MergedP closed(double value, RuleSpec spec) {
    MergedP out;
    out.value = value;
    out.rule = std::move(spec);
    out.method = Method::closed_form;
    return out;
}

void require_nonempty(const PVec& p) {
    if (p.empty()) throw std::invalid_argument("merge: empty p-vector");
}

bool single(const PVec& p) { return p.size() == 1; }

MergedP run_solver(const solver::DualCondition& cond, const PVec& p, int B,
                   Method solver_method, RuleSpec spec) {
    MergedP out = solver_method == Method::breakpoint_exact
                      ? solver::breakpoint_exact(cond, p)
                      : solver::bisect(cond, p, B);
    out.rule = std::move(spec);
    return out;
}

}  // namespace

int twice_median_k(int K) { return (K + 1) / 2; }

MergedP bonferroni(const PVec& p) {
    require_nonempty(p);
    const auto spec = make_spec(Family::bonferroni, Variant::preset);
    if (single(p)) return closed(p[0], spec);
    const double m = *std::min_element(p.begin(), p.end());
    return closed(cap01(m * static_cast<double>(p.size())), spec);
}

MergedP ruger(const PVec& p, int k) {
    require_nonempty(p);
    const int K = static_cast<int>(p.size());
    if (k == 0) k = twice_median_k(K);
    if (k < 1 || k > K)
        throw std::invalid_argument("ruger: k must lie in 1..K");
    RuleSpec spec = make_spec(Family::ruger, Variant::preset);
    spec.k = k;
    if (single(p)) return closed(p[0], spec);
    const auto s = sorted_asc(p);
    const double scale = static_cast<double>(K) / k;
    return closed(cap01(s[k - 1] * scale), spec);
}

MergedP hommel(const PVec& p, bool exact, int B, Method solver_method) {
    require_nonempty(p);
    const auto spec = make_spec(Family::hommel,
                                exact ? Variant::exact : Variant::classical);
    if (single(p)) return closed(p[0], spec);
    const int K = static_cast<int>(p.size());
    if (!exact) {
        const auto s = sorted_asc(p);
        long double best = s[0] * static_cast<double>(K);
        for (int k = 2; k <= K; ++k) {
            const long double t = s[k - 1] * (static_cast<double>(K) / k);
            best = std::min(best, t);
        }
        return closed(cap01(cal::harmonic_number(K) * best), spec);
    }
    solver::DualCondition cond;
    cond.cal.family = cal::CalFamily::grid_harmonic;
    cond.cal.K = K;
    cond.mode = solver::SolverMode::batch_threshold;
    cond.u = 1.0;
    return run_solver(cond, p, B, solver_method, spec);
}

MergedP generalized_hommel(const PVec& p, const std::vector<double>& lambda,
                           bool exact, int B, Method solver_method) {
    require_nonempty(p);
    cal::CalibratorSpec cs;
    cs.family = cal::CalFamily::generalized_grid;
    cs.K = std::max<int>(2, static_cast<int>(p.size()));
    cs.lambda = lambda;
    cal::validate_spec(cs);

    RuleSpec spec = make_spec(Family::generalized_hommel,
                              exact ? Variant::exact : Variant::classical);
    spec.lambda = lambda;
    if (single(p)) return closed(p[0], spec);

    if (!exact) {
        const int K = static_cast<int>(p.size());
        const auto s = sorted_asc(p);
        long double best = -1.0L;
        for (std::size_t j = 1; j < lambda.size(); ++j) {
            const int idx =
                static_cast<int>(std::ceil(lambda[j] * static_cast<double>(K)));
            if (idx < 1 || idx > K) continue;
            const long double t = s[idx - 1] / lambda[j];
            if (best < 0.0L || t < best) best = t;
        }
        if (best < 0.0L) return closed(1.0, spec);
        return closed(cap01(cal::grid_constant(lambda) * best), spec);
    }
    solver::DualCondition cond;
    cond.cal = cs;
    cond.mode = solver::SolverMode::batch_threshold;
    cond.u = 1.0;
    return run_solver(cond, p, B, solver_method, spec);
}

MergedP twice_average(const PVec& p) {
    require_nonempty(p);
    const auto spec = make_spec(Family::average, Variant::preset);
    if (single(p)) return closed(p[0], spec);
    return closed(detail::ua_simple_value(p, 1.0), spec);
}

MergedP harmonic(const PVec& p, bool improved) {
    require_nonempty(p);
    const auto spec = make_spec(Family::harmonic,
                                improved ? Variant::improved : Variant::plain);
    if (single(p)) return closed(p[0], spec);
    const double T = cal::harmonic_threshold(static_cast<int>(p.size()));
    const double v = improved ? detail::uh_tight_value(p, 1.0, T)
                              : detail::uh_simple_value(p, 1.0, T);
    return closed(v, spec);
}

MergedP geometric(const PVec& p, bool improved) {
    require_nonempty(p);
    const auto spec = make_spec(Family::geometric,
                                improved ? Variant::improved : Variant::plain);
    if (single(p)) return closed(p[0], spec);
    const double v = improved ? detail::ug_tight_value(p, 1.0)
                              : detail::ug_simple_value(p, 1.0);
    return closed(v, spec);
}

MergedP generalized_mean(const PVec& p, double r) {
    require_nonempty(p);
    if (r == 0.0)
        throw std::invalid_argument(
            "generalized_mean: r must be nonzero (use the geometric rule)");
    RuleSpec spec = make_spec(Family::generalized_mean, Variant::preset);
    spec.r = r;
    if (single(p)) return closed(p[0], spec);
    const double T =
        cal::generalized_mean_threshold(r, static_cast<int>(p.size()));
    return closed(detail::genmean_simple_value(p, r, 1.0, T), spec);
}

}  // namespace pmerge::batch
