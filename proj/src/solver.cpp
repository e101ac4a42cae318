#include "pmerge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pmerge::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluates the predicate for one (condition, p) pair. Per-element
// transforms are precomputed so repeated evaluations during bisection stay
// cheap.
class Predicate {
public:
    Predicate(const DualCondition& cond, const PVec& p)
        : cond_(cond), cal_(cond.cal), p_(p.values()) {
        using cal::CalFamily;
        // The indicator families produce rational terms like K/3 whose sum
        // can equal the threshold exactly over a whole alpha-interval; the
        // rounded terms then sit a few ulps below it and the predicate
        // would fail everywhere on that interval. A slack of a few ulps of
        // the largest term restores those exact-equality crossings. Smooth
        // families cross the threshold at a single point, so they stay
        // exact and the closed-form agreement is not loosened.
        double max_term = 0.0;
        switch (cond_.cal.family) {
            case CalFamily::ruger_indicator:
                max_term = static_cast<double>(cond_.cal.K) / cond_.cal.k;
                break;
            case CalFamily::grid_harmonic:
                max_term = static_cast<double>(cond_.cal.K);
                break;
            case CalFamily::generalized_grid:
                max_term = 1.0 / cond_.cal.lambda[1];
                break;
            default:
                break;
        }
        slack_ = 2.0L * std::numeric_limits<double>::epsilon() *
                 static_cast<long double>(p_.size()) * max_term;
        if (cond_.mode != SolverMode::prefix_max)
            slack_ = std::min(slack_, 0.25L * cond_.u);
        switch (cond_.cal.family) {
            case CalFamily::grid_harmonic: {
                const double h = cal::harmonic_number(cond_.cal.K);
                tr_.reserve(p_.size());
                for (double v : p_) tr_.push_back(h * v);
                break;
            }
            case CalFamily::geometric:
                tr_.reserve(p_.size());
                for (double v : p_) tr_.push_back(std::log(v));
                break;
            case CalFamily::generalized_mean:
                tr_.reserve(p_.size());
                for (double v : p_) tr_.push_back(std::pow(v, cond_.cal.r));
                break;
            default:
                break;
        }
    }

    bool holds(double alpha) const {
        using cal::CalFamily;
        const double K = static_cast<double>(cond_.cal.K);
        switch (cond_.cal.family) {
            case CalFamily::ruger_indicator: {
                const double coef = K / cond_.cal.k;
                const double edge = alpha * cond_.cal.k / K;
                return check([&](std::size_t i) {
                    if (p_[i] == 0.0) return kInf;
                    return p_[i] <= edge ? coef : 0.0;
                });
            }
            case CalFamily::grid_harmonic:
                return check([&](std::size_t i) {
                    if (p_[i] == 0.0) return K;
                    if (tr_[i] > alpha) return 0.0;
                    return K / std::ceil(K * tr_[i] / alpha);
                });
            case CalFamily::generalized_grid:
                return check([&](std::size_t i) {
                    return cal_.eval(p_[i] / alpha);
                });
            case CalFamily::arithmetic:
                if (cond_.clip)
                    return check([&](std::size_t i) {
                        if (p_[i] == 0.0) return kInf;
                        return std::max(0.0, 2.0 - 2.0 * p_[i] / alpha);
                    });
                return check([&](std::size_t i) {
                    return 2.0 - 2.0 * p_[i] / alpha;
                });
            case CalFamily::harmonic: {
                const double T = cal_.threshold();
                if (cond_.clip)
                    return check([&](std::size_t i) {
                        if (p_[i] == 0.0) return K;
                        const double s = alpha / (T * p_[i]) - 1.0 / T;
                        return std::max(0.0, std::min(s, K));
                    });
                return check([&](std::size_t i) {
                    if (p_[i] == 0.0) return kInf;
                    return alpha / (T * p_[i]) - 1.0 / T;
                });
            }
            case CalFamily::geometric: {
                const double la = std::log(alpha);
                if (cond_.clip)
                    return check([&](std::size_t i) {
                        return std::max(0.0, la - tr_[i]);
                    });
                return check([&](std::size_t i) { return la - tr_[i]; });
            }
            case CalFamily::generalized_mean: {
                const double r = cond_.cal.r;
                const double T = cal_.threshold();
                const double a = std::pow(alpha, r);
                if (cond_.clip)
                    return check([&](std::size_t i) {
                        const double s = r * (1.0 - tr_[i] / a) / T;
                        return std::max(0.0, std::min(s, K));
                    });
                return check([&](std::size_t i) {
                    return r * (1.0 - tr_[i] / a) / T;
                });
            }
        }
        return false;
    }

private:
    template <typename TermFn>
    bool check(TermFn term) const {
        const std::size_t n = p_.size();
        switch (cond_.mode) {
            case SolverMode::batch_threshold: {
                long double s = 0.0L;
                for (std::size_t i = 0; i < n; ++i) s += term(i);
                return s >= static_cast<long double>(cond_.u) * n - slack_;
            }
            case SolverMode::prefix_max: {
                long double s = 0.0L;
                for (std::size_t i = 0; i < n; ++i) {
                    s += term(i);
                    if (s >= static_cast<long double>(i) + 1.0L - slack_)
                        return true;
                }
                return false;
            }
            case SolverMode::ex_or_rand: {
                if (term(0) >= cond_.u - static_cast<double>(slack_))
                    return true;
                long double s = 0.0L;
                for (std::size_t i = 0; i < n; ++i) {
                    s += term(i);
                    if (s >= static_cast<long double>(i) + 1.0L - slack_)
                        return true;
                }
                return false;
            }
        }
        return false;
    }

    const DualCondition& cond_;
    cal::Calibrator cal_;
    const std::vector<double>& p_;
    std::vector<double> tr_;
    long double slack_ = 0.0L;
};

void check_inputs(const DualCondition& cond, const PVec& p) {
    cal::validate_spec(cond.cal);
    if (p.empty()) throw std::invalid_argument("solver: empty p-vector");
    if (cond.mode != SolverMode::prefix_max &&
        !(cond.u > 0.0 && cond.u <= 1.0))
        throw std::invalid_argument("solver: threshold u must lie in (0, 1]");
}

}  // namespace

bool condition_holds(const DualCondition& cond, const PVec& p, double alpha) {
    check_inputs(cond, p);
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("solver: alpha must lie in (0, 1]");
    return Predicate(cond, p).holds(alpha);
}

MergedP bisect(const DualCondition& cond, const PVec& p, int B) {
    check_inputs(cond, p);
    if (B < 1) throw std::invalid_argument("solver: iteration count must be >= 1");
    const Predicate pred(cond, p);
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < B; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pred.holds(mid))
            hi = mid;
        else
            lo = mid;
    }
    MergedP out;
    out.value = hi;
    out.method = Method::bisection;
    out.error_bound = std::ldexp(1.0, -B);
    return out;
}

MergedP breakpoint_exact(const DualCondition& cond, const PVec& p) {
    check_inputs(cond, p);
    using cal::CalFamily;
    const auto family = cond.cal.family;
    if (family != CalFamily::ruger_indicator &&
        family != CalFamily::grid_harmonic &&
        family != CalFamily::generalized_grid)
        throw std::invalid_argument(
            "breakpoint_exact: supported only for the indicator families");

    MergedP out;
    out.method = Method::breakpoint_exact;
    out.error_bound = 0.0;

    // any exact zero forces the condition at every alpha
    for (double v : p)
        if (v == 0.0) {
            out.value = 0.0;
            return out;
        }

    std::vector<double> candidates;
    switch (family) {
        case CalFamily::ruger_indicator: {
            const double scale = static_cast<double>(cond.cal.K) / cond.cal.k;
            for (double v : p) candidates.push_back(v * scale);
            break;
        }
        case CalFamily::grid_harmonic: {
            const double h = cal::harmonic_number(cond.cal.K);
            for (double v : p)
                for (int j = 1; j <= cond.cal.K; ++j)
                    candidates.push_back(cond.cal.K * h * v / j);
            break;
        }
        case CalFamily::generalized_grid: {
            const double h = cal::grid_constant(cond.cal.lambda);
            for (double v : p)
                for (std::size_t j = 1; j < cond.cal.lambda.size(); ++j)
                    candidates.push_back(v * h / cond.cal.lambda[j]);
            break;
        }
        default:
            break;
    }

    std::sort(candidates.begin(), candidates.end());
    const Predicate pred(cond, p);
    const double nudge = 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
    for (double c : candidates) {
        if (c <= 0.0 || c > 1.0) continue;
        // the predicate is constant between jumps; probing just above the
        // candidate sidesteps rounding on the jump itself
        if (pred.holds(std::min(1.0, c * nudge))) {
            out.value = c;
            return out;
        }
    }
    out.value = 1.0;
    return out;
}

}  // namespace pmerge::solver
