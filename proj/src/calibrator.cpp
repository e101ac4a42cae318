#include "pmerge/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "pmerge/stats.hpp"

namespace pmerge::cal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mutex cache_mutex;
std::map<int, double> hK_cache;
std::map<std::pair<double, int>, double> T_cache;

}  // namespace

void validate_spec(const CalibratorSpec& spec) {
    if (spec.K < 2) throw std::invalid_argument("calibrator: K must be >= 2");
    switch (spec.family) {
        case CalFamily::ruger_indicator:
            if (spec.k < 1 || spec.k > spec.K)
                throw std::invalid_argument("calibrator: k must lie in 1..K");
            break;
        case CalFamily::generalized_grid: {
            const auto& l = spec.lambda;
            if (l.size() < 2 || l.front() != 0.0)
                throw std::invalid_argument(
                    "calibrator: lambda grid must start at 0 with at least one step");
            for (std::size_t j = 1; j < l.size(); ++j)
                if (!(l[j] > l[j - 1]))
                    throw std::invalid_argument(
                        "calibrator: lambda grid must be strictly increasing");
            if (l.back() > 1.0)
                throw std::invalid_argument("calibrator: lambda grid must end at or below 1");
            break;
        }
        case CalFamily::generalized_mean:
            if (spec.r == 0.0)
                throw std::invalid_argument(
                    "calibrator: r must be nonzero (the geometric family is the r -> 0 limit)");
            break;
        default:
            break;
    }
}

double harmonic_number(int K) {
    if (K < 1) throw std::invalid_argument("harmonic_number: K must be >= 1");
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = hK_cache.find(K);
        if (it != hK_cache.end()) return it->second;
    }
    long double s = 0.0L;
    for (int j = K; j >= 1; --j) s += 1.0L / j;
    const double h = static_cast<double>(s);
    std::lock_guard<std::mutex> lock(cache_mutex);
    hK_cache.emplace(K, h);
    return h;
}

double grid_constant(const std::vector<double>& lambda) {
    long double s = 0.0L;
    for (std::size_t j = 1; j < lambda.size(); ++j)
        s += (static_cast<long double>(lambda[j]) - lambda[j - 1]) / lambda[j];
    return static_cast<double>(s);
}

double harmonic_threshold(int K) {
    if (K < 2) throw std::invalid_argument("harmonic_threshold: K must be >= 2");
    const double T = std::log(static_cast<double>(K)) +
                     std::log(std::log(static_cast<double>(K))) + 1.0;
    // validity condition: K T + 1 <= exp(T)
    if (K * T + 1.0 - std::exp(T) > 1e-9)
        throw std::runtime_error("harmonic_threshold: validity condition failed");
    return T;
}

namespace {

double genmean_threshold_uncached(double r, int K) {
    if (r == 0.0)
        throw std::invalid_argument("generalized_mean_threshold: r must be nonzero");
    if (K < 2)
        throw std::invalid_argument("generalized_mean_threshold: K must be >= 2");
    if (r > 0.0) return r * r / (r + 1.0);
    if (r == -1.0) return harmonic_threshold(K);
    // integral is continuous and strictly decreasing in T; find integral = 1
    const double lo = 1e-6;
    auto gap = [&](double T) {
        CalibratorSpec s;
        s.family = CalFamily::generalized_mean;
        s.K = K;
        s.r = r;
        s.threshold_override = T;
        return integral_quadrature(s) - 1.0;
    };
    double hi = 10.0 * (std::log(static_cast<double>(K)) + 2.0);
    int doublings = 0;
    while (gap(hi) >= 0.0 && doublings++ < 40) hi *= 2.0;
    if (!(gap(lo) > 0.0 && gap(hi) < 0.0))
        throw std::runtime_error(
            "generalized_mean_threshold: could not bracket the unit-integral "
            "root");
    return stats::bisect_root(gap, lo, hi, 200, 1e-9);
}

}  // namespace

double generalized_mean_threshold(double r, int K) {
    const auto key = std::make_pair(r, K);
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = T_cache.find(key);
        if (it != T_cache.end()) return it->second;
    }
    const double T = genmean_threshold_uncached(r, K);
    std::lock_guard<std::mutex> lock(cache_mutex);
    T_cache.emplace(key, T);
    return T;
}

double generalized_mean_scale(double r, int K) {
    const double T = generalized_mean_threshold(r, K);
    return std::pow(1.0 - T / r, -1.0 / r);
}

Calibrator::Calibrator(const CalibratorSpec& spec) : spec_(spec) {
    validate_spec(spec_);
    switch (spec_.family) {
        case CalFamily::grid_harmonic:
            hK_ = harmonic_number(spec_.K);
            break;
        case CalFamily::generalized_grid: {
            hM_ = grid_constant(spec_.lambda);
            edges_.resize(spec_.lambda.size());
            for (std::size_t j = 0; j < spec_.lambda.size(); ++j)
                edges_[j] = spec_.lambda[j] / hM_;
            break;
        }
        case CalFamily::harmonic:
            T_ = spec_.threshold_override ? *spec_.threshold_override
                                          : harmonic_threshold(spec_.K);
            break;
        case CalFamily::generalized_mean:
            T_ = spec_.threshold_override
                     ? *spec_.threshold_override
                     : generalized_mean_threshold(spec_.r, spec_.K);
            break;
        default:
            break;
    }
}

double Calibrator::eval_signed(double p) const {
    const int K = spec_.K;
    switch (spec_.family) {
        case CalFamily::ruger_indicator:
        case CalFamily::grid_harmonic:
        case CalFamily::generalized_grid:
            return eval(p);  // indicator families have no signed variant
        case CalFamily::arithmetic:
            return 2.0 - 2.0 * p;
        case CalFamily::harmonic:
            if (p == 0.0) return kInf;
            return 1.0 / (T_ * p) - 1.0 / T_;
        case CalFamily::geometric:
            if (p == 0.0) return kInf;
            return -std::log(p);
        case CalFamily::generalized_mean: {
            const double r = spec_.r;
            if (p == 0.0) return r > 0.0 ? r / T_ : kInf;
            return r * (1.0 - std::pow(p, r)) / T_;
        }
    }
    (void)K;
    return 0.0;
}

double Calibrator::eval(double p) const {
    if (p < 0.0) throw std::invalid_argument("calibrator eval: p must be >= 0");
    const int K = spec_.K;
    if (p > 1.0) return 0.0;
    switch (spec_.family) {
        case CalFamily::ruger_indicator: {
            if (p == 0.0) return kInf;
            const double edge = static_cast<double>(spec_.k) / K;
            return p <= edge ? static_cast<double>(K) / spec_.k : 0.0;
        }
        case CalFamily::grid_harmonic: {
            if (p == 0.0) return static_cast<double>(K);
            const double x = hK_ * p;
            if (x > 1.0) return 0.0;
            return static_cast<double>(K) / std::ceil(K * x);
        }
        case CalFamily::generalized_grid: {
            if (p == 0.0) return kInf;
            if (p > edges_.back()) return 0.0;
            for (std::size_t j = 1; j < edges_.size(); ++j)
                if (p <= edges_[j]) return 1.0 / spec_.lambda[j];
            return 0.0;
        }
        case CalFamily::arithmetic:
            if (p == 0.0) return kInf;
            return std::max(0.0, 2.0 - 2.0 * p);
        case CalFamily::harmonic:
            if (p == 0.0) return static_cast<double>(K);
            return std::max(0.0, std::min(1.0 / (T_ * p) - 1.0 / T_,
                                          static_cast<double>(K)));
        case CalFamily::geometric:
            if (p == 0.0) return kInf;
            return std::max(0.0, -std::log(p));
        case CalFamily::generalized_mean: {
            const double s = eval_signed(p);
            return std::max(0.0, std::min(s, static_cast<double>(K)));
        }
    }
    return 0.0;
}

double integral(const CalibratorSpec& spec) {
    validate_spec(spec);
    switch (spec.family) {
        case CalFamily::ruger_indicator:
        case CalFamily::grid_harmonic:
        case CalFamily::generalized_grid:
        case CalFamily::arithmetic:
        case CalFamily::geometric:
            return 1.0;
        case CalFamily::harmonic: {
            const Calibrator c(spec);
            const double T = c.threshold();
            return std::log(spec.K * T + 1.0) / T;
        }
        case CalFamily::generalized_mean:
            return integral_quadrature(spec);
    }
    return 1.0;
}

double integral_quadrature(const CalibratorSpec& spec) {
    validate_spec(spec);
    const Calibrator c(spec);
    std::vector<double> cuts{0.0, 1.0};
    switch (spec.family) {
        case CalFamily::ruger_indicator:
            cuts.insert(cuts.end() - 1, static_cast<double>(spec.k) / spec.K);
            break;
        case CalFamily::grid_harmonic: {
            const double h = harmonic_number(spec.K);
            for (int j = 1; j <= spec.K; ++j)
                cuts.insert(cuts.end() - 1, j / (spec.K * h));
            break;
        }
        case CalFamily::generalized_grid: {
            const double h = grid_constant(spec.lambda);
            for (std::size_t j = 1; j < spec.lambda.size(); ++j)
                cuts.insert(cuts.end() - 1, spec.lambda[j] / h);
            break;
        }
        case CalFamily::harmonic:
            cuts.insert(cuts.end() - 1, 1.0 / (spec.K * c.threshold() + 1.0));
            break;
        case CalFamily::generalized_mean: {
            // point where the cap K switches off: p = (1 - K T / r)^{1/r}
            const double arg = 1.0 - spec.K * c.threshold() / spec.r;
            if (arg > 0.0) {
                const double pstar = std::pow(arg, 1.0 / spec.r);
                if (pstar > 0.0 && pstar < 1.0)
                    cuts.insert(cuts.end() - 1, pstar);
            }
            break;
        }
        default:
            break;
    }
    std::sort(cuts.begin(), cuts.end());
    if (!std::isfinite(c.eval(cuts.front())))
        cuts.front() = 1e-12;  // integrable endpoint singularity; omitted mass below 3e-11
    long double total = 0.0L;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        total += stats::adaptive_simpson([&](double p) { return c.eval(p); },
                                         cuts[i], cuts[i + 1], 1e-11);
    }
    return static_cast<double>(total);
}

ValidationReport validate(const CalibratorSpec& spec, int grid_size) {
    if (grid_size < 2)
        throw std::invalid_argument("validate: grid_size must be >= 2");
    ValidationReport rep;
    const Calibrator c(spec);
    // monotone nonincreasing on [0, 1]
    double prev = c.eval(0.0);
    for (int i = 1; i <= grid_size; ++i) {
        const double p = static_cast<double>(i) / grid_size;
        const double v = c.eval(p);
        if (v > prev + 1e-12) {
            rep.pass = false;
            rep.message = "calibrator increases on [0, 1]";
            rep.violation_point = p;
            return rep;
        }
        prev = v;
    }
    // zero beyond 1
    for (double p : {1.0 + 1e-9, 1.5, 2.0, 10.0}) {
        if (c.eval(p) != 0.0) {
            rep.pass = false;
            rep.message = "calibrator is nonzero beyond 1";
            rep.violation_point = p;
            return rep;
        }
    }
    // unit mass bound
    const double mass = spec.family == CalFamily::generalized_mean ||
                                spec.threshold_override
                            ? integral_quadrature(spec)
                            : integral(spec);
    if (mass > 1.0 + 1e-9) {
        rep.pass = false;
        rep.message = "calibrator integral exceeds 1";
        rep.violation_point = mass;
        return rep;
    }
    return rep;
}

}  // namespace pmerge::cal
