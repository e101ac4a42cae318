#pragma once
// Shared closed-form evaluation used by the batch and randomized merging
// modules. The batch rules are the u = 1 specializations of the randomized
// ones, and routing both through the same expressions keeps the u = 1
// reduction identities exact at the bit level.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pmerge/types.hpp"

namespace pmerge::detail {

inline double cap01(long double v) {
    if (!(v > 0.0L)) return 0.0;
    const double d = static_cast<double>(v);
    return d < 1.0 ? d : 1.0;
}

inline std::vector<double> sorted_asc(const PVec& p) {
    std::vector<double> s(p.values());
    std::stable_sort(s.begin(), s.end());
    return s;
}

inline bool has_zero(const PVec& p) {
    for (double v : p)
        if (v == 0.0) return true;
    return false;
}

// 2 A(p) / (2 - u)
inline double ua_simple_value(const PVec& p, double u) {
    long double s = 0.0L;
    for (double v : p) s += v;
    const long double mean = s / static_cast<long double>(p.size());
    return cap01((2.0L * mean) / static_cast<long double>(2.0 - u));
}

// min_m 2 A(p_(m)) / (2 - K u / m)_+, zero if any input is zero
inline double ua_tight_value(const PVec& p, double u) {
    if (has_zero(p)) return 0.0;
    const auto s = sorted_asc(p);
    const int K = static_cast<int>(s.size());
    long double sum = 0.0L;
    long double best = -1.0L;
    for (int m = 1; m <= K; ++m) {
        sum += s[m - 1];
        const double denom =
            2.0 - static_cast<double>(K) * u / static_cast<double>(m);
        if (denom <= 0.0) continue;
        const long double term = (2.0L * (sum / m)) / denom;
        if (best < 0.0L || term < best) best = term;
    }
    return best < 0.0L ? 1.0 : cap01(best);
}

// (T u + 1) H(p)
inline double uh_simple_value(const PVec& p, double u, double T) {
    long double recip = 0.0L;
    for (double v : p) recip += 1.0 / v;
    const long double H = static_cast<long double>(p.size()) / recip;
    return cap01((T * u + 1.0) * H);
}

// min_m (u K T / m + 1) H(p_(m))
inline double uh_tight_value(const PVec& p, double u, double T) {
    const auto s = sorted_asc(p);
    const int K = static_cast<int>(s.size());
    long double recip = 0.0L;
    long double best = 2.0L;
    for (int m = 1; m <= K; ++m) {
        recip += 1.0 / s[m - 1];
        const double coef =
            (u * static_cast<double>(K) * T) / static_cast<double>(m) + 1.0;
        const long double term = coef * (static_cast<long double>(m) / recip);
        best = std::min(best, term);
    }
    return cap01(best);
}

// exp(u) G(p)
inline double ug_simple_value(const PVec& p, double u) {
    long double lsum = 0.0L;
    for (double v : p) lsum += std::log(v);
    return cap01(
        std::exp(static_cast<long double>(u) +
                  lsum / static_cast<long double>(p.size())));
}

// min_m exp(u K / m) G(p_(m))
inline double ug_tight_value(const PVec& p, double u) {
    const auto s = sorted_asc(p);
    const int K = static_cast<int>(s.size());
    long double lsum = 0.0L;
    long double best = 2.0L;
    for (int m = 1; m <= K; ++m) {
        lsum += std::log(s[m - 1]);
        const long double term = std::exp(
            (static_cast<long double>(u * K) + lsum) / static_cast<long double>(m));
        best = std::min(best, term);
    }
    return cap01(best);
}

// [ S_r / (n (1 - u T / r)) ]^(1/r) with S_r = sum p_i^r; equals
// M_r(p) / (1 - u T / r)^(1/r)
inline double genmean_simple_value(const PVec& p, double r, double u,
                                   double T) {
    long double s = 0.0L;
    for (double v : p) s += std::pow(v, r);
    const long double denom =
        static_cast<long double>(p.size()) *
        static_cast<long double>(1.0 - u * T / r);
    return cap01(std::pow(s / denom, 1.0L / static_cast<long double>(r)));
}

}  // namespace pmerge::detail
