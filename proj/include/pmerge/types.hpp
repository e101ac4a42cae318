#pragma once
// Core value types shared by the merging, solver and simulation modules.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmerge {

// Ordered vector of p-values in [0, 1]. Order is semantically meaningful:
// the exchangeable rules process the vector sequentially, so permuting the
// input can change their output.
class PVec {
public:
    PVec() = default;

    // Validates: rejects negatives and NaN, clamps values > 1 to 1.
    // The number of clamped entries is kept so callers can warn.
    static PVec from(std::vector<double> vals) {
        std::size_t clamped = 0;
        for (double& v : vals) {
            if (!(v >= 0.0))
                throw std::invalid_argument("p-value must be a number >= 0");
            if (v > 1.0) {
                v = 1.0;
                ++clamped;
            }
        }
        PVec p;
        p.vals_ = std::move(vals);
        p.clamped_ = clamped;
        return p;
    }

    // For internally generated values already known to lie in [0, 1].
    static PVec from_unchecked(std::vector<double> vals) {
        PVec p;
        p.vals_ = std::move(vals);
        return p;
    }

    std::size_t size() const { return vals_.size(); }
    bool empty() const { return vals_.empty(); }
    double operator[](std::size_t i) const { return vals_[i]; }
    const std::vector<double>& values() const { return vals_; }
    std::size_t clamped_count() const { return clamped_; }

    auto begin() const { return vals_.begin(); }
    auto end() const { return vals_.end(); }

private:
    std::vector<double> vals_;
    std::size_t clamped_ = 0;
};

enum class Family {
    bonferroni,
    ruger,
    hommel,
    generalized_hommel,
    average,
    harmonic,
    geometric,
    generalized_mean,
    fisher,  // independence baseline, simulation module only
    simes,   // independence baseline, simulation module only
};

enum class Mode {
    batch,
    exchangeable,
    randomized,
    exchangeable_randomized,
};

enum class Variant {
    preset,  // family default, resolved at dispatch
    plain,
    improved,
    classical,
    exact,
    simple,
    tight,
    wang,
};

// Descriptor of one merging rule: family x mode x variant plus parameters.
struct RuleSpec {
    Family family = Family::average;
    Mode mode = Mode::batch;
    Variant variant = Variant::preset;
    int k = 0;                   // ruger order statistic index; 0 = ceil(K/2) preset
    double r = 1.0;              // generalized mean exponent, r != 0
    std::vector<double> lambda;  // generalized hommel quantile grid
    int fixed_K = 0;             // stream mode: constants pinned to this K (0 = per-call K)

    std::string name() const;  // e.g. "ex_harmonic(tight)"; defined in rules.cpp
};

enum class Method {
    closed_form,
    bisection,
    breakpoint_exact,
};

// Result of one merge.
struct MergedP {
    double value = 1.0;  // in [0, 1]
    RuleSpec rule;
    Method method = Method::closed_form;
    double error_bound = 0.0;           // 0 for exact routes, 2^-B for bisection
    std::optional<double> realized_u;   // recorded for randomized rules
};

// Source of the uniform randomizer consumed by the randomized rules.
struct RandSource {
    enum class Kind { explicit_u, seeded, first_pvalue };
    Kind kind = Kind::explicit_u;
    double u = 1.0;
    std::uint64_t seed = 0;
    // first_pvalue consumes p_1 as the randomizer and merges p_2..p_K; it is
    // only valid when p_1 is independent of the rest, which the caller must
    // assert explicitly.
    bool acknowledged_independent_first = false;

    static RandSource explicit_u_value(double u) {
        if (!(u >= 0.0 && u <= 1.0))
            throw std::invalid_argument("explicit u must lie in [0, 1]");
        RandSource rs;
        rs.kind = Kind::explicit_u;
        rs.u = u;
        return rs;
    }
    static RandSource seeded(std::uint64_t seed) {
        RandSource rs;
        rs.kind = Kind::seeded;
        rs.seed = seed;
        return rs;
    }
    static RandSource first_pvalue(bool acknowledge_independent_first) {
        RandSource rs;
        rs.kind = Kind::first_pvalue;
        rs.acknowledged_independent_first = acknowledge_independent_first;
        return rs;
    }
};

}  // namespace pmerge
