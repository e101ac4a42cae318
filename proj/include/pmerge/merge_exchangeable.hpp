#pragma once
// Merging rules valid when the inputs are exchangeable under the null.
// These process the vector sequentially and are order-sensitive; the value
// never increases as more p-values arrive, which also yields an anytime-
// valid stream combiner.
//
// Rules whose calibrator constants depend on the number of inputs
// (harmonic T_K, Hommel h_K, generalized-mean T_{r,K}, the Rüger ratio k/K)
// accept K_const to pin the constants independently of the prefix length;
// K_const = 0 resolves to p.size(). Streams require a pinned K via
// RuleSpec::fixed_K for those families and reject pushes beyond it, except
// the Rüger stream, which fixes only the ratio and is unbounded.

#include <memory>
#include <vector>

#include "pmerge/types.hpp"

namespace pmerge::ex {

// (K/k) * min_l p^l_(ceil(l k / K)), zero if any input is zero.
MergedP ex_ruger(const PVec& p, int k, int K_const = 0);

// simple: 2 * min_m A(p_m) over prefixes.
// tight: min over (l, m <= l) of 2 A(p^l_(m)) / (2 - l/m)_+, zero if any
// input is zero.
MergedP ex_average(const PVec& p, Variant variant);

// simple: (T_K + 1) * min_m H(p_m).
// tight: min over (l, m <= l) of (l T_K / m + 1) H(p^l_(m)).
MergedP ex_harmonic(const PVec& p, Variant variant, int K_const = 0);

// simple: e * min_m G(p_m).  tight: min over (l, m) of e^(l/m) G(p^l_(m)).
MergedP ex_geometric(const PVec& p, Variant variant);

// Solver-evaluated (prefix mode on the grid-harmonic calibrator).
MergedP ex_hommel(const PVec& p, int K_const = 0, int B = 50,
                  Method solver_method = Method::bisection);

// simple: (1 - T_{r,K}/r)^(-1/r) * min_m M_r(p_m).
// tight: solver-evaluated (prefix mode on the generalized-mean calibrator).
MergedP ex_generalized_mean(const PVec& p, double r, Variant variant,
                            int K_const = 0, int B = 50);

// Uniformly random permutation of p (seeded), then the exchangeable rule;
// valid for arbitrarily dependent inputs.
MergedP shuffle_then_merge(const PVec& p, const RuleSpec& rule,
                           std::uint64_t seed);

namespace detail {
class ExCore;
}

// Sequential combiner: push p-values one at a time; current() is the rule
// applied to everything pushed so far and never increases. Valid at every
// stopping time when the stream is exchangeable under the null.
class Stream {
public:
    // rule.mode must be exchangeable; families with K-dependent constants
    // require rule.fixed_K >= 2.
    explicit Stream(const RuleSpec& rule);
    ~Stream();
    Stream(Stream&&) noexcept;
    Stream& operator=(Stream&&) noexcept;

    // p must lie in [0, 1]; throws std::out_of_range once the declared
    // fixed_K pushes are exhausted (bounded families only).
    void push(double p);

    const MergedP& current() const { return current_; }
    int count() const { return static_cast<int>(buffer_.size()); }
    const std::vector<double>& buffer() const { return buffer_; }

private:
    RuleSpec rule_;
    std::vector<double> buffer_;
    std::unique_ptr<detail::ExCore> core_;
    MergedP current_;
    int capacity_ = 0;  // 0 = unbounded
};

}  // namespace pmerge::ex
