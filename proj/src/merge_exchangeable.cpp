#include "pmerge/merge_exchangeable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "closed_forms.hpp"
#include "pmerge/calibrator.hpp"
#include "pmerge/rng.hpp"
#include "pmerge/solver.hpp"

namespace pmerge::ex {

namespace detail {

using pmerge::detail::cap01;

// Incremental evaluator for one exchangeable rule. Each push appends one
// p-value; result() is the rule applied to everything pushed so far. The
// closed-form cores carry running sufficient statistics, so a batch call
// and a stream that saw the same values produce identical bits.
class ExCore {
public:
    virtual ~ExCore() = default;
    virtual void push(double p) = 0;
    virtual MergedP result() const = 0;
};

namespace {

void insert_sorted(std::vector<double>& keys, double key) {
    keys.insert(std::upper_bound(keys.begin(), keys.end(), key), key);
}

// Keeps a companion array aligned with the sorted keys.
std::size_t insert_sorted_pos(std::vector<double>& keys, double key) {
    const auto it = std::upper_bound(keys.begin(), keys.end(), key);
    const std::size_t pos = static_cast<std::size_t>(it - keys.begin());
    keys.insert(it, key);
    return pos;
}

MergedP closed_result(double value) {
    MergedP out;
    out.value = value;
    out.method = Method::closed_form;
    return out;
}

class RugerCore final : public ExCore {
public:
    RugerCore(int k, int K) : k_(k), K_(K) {}

    void push(double p) override {
        if (p == 0.0) zero_ = true;
        insert_sorted(sorted_, p);
        const int l = static_cast<int>(sorted_.size());
        const int lam = (l * k_ + K_ - 1) / K_;
        qmin_ = std::min(qmin_, sorted_[lam - 1]);
    }

    MergedP result() const override {
        if (zero_) return closed_result(0.0);
        const double scale = static_cast<double>(K_) / k_;
        return closed_result(cap01(qmin_ * scale));
    }

private:
    int k_, K_;
    std::vector<double> sorted_;
    double qmin_ = std::numeric_limits<double>::infinity();
    bool zero_ = false;
};

class AverageSimpleCore final : public ExCore {
public:
    void push(double p) override {
        sum_ += p;
        ++count_;
        best_ = std::min(best_, 2.0L * (sum_ / count_));
    }
    MergedP result() const override { return closed_result(cap01(best_)); }

private:
    long double sum_ = 0.0L;
    long double best_ = std::numeric_limits<long double>::infinity();
    int count_ = 0;
};

class AverageTightCore final : public ExCore {
public:
    void push(double p) override {
        if (p == 0.0) zero_ = true;
        insert_sorted(sorted_, p);
        const int l = static_cast<int>(sorted_.size());
        long double sum = 0.0L;
        for (int m = 1; m <= l; ++m) {
            sum += sorted_[m - 1];
            const double denom =
                2.0 - static_cast<double>(l) / static_cast<double>(m);
            if (denom <= 0.0) continue;
            best_ = std::min(best_, (2.0L * (sum / m)) / denom);
        }
    }
    MergedP result() const override {
        if (zero_) return closed_result(0.0);
        return closed_result(cap01(best_));
    }

private:
    std::vector<double> sorted_;
    long double best_ = std::numeric_limits<long double>::infinity();
    bool zero_ = false;
};

class HarmonicSimpleCore final : public ExCore {
public:
    explicit HarmonicSimpleCore(double T) : T_(T) {}
    void push(double p) override {
        recip_ += 1.0 / p;
        ++count_;
        best_ = std::min(
            best_, (T_ + 1.0) * (static_cast<long double>(count_) / recip_));
    }
    MergedP result() const override { return closed_result(cap01(best_)); }

private:
    double T_;
    long double recip_ = 0.0L;
    long double best_ = std::numeric_limits<long double>::infinity();
    int count_ = 0;
};

class HarmonicTightCore final : public ExCore {
public:
    explicit HarmonicTightCore(double T) : T_(T) {}
    void push(double p) override {
        const std::size_t pos = insert_sorted_pos(sorted_, p);
        recip_.insert(recip_.begin() + pos, 1.0 / p);
        const int l = static_cast<int>(sorted_.size());
        long double R = 0.0L;
        for (int m = 1; m <= l; ++m) {
            R += recip_[m - 1];
            const double coef = (static_cast<double>(l) * T_) /
                                    static_cast<double>(m) +
                                1.0;
            best_ = std::min(best_,
                             coef * (static_cast<long double>(m) / R));
        }
    }
    MergedP result() const override { return closed_result(cap01(best_)); }

private:
    double T_;
    std::vector<double> sorted_;
    std::vector<double> recip_;
    long double best_ = std::numeric_limits<long double>::infinity();
};

class GeometricSimpleCore final : public ExCore {
public:
    void push(double p) override {
        lsum_ += std::log(p);
        ++count_;
        best_ = std::min(best_, std::exp(1.0L + lsum_ / count_));
    }
    MergedP result() const override { return closed_result(cap01(best_)); }

private:
    long double lsum_ = 0.0L;
    long double best_ = std::numeric_limits<long double>::infinity();
    int count_ = 0;
};

class GeometricTightCore final : public ExCore {
public:
    void push(double p) override {
        const std::size_t pos = insert_sorted_pos(sorted_, p);
        logs_.insert(logs_.begin() + pos, std::log(p));
        const int l = static_cast<int>(sorted_.size());
        long double L = 0.0L;
        for (int m = 1; m <= l; ++m) {
            L += logs_[m - 1];
            best_ = std::min(
                best_, std::exp((static_cast<long double>(l) + L) /
                                 static_cast<long double>(m)));
        }
    }
    MergedP result() const override { return closed_result(cap01(best_)); }

private:
    std::vector<double> sorted_;
    std::vector<double> logs_;
    long double best_ = std::numeric_limits<long double>::infinity();
};

class GenMeanSimpleCore final : public ExCore {
public:
    GenMeanSimpleCore(double r, double T) : r_(r), T_(T) {}
    void push(double p) override {
        sum_ += std::pow(p, r_);
        ++count_;
        const long double denom =
            static_cast<long double>(count_) *
            static_cast<long double>(1.0 - T_ / r_);
        best_ = std::min(
            best_,
            std::pow(sum_ / denom, 1.0L / static_cast<long double>(r_)));
    }
    MergedP result() const override { return closed_result(cap01(best_)); }

private:
    double r_, T_;
    long double sum_ = 0.0L;
    long double best_ = std::numeric_limits<long double>::infinity();
    int count_ = 0;
};

// Solver-backed rules: every push re-evaluates the prefix condition on the
// whole buffer, which is exactly the batch computation.
class SolverCore final : public ExCore {
public:
    SolverCore(cal::CalibratorSpec cs, int B) : B_(B) {
        cond_.cal = std::move(cs);
        cond_.mode = solver::SolverMode::prefix_max;
        cond_.clip = true;
    }
    void push(double p) override {
        buffer_.push_back(p);
        last_ = solver::bisect(cond_, PVec::from_unchecked(buffer_), B_);
    }
    MergedP result() const override { return last_; }

private:
    solver::DualCondition cond_;
    int B_;
    std::vector<double> buffer_;
    MergedP last_;
};

int resolve_variant_tight(Variant v, const char* rule) {
    switch (v) {
        case Variant::preset:
        case Variant::tight:
            return 1;
        case Variant::simple:
            return 0;
        default:
            throw std::invalid_argument(
                std::string(rule) + ": variant must be simple or tight");
    }
}

}  // namespace

}  // namespace detail

namespace {

using detail::cap01;

int resolve_K(const PVec& p, int K_const, const char* rule) {
    if (K_const < 0)
        throw std::invalid_argument(std::string(rule) + ": negative K");
    if (K_const == 0) return static_cast<int>(p.size());
    if (static_cast<int>(p.size()) > K_const)
        throw std::invalid_argument(
            std::string(rule) + ": more p-values than the declared K");
    return K_const;
}

void require_nonempty(const PVec& p) {
    if (p.empty()) throw std::invalid_argument("merge: empty p-vector");
}

RuleSpec make_spec(Family f, Variant v, int K_const) {
    RuleSpec s;
    s.family = f;
    s.mode = Mode::exchangeable;
    s.variant = v;
    s.fixed_K = K_const;
    return s;
}

MergedP run_core(detail::ExCore& core, const PVec& p, RuleSpec spec) {
    for (double v : p) core.push(v);
    MergedP out = core.result();
    out.rule = std::move(spec);
    return out;
}

}  // namespace

MergedP ex_ruger(const PVec& p, int k, int K_const) {
    require_nonempty(p);
    const int K = resolve_K(p, K_const, "ex_ruger");
    if (k == 0) k = (K + 1) / 2;
    if (k < 1 || k > K)
        throw std::invalid_argument("ex_ruger: k must lie in 1..K");
    detail::RugerCore core(k, K);
    RuleSpec spec = make_spec(Family::ruger, Variant::preset, K_const);
    spec.k = k;
    return run_core(core, p, std::move(spec));
}

MergedP ex_average(const PVec& p, Variant variant) {
    require_nonempty(p);
    const bool tight = detail::resolve_variant_tight(variant, "ex_average");
    const auto spec = make_spec(Family::average,
                                tight ? Variant::tight : Variant::simple, 0);
    if (tight) {
        detail::AverageTightCore core;
        return run_core(core, p, spec);
    }
    detail::AverageSimpleCore core;
    return run_core(core, p, spec);
}

MergedP ex_harmonic(const PVec& p, Variant variant, int K_const) {
    require_nonempty(p);
    const int K = resolve_K(p, K_const, "ex_harmonic");
    if (K < 2)
        throw std::invalid_argument(
            "ex_harmonic: needs K >= 2 (declare K_const for shorter input)");
    const bool tight = detail::resolve_variant_tight(variant, "ex_harmonic");
    const double T = cal::harmonic_threshold(K);
    const auto spec = make_spec(Family::harmonic,
                                tight ? Variant::tight : Variant::simple,
                                K_const);
    if (tight) {
        detail::HarmonicTightCore core(T);
        return run_core(core, p, spec);
    }
    detail::HarmonicSimpleCore core(T);
    return run_core(core, p, spec);
}

MergedP ex_geometric(const PVec& p, Variant variant) {
    require_nonempty(p);
    const bool tight = detail::resolve_variant_tight(variant, "ex_geometric");
    const auto spec = make_spec(Family::geometric,
                                tight ? Variant::tight : Variant::simple, 0);
    if (tight) {
        detail::GeometricTightCore core;
        return run_core(core, p, spec);
    }
    detail::GeometricSimpleCore core;
    return run_core(core, p, spec);
}

MergedP ex_hommel(const PVec& p, int K_const, int B, Method solver_method) {
    require_nonempty(p);
    const int K = resolve_K(p, K_const, "ex_hommel");
    if (K < 2)
        throw std::invalid_argument(
            "ex_hommel: needs K >= 2 (declare K_const for shorter input)");
    solver::DualCondition cond;
    cond.cal.family = cal::CalFamily::grid_harmonic;
    cond.cal.K = K;
    cond.mode = solver::SolverMode::prefix_max;
    MergedP out = solver_method == Method::breakpoint_exact
                      ? solver::breakpoint_exact(cond, p)
                      : solver::bisect(cond, p, B);
    out.rule = make_spec(Family::hommel, Variant::preset, K_const);
    return out;
}

MergedP ex_generalized_mean(const PVec& p, double r, Variant variant,
                            int K_const, int B) {
    require_nonempty(p);
    if (r == 0.0)
        throw std::invalid_argument(
            "ex_generalized_mean: r must be nonzero (use the geometric rule)");
    const int K = resolve_K(p, K_const, "ex_generalized_mean");
    if (K < 2 && r < 0.0)
        throw std::invalid_argument(
            "ex_generalized_mean: r < 0 needs K >= 2");
    const bool tight =
        detail::resolve_variant_tight(variant, "ex_generalized_mean");
    RuleSpec spec = make_spec(Family::generalized_mean,
                              tight ? Variant::tight : Variant::simple,
                              K_const);
    spec.r = r;
    if (!tight) {
        detail::GenMeanSimpleCore core(r, cal::generalized_mean_threshold(r, K));
        return run_core(core, p, std::move(spec));
    }
    solver::DualCondition cond;
    cond.cal.family = cal::CalFamily::generalized_mean;
    cond.cal.K = std::max(K, 2);
    cond.cal.r = r;
    cond.mode = solver::SolverMode::prefix_max;
    MergedP out = solver::bisect(cond, p, B);
    out.rule = std::move(spec);
    return out;
}

namespace {

std::unique_ptr<detail::ExCore> make_core(const RuleSpec& rule, int K, int B) {
    switch (rule.family) {
        case Family::bonferroni:
            return std::make_unique<detail::RugerCore>(1, K);
        case Family::ruger: {
            const int k = rule.k > 0 ? rule.k : (K + 1) / 2;
            if (k < 1 || k > K)
                throw std::invalid_argument("ex_ruger: k must lie in 1..K");
            return std::make_unique<detail::RugerCore>(k, K);
        }
        case Family::average:
            return detail::resolve_variant_tight(rule.variant, "ex_average")
                       ? std::unique_ptr<detail::ExCore>(
                             std::make_unique<detail::AverageTightCore>())
                       : std::make_unique<detail::AverageSimpleCore>();
        case Family::harmonic: {
            const double T = cal::harmonic_threshold(K);
            return detail::resolve_variant_tight(rule.variant, "ex_harmonic")
                       ? std::unique_ptr<detail::ExCore>(
                             std::make_unique<detail::HarmonicTightCore>(T))
                       : std::make_unique<detail::HarmonicSimpleCore>(T);
        }
        case Family::geometric:
            return detail::resolve_variant_tight(rule.variant, "ex_geometric")
                       ? std::unique_ptr<detail::ExCore>(
                             std::make_unique<detail::GeometricTightCore>())
                       : std::make_unique<detail::GeometricSimpleCore>();
        case Family::hommel: {
            cal::CalibratorSpec cs;
            cs.family = cal::CalFamily::grid_harmonic;
            cs.K = K;
            return std::make_unique<detail::SolverCore>(std::move(cs), B);
        }
        case Family::generalized_mean: {
            if (rule.r == 0.0)
                throw std::invalid_argument(
                    "ex_generalized_mean: r must be nonzero");
            if (detail::resolve_variant_tight(rule.variant,
                                              "ex_generalized_mean")) {
                cal::CalibratorSpec cs;
                cs.family = cal::CalFamily::generalized_mean;
                cs.K = K;
                cs.r = rule.r;
                return std::make_unique<detail::SolverCore>(std::move(cs), B);
            }
            return std::make_unique<detail::GenMeanSimpleCore>(
                rule.r, cal::generalized_mean_threshold(rule.r, K));
        }
        default:
            throw std::invalid_argument(
                "no exchangeable variant of this rule");
    }
}

bool family_needs_K(Family f) {
    switch (f) {
        case Family::harmonic:
        case Family::hommel:
        case Family::generalized_mean:
            return true;
        default:
            return false;
    }
}

}  // namespace

MergedP shuffle_then_merge(const PVec& p, const RuleSpec& rule,
                           std::uint64_t seed) {
    require_nonempty(p);
    if (rule.mode != Mode::exchangeable)
        throw std::invalid_argument(
            "shuffle_then_merge: rule must be an exchangeable family");
    std::vector<double> vals(p.values());
    rng::Stream shuffle(seed, 0, 2);
    for (std::size_t i = vals.size() - 1; i > 0; --i) {
        const std::size_t j =
            static_cast<std::size_t>(shuffle.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(vals[i], vals[j]);
    }
    const PVec shuffled = PVec::from_unchecked(std::move(vals));

    const int K =
        rule.fixed_K > 0 ? rule.fixed_K : static_cast<int>(shuffled.size());
    auto core = make_core(rule, K, 50);
    for (double v : shuffled) core->push(v);
    MergedP out = core->result();
    out.rule = rule;
    return out;
}

Stream::Stream(const RuleSpec& rule) : rule_(rule) {
    if (rule.mode != Mode::exchangeable)
        throw std::invalid_argument(
            "stream: rule must be an exchangeable family");
    int K = rule.fixed_K;
    const bool bounded = family_needs_K(rule.family);
    const bool ruger_like =
        rule.family == Family::ruger || rule.family == Family::bonferroni;
    if (bounded || ruger_like) {
        if (K < 1)
            throw std::invalid_argument(
                "stream: this family fixes its constants from a declared K; "
                "set fixed_K");
        if (bounded && K < 2)
            throw std::invalid_argument("stream: declared K must be >= 2");
    }
    core_ = make_core(rule_, K, 50);
    capacity_ = bounded ? K : 0;
    current_.rule = rule_;
}

Stream::~Stream() = default;
Stream::Stream(Stream&&) noexcept = default;
Stream& Stream::operator=(Stream&&) noexcept = default;

void Stream::push(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("stream: pushed p-value outside [0, 1]");
    if (capacity_ > 0 && static_cast<int>(buffer_.size()) >= capacity_)
        throw std::out_of_range(
            "stream: declared K exhausted, push rejected");
    buffer_.push_back(p);
    core_->push(p);
    MergedP out = core_->result();
    out.rule = rule_;
    current_ = out;
}

}  // namespace pmerge::ex
