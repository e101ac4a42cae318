#include "pmerge/rules.hpp"

#include <sstream>
#include <stdexcept>

#include "pmerge/calibrator.hpp"
#include "pmerge/merge_batch.hpp"
#include "pmerge/merge_exchangeable.hpp"
#include "pmerge/merge_randomized.hpp"

namespace pmerge {
namespace {

[[noreturn]] void bad_variant(const RuleSpec& spec) {
    throw std::invalid_argument("rule '" + rules::base_name(spec) +
                                "' has no such variant");
}

bool improved_flag(const RuleSpec& spec) {
    switch (spec.variant) {
        case Variant::preset:
        case Variant::improved:
            return true;
        case Variant::plain:
            return false;
        default:
            bad_variant(spec);
    }
}

bool exact_flag(const RuleSpec& spec, bool preset_exact) {
    switch (spec.variant) {
        case Variant::preset:
            return preset_exact;
        case Variant::exact:
            return true;
        case Variant::classical:
            return false;
        default:
            bad_variant(spec);
    }
}

void require_single_form(const RuleSpec& spec) {
    if (spec.variant != Variant::preset) bad_variant(spec);
}

Method solver_route(const RuleSpec& spec, const rules::ApplyOptions& opts) {
    if (opts.method == Method::closed_form)
        throw std::invalid_argument("rule '" + rules::base_name(spec) +
                                    "' is solver-backed; no closed form");
    return opts.method;
}

MergedP apply_batch(const RuleSpec& spec, const PVec& p,
                    const rules::ApplyOptions& opts) {
    switch (spec.family) {
        case Family::bonferroni:
            require_single_form(spec);
            return batch::bonferroni(p);
        case Family::ruger:
            require_single_form(spec);
            return batch::ruger(p, spec.k);
        case Family::hommel: {
            const bool exact = exact_flag(spec, true);
            return batch::hommel(p, exact, opts.iters,
                                 exact ? solver_route(spec, opts)
                                       : Method::bisection);
        }
        case Family::generalized_hommel: {
            const bool exact = exact_flag(spec, false);
            return batch::generalized_hommel(p, spec.lambda, exact, opts.iters,
                                             exact ? solver_route(spec, opts)
                                                   : Method::bisection);
        }
        case Family::average:
            require_single_form(spec);
            return batch::twice_average(p);
        case Family::harmonic:
            return batch::harmonic(p, improved_flag(spec));
        case Family::geometric:
            return batch::geometric(p, improved_flag(spec));
        case Family::generalized_mean:
            require_single_form(spec);
            return batch::generalized_mean(p, spec.r);
        case Family::fisher:
        case Family::simes:
            throw std::invalid_argument(
                "fisher/simes assume independent p-values and are evaluated "
                "by the simulation module only");
    }
    throw std::logic_error("apply_batch: unknown family");
}

MergedP apply_ex(const RuleSpec& spec, const PVec& p,
                 const rules::ApplyOptions& opts) {
    switch (spec.family) {
        case Family::bonferroni:
            require_single_form(spec);
            return ex::ex_ruger(p, 1, spec.fixed_K);
        case Family::ruger:
            require_single_form(spec);
            return ex::ex_ruger(p, spec.k, spec.fixed_K);
        case Family::hommel:
            require_single_form(spec);
            return ex::ex_hommel(p, spec.fixed_K, opts.iters,
                                 solver_route(spec, opts));
        case Family::average:
            return ex::ex_average(p, spec.variant);
        case Family::harmonic:
            return ex::ex_harmonic(p, spec.variant, spec.fixed_K);
        case Family::geometric:
            return ex::ex_geometric(p, spec.variant);
        case Family::generalized_mean:
            return ex::ex_generalized_mean(p, spec.r, spec.variant,
                                           spec.fixed_K, opts.iters);
        default:
            throw std::invalid_argument(
                "rule has no exchangeable form: " + rules::base_name(spec));
    }
}

MergedP apply_rand(const RuleSpec& spec, const PVec& p, const RandSource& src,
                   const rules::ApplyOptions& opts) {
    switch (spec.family) {
        case Family::bonferroni:
            require_single_form(spec);
            return rand::ur_ruger(p, 1, src);
        case Family::ruger:
            require_single_form(spec);
            return rand::ur_ruger(p, spec.k, src);
        case Family::hommel:
            require_single_form(spec);
            return rand::u_hommel(p, src, opts.iters, solver_route(spec, opts));
        case Family::average:
            return rand::ua(p, src, spec.variant);
        case Family::harmonic:
            return rand::uh(p, src, spec.variant);
        case Family::geometric:
            return rand::ug(p, src, spec.variant);
        case Family::generalized_mean:
            return rand::u_generalized_mean(p, spec.r, src, spec.variant,
                                            opts.iters);
        default:
            throw std::invalid_argument(
                "rule has no randomized form: " + rules::base_name(spec));
    }
}

MergedP apply_ex_rand(const RuleSpec& spec, const PVec& p,
                      const RandSource& src, const rules::ApplyOptions& opts) {
    require_single_form(spec);
    const int body =
        static_cast<int>(p.size()) -
        (src.kind == RandSource::Kind::first_pvalue ? 1 : 0);
    const int K = spec.fixed_K > 0 ? spec.fixed_K : body;
    cal::CalibratorSpec cs;
    cs.K = std::max(K, 2);
    bool k_free = false;
    switch (spec.family) {
        case Family::bonferroni:
            cs.family = cal::CalFamily::ruger_indicator;
            cs.k = 1;
            break;
        case Family::ruger:
            cs.family = cal::CalFamily::ruger_indicator;
            cs.k = spec.k > 0 ? spec.k : (K + 1) / 2;
            break;
        case Family::hommel:
            cs.family = cal::CalFamily::grid_harmonic;
            break;
        case Family::generalized_hommel:
            cs.family = cal::CalFamily::generalized_grid;
            cs.lambda = spec.lambda;
            k_free = true;
            break;
        case Family::average:
            cs.family = cal::CalFamily::arithmetic;
            k_free = true;
            break;
        case Family::harmonic:
            cs.family = cal::CalFamily::harmonic;
            break;
        case Family::geometric:
            cs.family = cal::CalFamily::geometric;
            k_free = true;
            break;
        case Family::generalized_mean:
            cs.family = cal::CalFamily::generalized_mean;
            cs.r = spec.r;
            break;
        default:
            throw std::invalid_argument(
                "rule has no exchangeable randomized form: " +
                rules::base_name(spec));
    }
    if (!k_free && K < 2)
        throw std::invalid_argument(
            "exchangeable randomized rules with K-dependent constants need "
            "at least 2 effective p-values");
    MergedP out = rand::randomized_ex(cs, p, src, opts.iters);
    RuleSpec stamped = spec;
    stamped.k = cs.k;
    out.rule = std::move(stamped);
    return out;
}

const char* variant_token(Variant v) {
    switch (v) {
        case Variant::preset:
            return "preset";
        case Variant::plain:
            return "plain";
        case Variant::improved:
            return "improved";
        case Variant::classical:
            return "classical";
        case Variant::exact:
            return "exact";
        case Variant::simple:
            return "simple";
        case Variant::tight:
            return "tight";
        case Variant::wang:
            return "wang";
    }
    return "?";
}

std::string trimmed(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

std::string RuleSpec::name() const {
    std::string out = rules::base_name(*this);
    std::vector<std::string> parts;
    const std::string var = rules::variant_name(*this);
    if (var != "-") parts.push_back(var);
    if (family == Family::ruger)
        parts.push_back(k > 0 ? "k=" + std::to_string(k) : "k=ceil(K/2)");
    if (family == Family::generalized_mean) parts.push_back("r=" + trimmed(r));
    if (fixed_K > 0) parts.push_back("K=" + std::to_string(fixed_K));
    if (parts.empty()) return out;
    out += '(';
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    out += ')';
    return out;
}

namespace rules {

MergedP apply(const RuleSpec& spec, const PVec& p, const RandSource* src,
              const ApplyOptions& opts) {
    if (opts.iters < 1)
        throw std::invalid_argument("apply: iters must be positive");
    switch (spec.mode) {
        case Mode::batch:
            return apply_batch(spec, p, opts);
        case Mode::exchangeable:
            return apply_ex(spec, p, opts);
        case Mode::randomized:
            if (!src)
                throw std::invalid_argument(
                    "randomized rule needs a randomization source");
            return apply_rand(spec, p, *src, opts);
        case Mode::exchangeable_randomized:
            if (!src)
                throw std::invalid_argument(
                    "randomized rule needs a randomization source");
            return apply_ex_rand(spec, p, *src, opts);
    }
    throw std::logic_error("apply: unknown mode");
}

std::string family_token(Family f) {
    switch (f) {
        case Family::bonferroni:
            return "bonferroni";
        case Family::ruger:
            return "ruger";
        case Family::hommel:
            return "hommel";
        case Family::generalized_hommel:
            return "generalized_hommel";
        case Family::average:
            return "average";
        case Family::harmonic:
            return "harmonic";
        case Family::geometric:
            return "geometric";
        case Family::generalized_mean:
            return "generalized_mean";
        case Family::fisher:
            return "fisher";
        case Family::simes:
            return "simes";
    }
    return "?";
}

std::string base_name(const RuleSpec& spec) {
    std::string prefix;
    switch (spec.mode) {
        case Mode::batch:
            break;
        case Mode::exchangeable:
            prefix = "ex_";
            break;
        case Mode::randomized:
            prefix = "u_";
            break;
        case Mode::exchangeable_randomized:
            prefix = "u_ex_";
            break;
    }
    return prefix + family_token(spec.family);
}

std::string variant_name(const RuleSpec& spec) {
    const Variant v = spec.variant;
    switch (spec.family) {
        case Family::hommel:
            if (spec.mode == Mode::batch)
                return v == Variant::classical ? "classical" : "exact";
            return "-";
        case Family::generalized_hommel:
            if (spec.mode == Mode::batch)
                return v == Variant::exact ? "exact" : "classical";
            return "-";
        case Family::harmonic:
        case Family::geometric:
            if (spec.mode == Mode::batch)
                return v == Variant::plain ? "plain" : "improved";
            if (spec.mode == Mode::exchangeable_randomized) return "-";
            return v == Variant::simple ? "simple" : "tight";
        case Family::average:
            if (spec.mode == Mode::exchangeable)
                return v == Variant::simple ? "simple" : "tight";
            if (spec.mode == Mode::randomized) {
                if (v == Variant::simple) return "simple";
                if (v == Variant::wang) return "wang";
                return "tight";
            }
            return "-";
        case Family::generalized_mean:
            if (spec.mode == Mode::exchangeable ||
                spec.mode == Mode::randomized)
                return v == Variant::simple ? "simple" : "tight";
            return "-";
        default:
            return "-";
    }
}

Family parse_family(const std::string& s) {
    if (s == "bonferroni") return Family::bonferroni;
    if (s == "ruger") return Family::ruger;
    if (s == "hommel") return Family::hommel;
    if (s == "generalized_hommel") return Family::generalized_hommel;
    if (s == "average") return Family::average;
    if (s == "harmonic") return Family::harmonic;
    if (s == "geometric") return Family::geometric;
    if (s == "generalized_mean") return Family::generalized_mean;
    if (s == "fisher") return Family::fisher;
    if (s == "simes") return Family::simes;
    throw std::invalid_argument("unknown rule: " + s);
}

Variant parse_variant(const std::string& s) {
    if (s == "preset" || s.empty()) return Variant::preset;
    if (s == "plain") return Variant::plain;
    if (s == "improved") return Variant::improved;
    if (s == "classical") return Variant::classical;
    if (s == "exact") return Variant::exact;
    if (s == "simple") return Variant::simple;
    if (s == "tight") return Variant::tight;
    if (s == "wang") return Variant::wang;
    throw std::invalid_argument("unknown variant: " + s);
}

std::vector<RuleSpec> catalog() {
    std::vector<RuleSpec> out;
    auto add = [&out](Family f, Mode m, Variant v, double r = 1.0,
                      std::vector<double> lambda = {}) {
        RuleSpec s;
        s.family = f;
        s.mode = m;
        s.variant = v;
        s.r = r;
        s.lambda = std::move(lambda);
        out.push_back(std::move(s));
    };
    const std::vector<double> quartiles{0.0, 0.25, 0.5, 0.75, 1.0};

    add(Family::bonferroni, Mode::batch, Variant::preset);
    add(Family::ruger, Mode::batch, Variant::preset);
    add(Family::hommel, Mode::batch, Variant::classical);
    add(Family::hommel, Mode::batch, Variant::exact);
    add(Family::generalized_hommel, Mode::batch, Variant::classical, 1.0,
        quartiles);
    add(Family::generalized_hommel, Mode::batch, Variant::exact, 1.0,
        quartiles);
    add(Family::average, Mode::batch, Variant::preset);
    add(Family::harmonic, Mode::batch, Variant::plain);
    add(Family::harmonic, Mode::batch, Variant::improved);
    add(Family::geometric, Mode::batch, Variant::plain);
    add(Family::geometric, Mode::batch, Variant::improved);
    add(Family::generalized_mean, Mode::batch, Variant::preset, 2.0);
    add(Family::generalized_mean, Mode::batch, Variant::preset, -2.0);

    add(Family::ruger, Mode::exchangeable, Variant::preset);
    add(Family::average, Mode::exchangeable, Variant::simple);
    add(Family::average, Mode::exchangeable, Variant::tight);
    add(Family::harmonic, Mode::exchangeable, Variant::simple);
    add(Family::harmonic, Mode::exchangeable, Variant::tight);
    add(Family::geometric, Mode::exchangeable, Variant::simple);
    add(Family::geometric, Mode::exchangeable, Variant::tight);
    add(Family::hommel, Mode::exchangeable, Variant::preset);
    add(Family::generalized_mean, Mode::exchangeable, Variant::simple, 2.0);
    add(Family::generalized_mean, Mode::exchangeable, Variant::tight, 2.0);

    add(Family::ruger, Mode::randomized, Variant::preset);
    add(Family::average, Mode::randomized, Variant::simple);
    add(Family::average, Mode::randomized, Variant::tight);
    add(Family::average, Mode::randomized, Variant::wang);
    add(Family::harmonic, Mode::randomized, Variant::simple);
    add(Family::harmonic, Mode::randomized, Variant::tight);
    add(Family::geometric, Mode::randomized, Variant::simple);
    add(Family::geometric, Mode::randomized, Variant::tight);
    add(Family::hommel, Mode::randomized, Variant::preset);
    add(Family::generalized_mean, Mode::randomized, Variant::simple, 2.0);
    add(Family::generalized_mean, Mode::randomized, Variant::tight, 2.0);

    add(Family::average, Mode::exchangeable_randomized, Variant::preset);
    add(Family::hommel, Mode::exchangeable_randomized, Variant::preset);
    return out;
}

}  // namespace rules
}  // namespace pmerge
