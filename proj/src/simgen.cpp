#include "pmerge/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pmerge/rng.hpp"
#include "pmerge/rules.hpp"
#include "pmerge/stats.hpp"

namespace pmerge::sim {
namespace {

constexpr std::uint32_t kNoiseRole = 0;
constexpr std::uint32_t kUniformRole = 1;
constexpr std::uint32_t kShuffleRole = 2;

const char* ordering_token(Ordering o) {
    switch (o) {
        case Ordering::as_given:
            return "as_given";
        case Ordering::by_stat_asc:
            return "asc";
        case Ordering::by_stat_desc:
            return "desc";
        case Ordering::random:
            return "random";
    }
    return "?";
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void reorder(std::vector<double>& p, const std::vector<double>& stat,
             Ordering ord, std::uint64_t seed, std::uint64_t rep) {
    const std::size_t K = p.size();
    switch (ord) {
        case Ordering::as_given:
            return;
        case Ordering::by_stat_asc:
        case Ordering::by_stat_desc: {
            std::vector<std::size_t> idx(K);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            if (ord == Ordering::by_stat_asc)
                std::stable_sort(idx.begin(), idx.end(),
                                 [&stat](std::size_t a, std::size_t b) {
                                     return stat[a] < stat[b];
                                 });
            else
                std::stable_sort(idx.begin(), idx.end(),
                                 [&stat](std::size_t a, std::size_t b) {
                                     return stat[a] > stat[b];
                                 });
            std::vector<double> out(K);
            for (std::size_t i = 0; i < K; ++i) out[i] = p[idx[i]];
            p = std::move(out);
            return;
        }
        case Ordering::random: {
            rng::Stream sh(seed, rep, kShuffleRole);
            for (std::size_t i = K - 1; i > 0; --i) {
                const std::size_t j =
                    static_cast<std::size_t>(sh.below(i + 1));
                std::swap(p[i], p[j]);
            }
            return;
        }
    }
}

double beta_or_uniform(double v, const GeneratorSpec& g) {
    return g.under_alternative ? std::pow(v, 1.0 / g.beta_a) : v;
}

}  // namespace

std::string GeneratorSpec::name() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::gauss_equicorr:
            os << "gauss_equicorr(K=" << K << ",rho=" << rho << ",mu=" << mu
               << ")";
            break;
        case Kind::mixture_toy:
            os << "mixture_toy(" << (under_alternative ? "alt" : "null")
               << ")";
            break;
        case Kind::antithetic_pair:
            os << "antithetic_pair(" << (under_alternative ? "alt" : "null")
               << ")";
            break;
        case Kind::common_control:
            os << "common_control(mu=" << mu
               << ",order=" << ordering_token(ordering) << ")";
            break;
        case Kind::ttest_global:
            os << "ttest_global(K=" << K << ",n=" << n_per << ",mu=" << mu
               << ",order=" << ordering_token(ordering) << ")";
            break;
    }
    return os.str();
}

int GeneratorSpec::size() const {
    switch (kind) {
        case Kind::gauss_equicorr:
            return K;
        case Kind::mixture_toy:
            return 3;
        case Kind::antithetic_pair:
            return 2;
        case Kind::common_control:
            return static_cast<int>(n.size());
        case Kind::ttest_global:
            return K;
    }
    return 0;
}

void GeneratorSpec::validate() const {
    switch (kind) {
        case Kind::gauss_equicorr:
            if (K < 2) throw std::invalid_argument("gauss_equicorr: K >= 2");
            if (!(rho >= 0.0 && rho <= 1.0))
                throw std::invalid_argument(
                    "gauss_equicorr: rho must lie in [0, 1]");
            if (ordering != Ordering::as_given)
                throw std::invalid_argument(
                    "gauss_equicorr: no ordering statistic");
            break;
        case Kind::mixture_toy:
        case Kind::antithetic_pair:
            if (beta_a <= 0.0)
                throw std::invalid_argument(
                    "alternative shape beta_a must be positive");
            if (ordering != Ordering::as_given)
                throw std::invalid_argument("no ordering statistic");
            break;
        case Kind::common_control:
            if (n.empty())
                throw std::invalid_argument(
                    "common_control: sample sizes missing");
            for (int ni : n)
                if (ni < 2)
                    throw std::invalid_argument(
                        "common_control: sample sizes must be >= 2");
            if (n0 < 2)
                throw std::invalid_argument("common_control: n0 must be >= 2");
            break;
        case Kind::ttest_global:
            if (K < 2) throw std::invalid_argument("ttest_global: K >= 2");
            if (n_per < 2)
                throw std::invalid_argument(
                    "ttest_global: need at least 2 observations");
            break;
    }
}

GeneratorSpec gauss_equicorr(int K, double rho, double mu) {
    GeneratorSpec g;
    g.kind = GeneratorSpec::Kind::gauss_equicorr;
    g.K = K;
    g.rho = rho;
    g.mu = mu;
    g.validate();
    return g;
}

GeneratorSpec mixture_toy(bool under_alternative) {
    GeneratorSpec g;
    g.kind = GeneratorSpec::Kind::mixture_toy;
    g.K = 3;
    g.under_alternative = under_alternative;
    return g;
}

GeneratorSpec antithetic_pair(bool under_alternative) {
    GeneratorSpec g;
    g.kind = GeneratorSpec::Kind::antithetic_pair;
    g.K = 2;
    g.under_alternative = under_alternative;
    return g;
}

GeneratorSpec common_control(double mu, Ordering ordering, std::vector<int> n,
                             int n0) {
    GeneratorSpec g;
    g.kind = GeneratorSpec::Kind::common_control;
    if (n.empty())
        for (int i = 1; i <= 10; ++i) n.push_back(10 * i);
    g.n = std::move(n);
    g.K = static_cast<int>(g.n.size());
    g.n0 = n0;
    g.mu = mu;
    g.ordering = ordering;
    g.validate();
    return g;
}

GeneratorSpec ttest_global(double mu, Ordering ordering, int K, int n_per) {
    GeneratorSpec g;
    g.kind = GeneratorSpec::Kind::ttest_global;
    g.K = K;
    g.n_per = n_per;
    g.mu = mu;
    g.ordering = ordering;
    g.validate();
    return g;
}

PVec generate(const GeneratorSpec& g, std::uint64_t seed,
              std::uint64_t replication) {
    rng::Stream noise(seed, replication, kNoiseRole);
    std::vector<double> p;
    std::vector<double> stat;
    switch (g.kind) {
        case GeneratorSpec::Kind::gauss_equicorr: {
            const double z = noise.normal();
            const double resid = std::sqrt(1.0 - g.rho * g.rho);
            p.reserve(g.K);
            for (int k = 0; k < g.K; ++k) {
                const double x = g.rho * z + resid * noise.normal() - g.mu;
                p.push_back(stats::norm_cdf(x));
            }
            break;
        }
        case GeneratorSpec::Kind::mixture_toy: {
            const bool iid = noise.uniform() < 0.9;
            if (iid) {
                for (int k = 0; k < 3; ++k)
                    p.push_back(beta_or_uniform(noise.uniform(), g));
            } else {
                const double v = beta_or_uniform(noise.uniform(), g);
                p.assign(3, v);
            }
            break;
        }
        case GeneratorSpec::Kind::antithetic_pair: {
            const double v = beta_or_uniform(noise.uniform(), g);
            p = {v, 1.0 - v};
            break;
        }
        case GeneratorSpec::Kind::common_control: {
            const double xbar0 =
                noise.normal() + std::sqrt(static_cast<double>(g.n0)) * g.mu;
            p.reserve(g.n.size());
            stat.reserve(g.n.size());
            for (int nk : g.n) {
                const double xbark =
                    noise.normal() +
                    std::sqrt(static_cast<double>(nk)) * g.mu;
                const double t = (xbark + xbar0) / std::sqrt(2.0);
                p.push_back(2.0 * stats::norm_cdf(-std::fabs(t)));
                stat.push_back(static_cast<double>(nk));
            }
            break;
        }
        case GeneratorSpec::Kind::ttest_global: {
            const int n = g.n_per;
            std::vector<double> xs(n);
            p.reserve(g.K);
            stat.reserve(g.K);
            for (int k = 1; k <= g.K; ++k) {
                const double shift = static_cast<double>(k) * g.mu;
                double sum = 0.0, sumsq = 0.0;
                for (int i = 0; i < n; ++i) {
                    xs[i] = noise.normal() + shift;
                    sum += xs[i];
                    sumsq += xs[i] * xs[i];
                }
                const double xbar = sum / n;
                double ss = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double d = xs[i] - xbar;
                    ss += d * d;
                }
                const double sd = std::sqrt(ss / (n - 1));
                const double t = std::sqrt(static_cast<double>(n)) * xbar / sd;
                p.push_back(2.0 * stats::t_cdf(-std::fabs(t),
                                               static_cast<double>(n - 1)));
                stat.push_back(sumsq);
            }
            break;
        }
    }
    if (!stat.empty()) reorder(p, stat, g.ordering, seed, replication);
    return PVec::from(std::move(p));
}

double fisher_combination(const PVec& p) {
    long double s = 0.0L;
    for (double v : p) s += std::log(v);
    const double t = -2.0 * static_cast<double>(s);
    if (!std::isfinite(t)) return t > 0 ? 0.0 : 1.0;
    return 1.0 - stats::chi2_cdf(t, 2.0 * static_cast<double>(p.size()));
}

double simes_combination(const PVec& p) {
    std::vector<double> s(p.begin(), p.end());
    std::stable_sort(s.begin(), s.end());
    const double K = static_cast<double>(s.size());
    double best = 1.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        best = std::min(best, K * s[k] / static_cast<double>(k + 1));
    return std::min(best, 1.0);
}

namespace {

struct RuleEval {
    RuleSpec spec;
    bool baseline = false;
    bool randomized = false;
};

double eval_one(const RuleEval& re, const PVec& p, rng::Stream* ustream) {
    if (re.baseline)
        return re.spec.family == Family::fisher ? fisher_combination(p)
                                                : simes_combination(p);
    if (re.randomized) {
        const RandSource src =
            RandSource::explicit_u_value(ustream->uniform());
        return rules::apply(re.spec, p, &src).value;
    }
    return rules::apply(re.spec, p, nullptr).value;
}

}  // namespace

std::vector<MCReport> mc_grid(const std::vector<RuleSpec>& rules,
                              const GeneratorSpec& g,
                              const std::vector<double>& alphas,
                              std::int64_t reps, std::uint64_t seed,
                              int threads) {
    g.validate();
    if (rules.empty()) throw std::invalid_argument("mc_grid: no rules");
    if (alphas.empty()) throw std::invalid_argument("mc_grid: no alphas");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("mc_grid: alpha must lie in (0, 1)");
    if (reps < 1) throw std::invalid_argument("mc_grid: reps must be >= 1");

    std::vector<RuleEval> evals;
    evals.reserve(rules.size());
    bool any_rand = false;
    for (const RuleSpec& spec : rules) {
        RuleEval re;
        re.spec = spec;
        re.baseline = spec.family == Family::fisher ||
                      spec.family == Family::simes;
        re.randomized = !re.baseline &&
                        (spec.mode == Mode::randomized ||
                         spec.mode == Mode::exchangeable_randomized);
        any_rand = any_rand || re.randomized;
        evals.push_back(std::move(re));
    }

    const std::size_t nr = evals.size();
    const std::size_t na = alphas.size();
    auto run_block = [&](std::int64_t lo, std::int64_t hi,
                         std::vector<std::int64_t>& counts) {
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            const PVec p = generate(g, seed, static_cast<std::uint64_t>(rep));
            std::optional<rng::Stream> us;
            if (any_rand)
                us.emplace(seed, static_cast<std::uint64_t>(rep),
                           kUniformRole);
            for (std::size_t i = 0; i < nr; ++i) {
                const double v = eval_one(evals[i], p, us ? &*us : nullptr);
                for (std::size_t j = 0; j < na; ++j)
                    counts[i * na + j] += v <= alphas[j] ? 1 : 0;
            }
        }
    };

    int T = threads > 0
                ? threads
                : static_cast<int>(std::thread::hardware_concurrency());
    T = std::max(1, std::min<int>({T, 64, static_cast<int>(
                                              std::min<std::int64_t>(
                                                  reps, 64))}));
    std::vector<std::int64_t> counts(nr * na, 0);
    if (T == 1) {
        run_block(0, reps, counts);
    } else {
        std::vector<std::vector<std::int64_t>> partial(
            T, std::vector<std::int64_t>(nr * na, 0));
        std::vector<std::thread> pool;
        const std::int64_t chunk = (reps + T - 1) / T;
        for (int t = 0; t < T; ++t) {
            const std::int64_t lo = t * chunk;
            const std::int64_t hi = std::min<std::int64_t>(reps, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(
                [&run_block, lo, hi, &partial, t] { run_block(lo, hi, partial[t]); });
        }
        for (auto& th : pool) th.join();
        for (const auto& part : partial)
            for (std::size_t i = 0; i < counts.size(); ++i)
                counts[i] += part[i];
    }

    std::vector<MCReport> out;
    out.reserve(nr * na);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            MCReport r;
            r.rule = evals[i].spec;
            r.generator = g;
            r.alpha = alphas[j];
            r.reps = reps;
            r.rejections = counts[i * na + j];
            r.rate = static_cast<double>(r.rejections) /
                     static_cast<double>(reps);
            r.se = std::sqrt(r.rate * (1.0 - r.rate) /
                             static_cast<double>(reps));
            r.seed = seed;
            out.push_back(std::move(r));
        }
    }
    return out;
}

MCReport mc_rejection(const RuleSpec& rule, const GeneratorSpec& g,
                      double alpha, std::int64_t reps, std::uint64_t seed) {
    return mc_grid({rule}, g, {alpha}, reps, seed).front();
}

std::vector<MCReport> power_curve(const std::vector<RuleSpec>& rules,
                                  GeneratorSpec g,
                                  const std::vector<double>& mu_grid,
                                  double alpha, std::int64_t reps,
                                  std::uint64_t seed, int threads) {
    std::vector<MCReport> out;
    out.reserve(mu_grid.size() * rules.size());
    for (double mu : mu_grid) {
        g.mu = mu;
        auto rows = mc_grid(rules, g, {alpha}, reps, seed, threads);
        out.insert(out.end(), std::make_move_iterator(rows.begin()),
                   std::make_move_iterator(rows.end()));
    }
    return out;
}

void write_csv(std::ostream& os, const std::vector<MCReport>& rows) {
    os << "mu,rho,rule,variant,alpha,reps,rate,se,seed\n";
    for (const MCReport& r : rows) {
        os << fmt17(r.generator.mu) << ',' << fmt17(r.generator.rho) << ','
           << rules::base_name(r.rule) << ',' << rules::variant_name(r.rule)
           << ',' << fmt17(r.alpha) << ',' << r.reps << ',' << fmt17(r.rate)
           << ',' << fmt17(r.se) << ',' << r.seed << '\n';
    }
}

void write_json(std::ostream& os, const std::vector<MCReport>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const MCReport& r : rows) {
        nlohmann::json row;
        row["mu"] = r.generator.mu;
        row["rho"] = r.generator.rho;
        row["rule"] = rules::base_name(r.rule);
        row["variant"] = rules::variant_name(r.rule);
        row["alpha"] = r.alpha;
        row["reps"] = r.reps;
        row["rejections"] = r.rejections;
        row["rate"] = r.rate;
        row["se"] = r.se;
        row["seed"] = r.seed;
        row["generator"] = r.generator.name();
        arr.push_back(std::move(row));
    }
    os << arr.dump(2) << '\n';
}

}  // namespace pmerge::sim
