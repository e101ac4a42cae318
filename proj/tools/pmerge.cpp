// Command-line front end: combine p-values from arguments/files/stdin, run
// Monte Carlo simulations, or run the validation suite.
//
// Exit codes: 0 success, 1 validation/runtime failure, 2 usage error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmerge/calibrator.hpp"
#include "pmerge/merge_batch.hpp"
#include "pmerge/merge_exchangeable.hpp"
#include "pmerge/merge_randomized.hpp"
#include "pmerge/rng.hpp"
#include "pmerge/rules.hpp"
#include "pmerge/simgen.hpp"
#include "pmerge/types.hpp"

namespace {

using namespace pmerge;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<std::string> split_any(const std::string& text,
                                   const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (seps.find(c) != std::string::npos) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double parse_double(const std::string& tok, const char* what) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw std::invalid_argument(std::string("cannot parse ") + what +
                                    ": '" + tok + "'");
    return v;
}

std::vector<double> parse_doubles(const std::string& text, const char* what,
                                  const std::string& seps = " \t\r\n,") {
    std::vector<double> out;
    for (const std::string& tok : split_any(text, seps))
        out.push_back(parse_double(tok, what));
    return out;
}

PVec pvec_from_tokens(const std::vector<double>& vals) {
    PVec p = PVec::from(vals);
    if (p.clamped_count() > 0)
        std::cerr << "warning: clamped " << p.clamped_count()
                  << " p-value(s) > 1 to 1\n";
    return p;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PMERGE_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
        std::cerr << "warning: ignoring unparseable PMERGE_SEED\n";
    }
    return 1;
}

const char* method_token(Method m) {
    switch (m) {
        case Method::closed_form:
            return "closed_form";
        case Method::bisection:
            return "bisection";
        case Method::breakpoint_exact:
            return "breakpoint_exact";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "closed") return Method::closed_form;
    if (s == "bisect") return Method::bisection;
    if (s == "exact") return Method::breakpoint_exact;
    throw std::invalid_argument("unknown method (closed|bisect|exact): " + s);
}

sim::Ordering parse_ordering(const std::string& s) {
    if (s == "as_given") return sim::Ordering::as_given;
    if (s == "asc" || s == "by_n_asc" || s == "by_S2_asc" ||
        s == "by_stat_asc")
        return sim::Ordering::by_stat_asc;
    if (s == "desc" || s == "by_n_desc" || s == "by_S2_desc" ||
        s == "by_stat_desc")
        return sim::Ordering::by_stat_desc;
    if (s == "random") return sim::Ordering::random;
    throw std::invalid_argument("unknown ordering: " + s);
}

// "name[:variant][:k=2][:r=-1][:K=10][:lambda=0|0.25|1]" with the ex_/u_/
// u_ex_ prefixes selecting the mode.
RuleSpec parse_rule_token(const std::string& token) {
    const auto parts = split_any(token, ":");
    if (parts.empty()) throw std::invalid_argument("empty rule token");
    RuleSpec spec;
    std::string base = parts[0];
    if (base.rfind("u_ex_", 0) == 0) {
        spec.mode = Mode::exchangeable_randomized;
        base = base.substr(5);
    } else if (base.rfind("ex_", 0) == 0) {
        spec.mode = Mode::exchangeable;
        base = base.substr(3);
    } else if (base.rfind("u_", 0) == 0) {
        spec.mode = Mode::randomized;
        base = base.substr(2);
    }
    spec.family = rules::parse_family(base);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string& part = parts[i];
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            spec.variant = rules::parse_variant(part);
            continue;
        }
        const std::string key = part.substr(0, eq);
        const std::string val = part.substr(eq + 1);
        if (key == "k")
            spec.k = static_cast<int>(parse_double(val, "k"));
        else if (key == "r")
            spec.r = parse_double(val, "r");
        else if (key == "K")
            spec.fixed_K = static_cast<int>(parse_double(val, "K"));
        else if (key == "lambda")
            spec.lambda = parse_doubles(val, "lambda", "|");
        else
            throw std::invalid_argument("unknown rule parameter: " + key);
    }
    return spec;
}

std::string read_all(std::istream& is) {
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") return read_all(std::cin);
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open input: " + path);
    return read_all(f);
}

struct CombineCfg {
    std::string rule = "average";
    std::string variant = "preset";
    int k = 0;
    double r = 1.0;
    std::string lambda;
    int fixed_K = 0;
    bool exchangeable = false;
    bool randomized = false;
    double u = -1.0;
    bool u_given = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string u_source;
    bool assume_first_independent = false;
    std::string method = "bisect";
    int iters = 50;
    bool stream = false;
    std::string input;
    std::vector<std::string> tokens;
};

void print_merged(const MergedP& m, std::size_t K) {
    std::cout << "{\n"
              << "  \"rule\": \"" << m.rule.name() << "\",\n"
              << "  \"K\": " << K << ",\n"
              << "  \"value\": " << fmt17(m.value) << ",\n"
              << "  \"method\": \"" << method_token(m.method) << "\",\n"
              << "  \"error_bound\": " << fmt17(m.error_bound);
    if (m.realized_u)
        std::cout << ",\n  \"realized_u\": " << fmt17(*m.realized_u);
    std::cout << "\n}\n";
}

int run_combine(const CombineCfg& cfg) {
    RuleSpec spec = parse_rule_token(cfg.rule);
    if (cfg.variant != "preset")
        spec.variant = rules::parse_variant(cfg.variant);
    if (cfg.k != 0) spec.k = cfg.k;
    if (cfg.r != 1.0) spec.r = cfg.r;
    if (cfg.fixed_K != 0) spec.fixed_K = cfg.fixed_K;
    if (!cfg.lambda.empty())
        spec.lambda = parse_doubles(cfg.lambda, "lambda", " \t,|");
    const bool ex_flag = cfg.exchangeable ||
                         spec.mode == Mode::exchangeable ||
                         spec.mode == Mode::exchangeable_randomized;
    const bool rand_flag = cfg.randomized || spec.mode == Mode::randomized ||
                           spec.mode == Mode::exchangeable_randomized ||
                           cfg.u_given || cfg.seed_given ||
                           !cfg.u_source.empty();
    if (ex_flag && rand_flag)
        spec.mode = Mode::exchangeable_randomized;
    else if (ex_flag)
        spec.mode = Mode::exchangeable;
    else if (rand_flag)
        spec.mode = Mode::randomized;

    rules::ApplyOptions opts;
    opts.method = parse_method(cfg.method);
    opts.iters = cfg.iters;

    if (cfg.stream) {
        if (rand_flag)
            throw std::invalid_argument(
                "--stream supports the exchangeable rules only");
        spec.mode = Mode::exchangeable;
        ex::Stream stream(spec);
        std::istringstream text(read_input(cfg.input));
        std::string line;
        while (std::getline(text, line)) {
            for (const std::string& tok : split_any(line, " \t\r,")) {
                double v = parse_double(tok, "p-value");
                if (!(v >= 0.0))
                    throw std::invalid_argument(
                        "p-value must be a number >= 0");
                if (v > 1.0) {
                    std::cerr << "warning: clamped p-value > 1 to 1\n";
                    v = 1.0;
                }
                stream.push(v);
                std::cout << fmt17(stream.current().value) << '\n';
            }
        }
        return 0;
    }

    std::string text;
    for (const std::string& tok : cfg.tokens) {
        text += tok;
        text += ' ';
    }
    if (text.empty()) text = read_input(cfg.input);
    const PVec p = pvec_from_tokens(parse_doubles(text, "p-value"));
    if (p.empty()) throw std::invalid_argument("no p-values supplied");

    std::optional<RandSource> src;
    if (spec.mode == Mode::randomized ||
        spec.mode == Mode::exchangeable_randomized) {
        if (cfg.u_given && cfg.seed_given)
            throw std::invalid_argument("--u and --seed are exclusive");
        if (cfg.u_source == "first_pvalue") {
            src = RandSource::first_pvalue(cfg.assume_first_independent);
        } else if (cfg.u_given || cfg.u_source == "explicit") {
            if (!cfg.u_given)
                throw std::invalid_argument("--u-source=explicit needs --u");
            src = RandSource::explicit_u_value(cfg.u);
        } else {
            src = RandSource::seeded(cfg.seed_given ? cfg.seed
                                                    : default_seed());
        }
    }
    const MergedP m =
        rules::apply(spec, p, src ? &*src : nullptr, opts);
    print_merged(m, p.size());
    return 0;
}

struct SimCfg {
    std::string generator = "gauss_equicorr";
    int K = 0;
    double rho = 0.0;
    double mu = 0.0;
    std::string mu_grid;
    std::string rules = "average,bonferroni";
    std::string alphas = "0.05";
    long long reps = 2000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string format = "csv";
    std::string ordering = "as_given";
    bool alt = false;
    std::string n;
    int n0 = 25;
    int n_per = 10;
    int threads = 0;
    std::string out;
    std::string config;
};

void apply_manifest(SimCfg& cfg, const std::string& path,
                    const std::map<std::string, std::size_t>& given) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' ||
                                 line.back() == '\t'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line = line.substr(start);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        const auto it = given.find(key);
        if (it != given.end() && it->second > 0) continue;  // flag wins
        if (key == "generator")
            cfg.generator = val;
        else if (key == "K")
            cfg.K = static_cast<int>(parse_double(val, "K"));
        else if (key == "rho")
            cfg.rho = parse_double(val, "rho");
        else if (key == "mu")
            cfg.mu = parse_double(val, "mu");
        else if (key == "mu_grid")
            cfg.mu_grid = val;
        else if (key == "rules")
            cfg.rules = val;
        else if (key == "alpha" || key == "alphas")
            cfg.alphas = val;
        else if (key == "reps")
            cfg.reps = static_cast<long long>(parse_double(val, "reps"));
        else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(
                std::strtoull(val.c_str(), nullptr, 10));
            cfg.seed_given = true;
        } else if (key == "format")
            cfg.format = val;
        else if (key == "ordering")
            cfg.ordering = val;
        else if (key == "alt")
            cfg.alt = val == "1" || val == "true" || val == "yes";
        else if (key == "n")
            cfg.n = val;
        else if (key == "n0")
            cfg.n0 = static_cast<int>(parse_double(val, "n0"));
        else if (key == "n_per")
            cfg.n_per = static_cast<int>(parse_double(val, "n_per"));
        else if (key == "threads")
            cfg.threads = static_cast<int>(parse_double(val, "threads"));
        else if (key == "out")
            cfg.out = val;
        else
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
    }
}

std::vector<double> parse_grid(const std::string& text) {
    // "lo:hi:count" or a comma-separated list
    const auto colon = split_any(text, ":");
    if (colon.size() == 3) {
        const double lo = parse_double(colon[0], "mu_grid");
        const double hi = parse_double(colon[1], "mu_grid");
        const int count = static_cast<int>(parse_double(colon[2], "mu_grid"));
        if (count < 2 || hi < lo)
            throw std::invalid_argument("mu_grid: expected lo:hi:count");
        std::vector<double> grid(count);
        for (int i = 0; i < count; ++i)
            grid[i] = lo + (hi - lo) * i / (count - 1);
        return grid;
    }
    return parse_doubles(text, "mu_grid");
}

int run_simulate(SimCfg& cfg,
                 const std::map<std::string, std::size_t>& given) {
    if (!cfg.config.empty()) apply_manifest(cfg, cfg.config, given);
    if (!cfg.seed_given) cfg.seed = default_seed();

    const sim::Ordering ord = parse_ordering(cfg.ordering);
    sim::GeneratorSpec g;
    if (cfg.generator == "gauss_equicorr") {
        g = sim::gauss_equicorr(cfg.K > 0 ? cfg.K : 100, cfg.rho, cfg.mu);
    } else if (cfg.generator == "mixture_toy") {
        g = sim::mixture_toy(cfg.alt);
    } else if (cfg.generator == "antithetic_pair") {
        g = sim::antithetic_pair(cfg.alt);
    } else if (cfg.generator == "common_control") {
        std::vector<int> n;
        for (double v : parse_doubles(cfg.n, "n")) {
            n.push_back(static_cast<int>(v));
        }
        g = sim::common_control(cfg.mu, ord, std::move(n), cfg.n0);
    } else if (cfg.generator == "ttest_global") {
        g = sim::ttest_global(cfg.mu, ord, cfg.K > 0 ? cfg.K : 20, cfg.n_per);
    } else {
        throw std::invalid_argument("unknown generator: " + cfg.generator);
    }

    std::vector<RuleSpec> rule_list;
    for (const std::string& tok : split_any(cfg.rules, ", "))
        rule_list.push_back(parse_rule_token(tok));
    if (rule_list.empty()) throw std::invalid_argument("no rules given");

    std::vector<sim::MCReport> rows;
    if (!cfg.mu_grid.empty()) {
        const std::vector<double> grid = parse_grid(cfg.mu_grid);
        const std::vector<double> alphas =
            parse_doubles(cfg.alphas, "alpha");
        if (alphas.size() != 1)
            throw std::invalid_argument(
                "mu_grid runs need exactly one alpha");
        rows = sim::power_curve(rule_list, g, grid, alphas[0], cfg.reps,
                                cfg.seed, cfg.threads);
    } else {
        rows = sim::mc_grid(rule_list, g, parse_doubles(cfg.alphas, "alpha"),
                            cfg.reps, cfg.seed, cfg.threads);
    }

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!cfg.out.empty()) {
        file.open(cfg.out);
        if (!file) throw std::invalid_argument("cannot open out: " + cfg.out);
        os = &file;
    }
    if (cfg.format == "csv")
        sim::write_csv(*os, rows);
    else if (cfg.format == "json")
        sim::write_json(*os, rows);
    else
        throw std::invalid_argument("unknown format (csv|json): " +
                                    cfg.format);
    return 0;
}

int run_validate(int grid_size) {
    int failures = 0;
    auto report = [&failures](bool ok, const std::string& label,
                              const std::string& detail = "") {
        std::cout << (ok ? "PASS " : "FAIL ") << label;
        if (!ok && !detail.empty()) std::cout << "  [" << detail << "]";
        std::cout << '\n';
        if (!ok) ++failures;
    };

    std::vector<cal::CalibratorSpec> specs;
    for (int K : {2, 5, 10, 50}) {
        {
            cal::CalibratorSpec cs;
            cs.family = cal::CalFamily::ruger_indicator;
            cs.K = K;
            cs.k = (K + 1) / 2;
            specs.push_back(cs);
            cs.k = 1;
            specs.push_back(cs);
        }
        for (cal::CalFamily fam :
             {cal::CalFamily::grid_harmonic, cal::CalFamily::arithmetic,
              cal::CalFamily::harmonic, cal::CalFamily::geometric}) {
            cal::CalibratorSpec cs;
            cs.family = fam;
            cs.K = K;
            specs.push_back(cs);
        }
        for (double r : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0}) {
            cal::CalibratorSpec cs;
            cs.family = cal::CalFamily::generalized_mean;
            cs.K = K;
            cs.r = r;
            specs.push_back(cs);
        }
        {
            cal::CalibratorSpec cs;
            cs.family = cal::CalFamily::generalized_grid;
            cs.K = K;
            cs.lambda = {0.0, 0.25, 0.5, 0.75, 1.0};
            specs.push_back(cs);
        }
    }
    for (const auto& cs : specs) {
        const cal::ValidationReport rep = cal::validate(cs, grid_size);
        std::ostringstream label;
        label << "calibrator family=" << static_cast<int>(cs.family)
              << " K=" << cs.K << " k=" << cs.k << " r=" << cs.r;
        report(rep.pass, label.str(), rep.message);
        const double closed = cal::integral(cs);
        const double quad = cal::integral_quadrature(cs);
        report(std::fabs(closed - quad) <= 1e-8,
               label.str() + " integral closed vs quadrature",
               "closed=" + fmt17(closed) + " quad=" + fmt17(quad));
    }

    // merge-rule spot suite
    rng::Stream gen(2024, 0, 0);
    bool u1_ok = true, dom_ok = true, stream_ok = true;
    for (int trial = 0; trial < 25 && (u1_ok || dom_ok); ++trial) {
        std::vector<double> vals(7);
        for (double& v : vals) v = gen.uniform();
        const PVec p = PVec::from(vals);
        const RandSource one = RandSource::explicit_u_value(1.0);
        u1_ok = u1_ok &&
                rand::ua(p, one, Variant::simple).value ==
                    batch::twice_average(p).value &&
                rand::uh(p, one, Variant::tight).value ==
                    batch::harmonic(p, true).value &&
                rand::ug(p, one, Variant::simple).value ==
                    batch::geometric(p, false).value &&
                rand::u_hommel(p, one).value ==
                    batch::hommel(p, true).value;
        const double tight = ex::ex_average(p, Variant::tight).value;
        const double simple = ex::ex_average(p, Variant::simple).value;
        dom_ok = dom_ok && tight <= simple &&
                 simple <= batch::twice_average(p).value;
    }
    report(u1_ok, "u = 1 reductions reproduce the deterministic rules");
    report(dom_ok, "exchangeable average chain tight <= simple <= batch");

    {
        RuleSpec spec;
        spec.family = Family::average;
        spec.mode = Mode::exchangeable;
        spec.variant = Variant::tight;
        ex::Stream stream(spec);
        std::vector<double> vals{0.3, 0.1, 0.8, 0.5};
        for (double v : vals) stream.push(v);
        stream_ok = stream.current().value ==
                    ex::ex_average(PVec::from(vals), Variant::tight).value;
        report(stream_ok, "stream equals batch exchangeable evaluation");
    }

    std::cout << (failures == 0 ? "VALIDATION PASSED" : "VALIDATION FAILED")
              << " (" << failures << " failure(s))\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-value combination under arbitrary dependence, "
                 "exchangeability, and external randomization"};
    app.require_subcommand(1);

    CombineCfg ccfg;
    CLI::App* combine =
        app.add_subcommand("combine", "merge p-values into one p-value");
    combine->add_option("--rule", ccfg.rule,
                        "rule name (average, bonferroni, ruger, hommel, "
                        "generalized_hommel, harmonic, geometric, "
                        "generalized_mean), ex_/u_ prefixes allowed");
    combine->add_option("--variant", ccfg.variant,
                        "plain|improved|classical|exact|simple|tight|wang");
    combine->add_option("--k", ccfg.k, "order statistic index (0 = ceil(K/2))");
    combine->add_option("--r", ccfg.r, "generalized mean exponent");
    combine->add_option("--lambda", ccfg.lambda,
                        "generalized hommel quantile grid, e.g. 0,0.25,1");
    combine->add_option("--fixed-K", ccfg.fixed_K,
                        "pin K-dependent constants to this K");
    combine->add_flag("--exchangeable", ccfg.exchangeable,
                      "use the exchangeable (sequential) form");
    combine->add_flag("--randomized", ccfg.randomized,
                      "use the uniformly-randomized form");
    CLI::Option* uopt =
        combine->add_option("--u", ccfg.u, "explicit uniform in [0, 1]");
    uopt->each([&ccfg](const std::string&) { ccfg.u_given = true; });
    CLI::Option* sopt =
        combine->add_option("--seed", ccfg.seed,
                            "seed for a reproducible uniform draw");
    sopt->each([&ccfg](const std::string&) { ccfg.seed_given = true; });
    uopt->excludes(sopt);
    combine->add_option("--u-source", ccfg.u_source,
                        "explicit|seeded|first_pvalue");
    combine->add_flag("--assume-first-independent",
                      ccfg.assume_first_independent,
                      "assert p_1 is independent of p_2..p_K "
                      "(required by --u-source=first_pvalue)");
    combine->add_option("--method", ccfg.method, "closed|bisect|exact");
    combine->add_option("--iters", ccfg.iters, "bisection iterations")
        ->check(CLI::PositiveNumber);
    combine->add_flag("--stream", ccfg.stream,
                      "read one p per line, print the running value");
    combine->add_option("--input", ccfg.input, "input file ('-' = stdin)");
    combine->add_option("pvalues", ccfg.tokens,
                        "p-values (whitespace/comma separated)");

    SimCfg scfg;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo rejection rates");
    std::map<std::string, std::size_t> given;
    CLI::Option* o;
    o = simulate->add_option("--generator", scfg.generator,
                             "gauss_equicorr|mixture_toy|antithetic_pair|"
                             "common_control|ttest_global");
    auto track = [&given](CLI::Option* opt, const char* key) {
        opt->each([&given, key](const std::string&) { ++given[key]; });
    };
    track(o, "generator");
    track(simulate->add_option("--K", scfg.K, "number of p-values"), "K");
    track(simulate->add_option("--rho", scfg.rho, "equicorrelation"), "rho");
    track(simulate->add_option("--mu", scfg.mu, "signal strength"), "mu");
    track(simulate->add_option("--mu-grid", scfg.mu_grid,
                               "lo:hi:count or comma list; runs power_curve"),
          "mu_grid");
    track(simulate->add_option("--rules", scfg.rules,
                               "comma list of rule tokens, e.g. "
                               "bonferroni,ex_average:tight,u_hommel"),
          "rules");
    track(simulate->add_option("--alpha", scfg.alphas,
                               "rejection threshold(s), comma list"),
          "alpha");
    track(simulate->add_option("--reps", scfg.reps, "replications"), "reps");
    CLI::Option* seed_opt =
        simulate->add_option("--seed", scfg.seed, "simulation seed");
    seed_opt->each([&scfg, &given](const std::string&) {
        scfg.seed_given = true;
        ++given["seed"];
    });
    track(simulate->add_option("--format", scfg.format, "csv|json"),
          "format");
    track(simulate->add_option("--ordering", scfg.ordering,
                               "as_given|asc|desc|random"),
          "ordering");
    CLI::Option* alt_opt = simulate->add_flag(
        "--alt", scfg.alt, "draw from the alternative distribution");
    track(alt_opt, "alt");
    track(simulate->add_option("--n", scfg.n,
                               "common_control sample sizes, comma list"),
          "n");
    track(simulate->add_option("--n0", scfg.n0,
                               "common_control control sample size"),
          "n0");
    track(simulate->add_option("--n-per", scfg.n_per,
                               "ttest_global observations per study"),
          "n_per");
    track(simulate->add_option("--threads", scfg.threads,
                               "worker threads (0 = auto)"),
          "threads");
    track(simulate->add_option("--out", scfg.out, "output file"), "out");
    simulate->add_option("--config", scfg.config,
                         "key=value manifest file; flags override it");

    int grid_size = 20000;
    CLI::App* validate =
        app.add_subcommand("validate", "calibrator and invariant checks");
    validate->add_option("--grid-size", grid_size,
                         "points per calibrator grid check")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (combine->parsed()) return run_combine(ccfg);
        if (simulate->parsed()) return run_simulate(scfg, given);
        if (validate->parsed()) return run_validate(grid_size);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
