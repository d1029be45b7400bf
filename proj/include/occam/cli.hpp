#pragma once

// Command-line front end. run_cli() parses arguments, dispatches to one
// subcommand and returns the process exit status:
//   0 success, 2 user or input error, 1 internal or I/O error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bounds.hpp"
#include "error.hpp"
#include "io.hpp"
#include "multitest.hpp"
#include "priors.hpp"
#include "sharpness.hpp"
#include "simulate.hpp"

namespace occam::cli {

using io::Json;

namespace detail {

inline bool starts_with(const std::string& s, const std::string& prefix)
{
    return s.rfind(prefix, 0) == 0;
}

inline std::size_t parse_count(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size() && v >= 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::Parse, what + ": expected a non-negative integer, got '" + text + "'");
}

inline double parse_real(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::Parse, what + ": expected a number, got '" + text + "'");
}

/// by | uniform | dirac:a | custom:FILE
inline SizePrior make_size_prior(const std::string& spec, std::size_t m)
{
    if (spec == "by") return size_prior_by(m);
    if (spec == "uniform") return size_prior_uniform(m);
    if (starts_with(spec, "dirac:")) return size_prior_dirac(parse_count(spec.substr(6), "--size-prior dirac"), m);
    if (starts_with(spec, "custom:")) return io::load_file(spec.substr(7), io::load_size_prior_csv, m);
    throw Error(ErrorKind::InvalidParameter, "unknown size prior '" + spec + "'");
}

/// uniform | column | custom:FILE
inline ComplexityPrior make_complexity_prior(const std::string& spec, const io::ParsedPool& parsed)
{
    if (spec == "uniform") return complexity_prior_uniform(parsed.pool.size());
    if (spec == "column") {
        OCCAM_REQUIRE(parsed.prior.has_value(), ErrorKind::InvalidParameter,
                      "--complexity-prior column needs a weight column in the input");
        return *parsed.prior;
    }
    if (starts_with(spec, "custom:"))
        return io::load_file(spec.substr(7), io::load_complexity_prior_csv, parsed.pool);
    throw Error(ErrorKind::InvalidParameter, "unknown complexity prior '" + spec + "'");
}

/// uniform01 | power:N | table:FILE
inline ContinuousPrior make_continuous_prior(const std::string& spec)
{
    if (spec == "uniform01") return continuous_prior_uniform01();
    if (starts_with(spec, "power:"))
        return continuous_prior_power(static_cast<int>(parse_count(spec.substr(6), "power prior")));
    if (starts_with(spec, "table:")) return io::load_file(spec.substr(6), io::load_table_prior_csv);
    throw Error(ErrorKind::InvalidParameter, "unknown continuous prior '" + spec + "'");
}

/// random-top-k | top-k:K | softmax:T | uniform
inline DensityRule make_rule(const std::string& spec)
{
    if (spec == "random-top-k") return random_top_k_rule();
    if (spec == "uniform") return uniform_rule();
    if (starts_with(spec, "top-k:")) return top_k_rule(parse_count(spec.substr(6), "top-k rule"));
    if (starts_with(spec, "softmax:")) return softmax_rule(parse_real(spec.substr(8), "softmax rule"));
    throw Error(ErrorKind::InvalidParameter, "unknown density rule '" + spec + "'");
}

// Flag value if given, else scenario-file value if present, else fallback.
template <class T>
T pick(const CLI::Option* flag, const T& flag_value, const Json& scenario, const char* key, const T& fallback)
{
    if (flag != nullptr && flag->count() > 0) return flag_value;
    if (scenario.contains(key)) return scenario.at(key).get<T>();
    return fallback;
}

inline Json load_scenario(const std::string& path)
{
    if (path.empty()) return Json::object();
    auto in = io::detail::open_input(path);
    try {
        Json j = Json::parse(in);
        OCCAM_REQUIRE(j.is_object(), ErrorKind::Parse, path + ": scenario must be a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
}

} // namespace detail

/// Common output options.
struct OutputOptions {
    std::string format = "json";
    std::string output;
};

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Occam's hammer toolkit: prior-weighted step-up testing, randomized classifier bounds, "
                 "and Monte Carlo checks"};
    app.name("occam");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    OutputOptions o;
    auto add_output = [&](CLI::App* sub, bool csv) {
        if (csv)
            sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--output", o.output, "Report path (default: standard output)");
    };

    // adjust ----------------------------------------------------------------
    auto* adjust = app.add_subcommand("adjust", "Run a step-up procedure on a p-value CSV");
    std::string input, procedure = "hammer", size_spec = "by", complexity_spec = "uniform";
    double alpha = 0.05;
    adjust->add_option("--input", input, "CSV with header hypothesis_id,p_value[,weight][,is_null]")->required();
    adjust->add_option("--alpha", alpha, "Target level in [0,1]");
    adjust->add_option("--procedure", procedure, "hammer | by | bh | bonferroni")
        ->check(CLI::IsMember({"hammer", "by", "bh", "bonferroni"}));
    adjust->add_option("--size-prior", size_spec, "by | uniform | dirac:A | custom:FILE (index,weight)");
    adjust->add_option("--complexity-prior", complexity_spec,
                       "uniform | column | custom:FILE (hypothesis_id,weight)");
    add_output(adjust, true);

    // classifier-bound --------------------------------------------------------
    auto* bound = app.add_subcommand("classifier-bound", "Randomized classifier error bound as JSON");
    std::int64_t n = 100;
    double delta = 0.05, theta = 1.0, emp_error = 0.0;
    bound->add_option("--n", n, "Sample size (>= 2)")->default_str("")->required();
    bound->add_option("--delta", delta, "Confidence parameter in (0,1]")->default_str("")->required();
    bound->add_option("--theta", theta, "Output density at the drawn classifier");
    bound->add_option("--emp-error", emp_error, "Empirical error in [0,1]")->default_str("")->required();
    add_output(bound, false);

    // sharpness -------------------------------------------------------------
    auto* sharp = app.add_subcommand("sharpness", "Simulate the tightness construction on the circle");
    SharpnessConfig sc;
    std::string nu_spec = "uniform01", trials_csv;
    std::uint64_t seed = default_seed;
    unsigned workers = 0;
    sharp->add_option("--alpha0", sc.alpha0, "Level alpha0 in (0,1)");
    sharp->add_option("--nu", nu_spec, "uniform01 | power:N | table:FILE (x,weight)");
    sharp->add_option("--grid-n", sc.grid_n, "Circle grid points (>= 100)");
    sharp->add_option("--trials", sc.trials, "Number of trials");
    sharp->add_option("--seed", seed, "Master seed");
    sharp->add_option("--workers", workers, "Worker threads (0 = all cores)");
    sharp->add_option("--trials-csv", trials_csv, "Per-trial CSV (trial,x,u,set_size,fpr,degenerate)");
    add_output(sharp, false);

    // simulate-fdr ----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate-fdr", "Monte Carlo FDR of a procedure on Gaussian scenarios");
    ScenarioSpec spec;
    std::string scenario_path, sim_procedure = "hammer", sim_size = "by";
    double sim_alpha = 0.1;
    CLI::Option* f_m = sim->add_option("--m", spec.m, "Number of hypotheses");
    CLI::Option* f_m0 = sim->add_option("--m0", spec.m0, "Number of true nulls");
    CLI::Option* f_effect = sim->add_option("--effect", spec.effect, "Mean shift of alternatives");
    CLI::Option* f_rho = sim->add_option("--rho", spec.rho, "Equicorrelation, 0 = independent");
    CLI::Option* f_alpha = sim->add_option("--alpha", sim_alpha, "Target level");
    CLI::Option* f_proc = sim->add_option("--procedure", sim_procedure, "hammer | bh | by")
                              ->check(CLI::IsMember({"hammer", "bh", "by"}));
    CLI::Option* f_size = sim->add_option("--size-prior", sim_size, "by | uniform | dirac:A | custom:FILE");
    CLI::Option* f_trials = sim->add_option("--trials", spec.trials, "Number of trials");
    CLI::Option* f_seed = sim->add_option("--seed", spec.seed, "Master seed");
    sim->add_option("--workers", spec.workers, "Worker threads (0 = all cores)");
    sim->add_option("--scenario", scenario_path, "JSON scenario file; flags override its values");
    add_output(sim, true);

    // validate --------------------------------------------------------------
    auto* val = app.add_subcommand("validate", "Monte Carlo check of one guarantee");
    std::string check, rule_spec, val_size = "by", val_scenario;
    ScenarioSpec vspec;
    std::size_t a = 5, classifiers = 50;
    double vdelta = 0.0, err_lo = 0.1, err_hi = 0.5;
    std::int64_t vn = 100;
    val->add_option("--check", check, "constant-volume | hammer-joint | classifier")
        ->required()
        ->check(CLI::IsMember({"constant-volume", "hammer-joint", "classifier"}));
    CLI::Option* v_m = val->add_option("--m", vspec.m, "Pool size (default 50 / 100)")->default_str("");
    CLI::Option* v_m0 = val->add_option("--m0", vspec.m0, "True nulls (default m)")->default_str("");
    CLI::Option* v_effect = val->add_option("--effect", vspec.effect, "Mean shift of alternatives");
    CLI::Option* v_rho = val->add_option("--rho", vspec.rho, "Equicorrelation");
    CLI::Option* v_trials = val->add_option("--trials", vspec.trials, "Number of trials");
    CLI::Option* v_seed = val->add_option("--seed", vspec.seed, "Master seed");
    CLI::Option* v_delta = val->add_option("--delta", vdelta, "Confidence budget (default 0.1 / 0.05 / 0.05)")->default_str("");
    CLI::Option* v_a = val->add_option("--a", a, "constant-volume: output size");
    CLI::Option* v_rule = val->add_option(
        "--rule", rule_spec, "hammer-joint: random-top-k | top-k:K | softmax:T | uniform; classifier: softmax-n | ...");
    CLI::Option* v_size = val->add_option(
        "--size-prior", val_size, "hammer-joint: by | uniform | dirac:A | custom:FILE | uniform01 | power:N");
    CLI::Option* v_n = val->add_option("--n", vn, "classifier: sample size");
    CLI::Option* v_cls = val->add_option("--classifiers", classifiers, "classifier: number of classifiers");
    CLI::Option* v_lo = val->add_option("--err-lo", err_lo, "classifier: smallest true error");
    CLI::Option* v_hi = val->add_option("--err-hi", err_hi, "classifier: largest true error");
    val->add_option("--workers", vspec.workers, "Worker threads (0 = all cores)");
    val->add_option("--scenario", val_scenario, "JSON scenario file; flags override its values");
    add_output(val, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (adjust->parsed()) {
            const auto parsed = io::parse_pvalue_csv(input);
            const auto& pool = parsed.pool;
            StepUpResult result;
            if (procedure == "by") {
                result = by_baseline(pool, alpha);
            } else if (procedure == "bh") {
                result = bh_baseline(pool, alpha);
            } else {
                const auto pi = detail::make_complexity_prior(complexity_spec, parsed);
                if (procedure == "bonferroni") {
                    result = bonferroni_weighted(pool, pi, alpha);
                } else {
                    result = step_up(pool, pi, detail::make_size_prior(size_spec, pool.size()), alpha);
                }
            }
            const std::string text = o.format == "csv" ? io::to_csv(result, pool) : io::dump(io::to_json(result, pool));
            io::emit_report(text, o.output, out);
        } else if (bound->parsed()) {
            io::emit_report(io::dump(io::to_json(classifier_bound_report(n, delta, theta, emp_error))), o.output, out);
        } else if (sharp->parsed()) {
            sc.nu = detail::make_continuous_prior(nu_spec);
            sc.seed = seed;
            sc.workers = workers;
            const auto summary = estimate(sc);
            Json j;
            j["alpha0"] = io::num12(sc.alpha0);
            j["nu"] = sc.nu.label();
            j["grid_n"] = sc.grid_n;
            j["seed"] = sc.seed;
            j["summary"] = io::to_json(summary);
            io::emit_report(io::dump(j), o.output, out);
            if (!trials_csv.empty()) io::emit_report(io::trials_csv(summary), trials_csv, out);
        } else if (sim->parsed()) {
            const Json file = detail::load_scenario(scenario_path);
            ScenarioSpec s = spec;
            s.m = detail::pick(f_m, spec.m, file, "m", ScenarioSpec{}.m);
            s.m0 = detail::pick(f_m0, spec.m0, file, "m0", ScenarioSpec{}.m0);
            s.effect = detail::pick(f_effect, spec.effect, file, "effect", ScenarioSpec{}.effect);
            s.rho = detail::pick(f_rho, spec.rho, file, "rho", ScenarioSpec{}.rho);
            s.trials = detail::pick(f_trials, spec.trials, file, "trials", ScenarioSpec{}.trials);
            s.seed = detail::pick(f_seed, spec.seed, file, "seed", ScenarioSpec{}.seed);
            const double a_level = detail::pick(f_alpha, sim_alpha, file, "alpha", 0.1);
            const std::string proc = detail::pick(f_proc, sim_procedure, file, "procedure", std::string("hammer"));
            const std::string size = detail::pick(f_size, sim_size, file, "size_prior", std::string("by"));
            validate(s);

            Procedure chosen = BhProcedure{};
            std::optional<double> guarantee;
            if (proc == "hammer") {
                chosen = HammerProcedure{complexity_prior_uniform(s.m), detail::make_size_prior(size, s.m)};
                guarantee = static_cast<double>(s.m0) / static_cast<double>(s.m) * a_level;
            } else if (proc == "by") {
                chosen = ByProcedure{};
                guarantee = static_cast<double>(s.m0) / static_cast<double>(s.m) * a_level;
            } else if (proc != "bh") {
                throw Error(ErrorKind::InvalidParameter, "unknown procedure '" + proc + "'");
            }
            const auto est = estimate_fdr(chosen, s, a_level);
            if (o.format == "csv") {
                io::emit_report(io::to_csv(est), o.output, out);
            } else {
                Json j;
                j["procedure"] = proc;
                j["size_prior"] = proc == "hammer" ? size : std::string();
                j["scenario"] = {{"m", s.m},        {"m0", s.m0},       {"effect", io::num12(s.effect)},
                                 {"rho", io::num12(s.rho)}, {"alpha", io::num12(a_level)}};
                j["estimate"] = io::to_json(est);
                j["fdr_bound"] = guarantee ? io::num12(*guarantee) : Json(nullptr);
                io::emit_report(io::dump(j), o.output, out);
            }
        } else if (val->parsed()) {
            const Json file = detail::load_scenario(val_scenario);
            ScenarioSpec s = vspec;
            const bool constant = check == "constant-volume";
            const std::size_t default_m = constant ? 50 : 100;
            s.m = detail::pick(v_m, vspec.m, file, "m", default_m);
            s.m0 = detail::pick(v_m0, vspec.m0, file, "m0", s.m);
            s.effect = detail::pick(v_effect, vspec.effect, file, "effect", ScenarioSpec{}.effect);
            s.rho = detail::pick(v_rho, vspec.rho, file, "rho", 0.0);
            s.trials = detail::pick(v_trials, vspec.trials, file, "trials", std::size_t{10000});
            s.seed = detail::pick(v_seed, vspec.seed, file, "seed", default_seed);
            const double d = detail::pick(v_delta, vdelta, file, "delta", constant ? 0.1 : 0.05);

            McEstimate est;
            Json params;
            if (constant) {
                const std::size_t size_a = detail::pick(v_a, a, file, "a", std::size_t{5});
                est = validate_constant_volume(s, size_a, complexity_prior_uniform(s.m), d);
                params = {{"m", s.m}, {"m0", s.m0}, {"a", size_a}};
            } else if (check == "hammer-joint") {
                const std::string r = detail::pick(v_rule, rule_spec, file, "rule", std::string("random-top-k"));
                const std::string sp = detail::pick(v_size, val_size, file, "size_prior", std::string("by"));
                validate(s);
                const InverseDensityPrior prior = (sp == "uniform01" || detail::starts_with(sp, "power:") ||
                                                   detail::starts_with(sp, "table:"))
                                                      ? InverseDensityPrior(detail::make_continuous_prior(sp))
                                                      : InverseDensityPrior(detail::make_size_prior(sp, s.m));
                est = validate_hammer_joint(s, detail::make_rule(r), complexity_prior_uniform(s.m), prior, d);
                params = {{"m", s.m}, {"m0", s.m0}, {"rule", r}, {"size_prior", sp}};
            } else {
                ClassifierCoverageSpec c;
                c.n = detail::pick(v_n, vn, file, "n", std::int64_t{100});
                const std::size_t count = detail::pick(v_cls, classifiers, file, "classifiers", std::size_t{50});
                const double lo = detail::pick(v_lo, err_lo, file, "err_lo", 0.1);
                const double hi = detail::pick(v_hi, err_hi, file, "err_hi", 0.5);
                OCCAM_REQUIRE(count >= 1, ErrorKind::InvalidParameter, "--classifiers must be >= 1");
                c.true_errors = equispaced_errors(count, lo, hi);
                c.delta = d;
                c.trials = s.trials;
                c.seed = s.seed;
                c.workers = s.workers;
                const std::string r = detail::pick(v_rule, rule_spec, file, "rule", std::string("softmax-n"));
                const DensityRule rule =
                    r == "softmax-n" ? softmax_rule(1.0 / static_cast<double>(c.n)) : detail::make_rule(r);
                est = validate_classifier_coverage(c, rule);
                params = {{"n", c.n}, {"classifiers", count}, {"err_lo", io::num12(lo)}, {"err_hi", io::num12(hi)},
                          {"rule", r}};
            }
            Json j;
            j["check"] = check;
            j["delta"] = io::num12(d);
            j["parameters"] = params;
            j["estimate"] = io::to_json(est);
            j["bound_plus_3se"] = io::num12(d + 3.0 * est.std_error);
            j["pass"] = est.within(d);
            io::emit_report(io::dump(j), o.output, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Io ? 1 : 2;
    } catch (const nlohmann::json::exception& e) {
        err << "error: scenario: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace occam::cli
