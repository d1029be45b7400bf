#pragma once

// Monte Carlo harnesses for the probabilistic guarantees: FDR of step-up
// procedures, expected FPR of constant-volume outputs, the joint bound for
// density-returning algorithms, and coverage of the classifier bound.
//
// Every trial draws from its own generator seeded by derive_seed(master, t);
// per-trial results are stored by index and reduced in index order, so an
// estimate is bit-identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bounds.hpp"
#include "error.hpp"
#include "multitest.hpp"
#include "priors.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace occam {

/// One-sided Gaussian testing scenario: m statistics, the first m0 are true
/// nulls (mean 0) and the rest are shifted by `effect`. rho = 0 is the
/// independent case; rho != 0 is exchangeable equicorrelation.
struct ScenarioSpec {
    std::size_t m = 100;
    std::size_t m0 = 80;
    double effect = 3.0;
    double rho = 0.0;
    std::size_t trials = 10000;
    std::uint64_t seed = default_seed;
    unsigned workers = 0; // 0 = hardware concurrency
};

struct McEstimate {
    std::size_t trials = 0;
    std::size_t events = 0; // trials with a nonzero per-trial value
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;

    /// value <= bound + sigmas * std_error
    bool within(double bound, double sigmas = 3.0) const noexcept { return value <= bound + sigmas * std_error; }
};

/// Smallest admissible negative equicorrelation is -1/(m-1) + this margin.
inline constexpr double negative_rho_margin = 1e-6;

inline double effective_rho(const ScenarioSpec& spec)
{
    OCCAM_REQUIRE(spec.rho < 1.0 && spec.rho > -1.0, ErrorKind::InvalidCorrelation, "rho must lie in (-1/(m-1), 1)");
    if (spec.rho >= 0.0 || spec.m <= 1) return spec.m <= 1 ? 0.0 : spec.rho;
    const double floor_rho = -1.0 / static_cast<double>(spec.m - 1);
    OCCAM_REQUIRE(spec.rho > floor_rho, ErrorKind::InvalidCorrelation,
                  "negative rho below -1/(m-1) is not a valid equicorrelation");
    return std::max(spec.rho, floor_rho + negative_rho_margin);
}

inline void validate(const ScenarioSpec& spec)
{
    OCCAM_REQUIRE(spec.m >= 1, ErrorKind::InvalidPoolSize, "scenario needs m >= 1");
    OCCAM_REQUIRE(spec.m0 <= spec.m, ErrorKind::InvalidParameter, "m0 must not exceed m");
    OCCAM_REQUIRE(std::isfinite(spec.effect), ErrorKind::InvalidParameter, "effect must be finite");
    effective_rho(spec);
}

/// Draws one pool of one-sided p-values for the scenario.
///
/// Noise is Z_i = eps_i (rho = 0), sqrt(rho) W + sqrt(1-rho) eps_i (rho > 0),
/// or c (eps_i - lambda * mean(eps)) (rho < 0) with lambda and c chosen so that
/// every pair has correlation rho and unit variance.
inline HypothesisPool generate_pvalues(const ScenarioSpec& spec, std::uint64_t trial_seed)
{
    validate(spec);
    const double rho = effective_rho(spec);
    const std::size_t m = spec.m;
    Rng rng(trial_seed);
    std::vector<double> z(m);
    for (double& e : z) e = rng.normal();

    if (rho > 0.0) {
        const double w = rng.normal();
        const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
        for (double& e : z) e = a * w + b * e;
    } else if (rho < 0.0) {
        const double md = static_cast<double>(m);
        const double s = rho * md / (1.0 - rho); // lambda^2 - 2 lambda, in [-1, 0)
        const double lambda = 1.0 - std::sqrt(1.0 + s);
        const double c = std::sqrt(md / (md + s));
        CompensatedSum total;
        for (double e : z) total.add(e);
        const double mean = total.value() / md;
        for (double& e : z) e = c * (e - lambda * mean);
    }

    std::vector<std::string> ids(m);
    std::vector<double> p(m);
    std::vector<bool> nulls(m);
    for (std::size_t i = 0; i < m; ++i) {
        ids[i] = "h" + std::to_string(i + 1);
        nulls[i] = i < spec.m0;
        const double stat = nulls[i] ? z[i] : z[i] + spec.effect;
        p[i] = normal_upper_tail(stat);
    }
    return HypothesisPool(std::move(ids), std::move(p), std::move(nulls));
}

namespace detail {

inline McEstimate summarize(std::span<const double> values, std::uint64_t seed)
{
    McEstimate e;
    e.trials = values.size();
    e.seed = seed;
    if (values.empty()) return e;
    CompensatedSum sum;
    for (double v : values) {
        sum.add(v);
        if (v != 0.0) ++e.events;
    }
    const double n = static_cast<double>(values.size());
    e.value = sum.value() / n;
    CompensatedSum sq;
    for (double v : values) sq.add((v - e.value) * (v - e.value));
    e.std_error = std::sqrt(sq.value() / n / n);
    return e;
}

// Independent stream for the algorithm's own randomness within a trial.
constexpr std::uint64_t algorithm_seed(std::uint64_t trial_seed) noexcept
{
    return splitmix64(trial_seed ^ 0xA5A5A5A55A5A5A5AULL);
}

} // namespace detail

struct HammerProcedure {
    ComplexityPrior pi;
    SizePrior gamma;
};
struct BhProcedure {};
struct ByProcedure {};
using Procedure = std::variant<HammerProcedure, BhProcedure, ByProcedure>;

inline StepUpResult apply(const Procedure& procedure, const HypothesisPool& pool, double alpha)
{
    return std::visit(
        [&](const auto& p) -> StepUpResult {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, HammerProcedure>)
                return step_up(pool, p.pi, p.gamma, alpha);
            else if constexpr (std::is_same_v<P, BhProcedure>)
                return bh_baseline(pool, alpha);
            else
                return by_baseline(pool, alpha);
        },
        procedure);
}

/// Mean realized FDP of `procedure` over the scenario's trials.
inline McEstimate estimate_fdr(const Procedure& procedure, const ScenarioSpec& spec, double alpha)
{
    validate(spec);
    const auto fdp = run_indexed<double>(spec.trials, spec.workers, [&](std::size_t t) {
        const auto pool = generate_pvalues(spec, derive_seed(spec.seed, t));
        return realized_fdp(apply(procedure, pool, alpha), pool);
    });
    return detail::summarize(fdp, spec.seed);
}

/// Expected FPR of the rule "return the a smallest p-values" with level
/// function min(delta * a * pi(h), 1); bad events are p_h <= level on true nulls.
inline McEstimate validate_constant_volume(const ScenarioSpec& spec, std::size_t a, const ComplexityPrior& pi,
                                           double delta)
{
    validate(spec);
    OCCAM_REQUIRE(a >= 1 && a <= spec.m, ErrorKind::InvalidSize, "output size a must lie in 1..m");
    OCCAM_REQUIRE(pi.size() == spec.m, ErrorKind::Dimension, "complexity prior not sized for the scenario");
    OCCAM_REQUIRE(delta >= 0.0 && delta <= 1.0, ErrorKind::InvalidParameter, "delta must lie in [0,1]");
    const double ad = static_cast<double>(a);
    const auto fpr = run_indexed<double>(spec.trials, spec.workers, [&](std::size_t t) {
        const auto pool = generate_pvalues(spec, derive_seed(spec.seed, t));
        const auto order = detail::order_by_p(pool);
        const auto& nulls = *pool.null_mask();
        std::size_t bad = 0;
        for (std::size_t j = 0; j < a; ++j) {
            const std::size_t h = order[j];
            if (nulls[h] && rejects(pool.p(h), level_function(delta, pi[h], ad))) ++bad;
        }
        return static_cast<double>(bad) / ad;
    });
    return detail::summarize(fpr, spec.seed);
}

/// Algorithm output as a probability density over the pool w.r.t. counting
/// measure (non-negative, sums to 1). May use the supplied generator.
using DensityRule = std::function<std::vector<double>(std::span<const double> scores, Rng& rng)>;

/// Uniform density on the k smallest scores (ties by index).
inline DensityRule top_k_rule(std::size_t k)
{
    OCCAM_REQUIRE(k >= 1, ErrorKind::InvalidSize, "top-k rule needs k >= 1");
    return [k](std::span<const double> scores, Rng&) {
        OCCAM_REQUIRE(k <= scores.size(), ErrorKind::InvalidSize, "top-k rule: k exceeds pool size");
        std::vector<std::size_t> order(scores.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
        std::vector<double> theta(scores.size(), 0.0);
        for (std::size_t j = 0; j < k; ++j) theta[order[j]] = 1.0 / static_cast<double>(k);
        return theta;
    };
}

/// Top-k with k drawn uniformly from {1..m} in every trial.
inline DensityRule random_top_k_rule()
{
    return [](std::span<const double> scores, Rng& rng) {
        const auto k = static_cast<std::size_t>(rng.uniform_int(1, scores.size()));
        return top_k_rule(k)(scores, rng);
    };
}

/// theta(h) proportional to exp(-score_h / temperature).
inline DensityRule softmax_rule(double temperature)
{
    OCCAM_REQUIRE(temperature > 0.0, ErrorKind::InvalidParameter, "softmax temperature must be positive");
    return [temperature](std::span<const double> scores, Rng&) {
        std::vector<double> theta(scores.size());
        const double lo = *std::min_element(scores.begin(), scores.end());
        CompensatedSum z;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            theta[i] = std::exp(-(scores[i] - lo) / temperature);
            z.add(theta[i]);
        }
        const double total = z.value();
        for (double& t : theta) t /= total;
        return theta;
    };
}

/// Uniform density over the whole pool.
inline DensityRule uniform_rule()
{
    return [](std::span<const double> scores, Rng&) {
        return std::vector<double>(scores.size(), 1.0 / static_cast<double>(scores.size()));
    };
}

namespace detail {

inline void check_density(std::span<const double> theta, std::size_t m)
{
    OCCAM_REQUIRE(theta.size() == m, ErrorKind::InvalidDensity, "density has wrong length");
    CompensatedSum s;
    for (double t : theta) {
        OCCAM_REQUIRE(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidDensity, "density has a negative entry");
        s.add(t);
    }
    OCCAM_REQUIRE(std::fabs(s.value() - 1.0) <= 1e-9, ErrorKind::InvalidDensity, "density does not sum to 1");
}

// Index drawn from theta, skipping zero-mass entries.
inline std::size_t draw_index(std::span<const double> theta, Rng& rng)
{
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (theta[i] <= 0.0) continue;
        last_positive = i;
        cum += theta[i];
        if (u < cum) return i;
    }
    return last_positive;
}

} // namespace detail

/// Size prior (beta evaluated at floor of the inverse density) or continuous prior.
using InverseDensityPrior = std::variant<SizePrior, ContinuousPrior>;

inline double beta_at_inverse_density(const InverseDensityPrior& prior, double inverse_density)
{
    return std::visit(
        [&](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SizePrior>)
                return p.beta_at(inverse_density);
            else
                return p.beta(inverse_density);
        },
        prior);
}

/// Frequency of the joint bad event over (X, h ~ theta_X): X falls in the bad
/// event of h at level min(delta * pi(h) * beta(1/theta_X(h)), 1).
inline McEstimate validate_hammer_joint(const ScenarioSpec& spec, const DensityRule& rule, const ComplexityPrior& pi,
                                        const InverseDensityPrior& prior, double delta)
{
    validate(spec);
    OCCAM_REQUIRE(pi.size() == spec.m, ErrorKind::Dimension, "complexity prior not sized for the scenario");
    OCCAM_REQUIRE(delta >= 0.0 && delta <= 1.0, ErrorKind::InvalidParameter, "delta must lie in [0,1]");
    const auto hits = run_indexed<double>(spec.trials, spec.workers, [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(spec.seed, t);
        const auto pool = generate_pvalues(spec, seed);
        Rng rng(detail::algorithm_seed(seed));
        const auto theta = rule(pool.p_values(), rng);
        detail::check_density(theta, pool.size());
        const std::size_t h = detail::draw_index(theta, rng);
        const double level = level_function(delta, pi[h], beta_at_inverse_density(prior, 1.0 / theta[h]));
        return ((*pool.null_mask())[h] && rejects(pool.p(h), level)) ? 1.0 : 0.0;
    });
    return detail::summarize(hits, spec.seed);
}

struct ClassifierCoverageSpec {
    std::int64_t n = 100;
    double delta = 0.05;
    std::vector<double> true_errors; // one per classifier
    std::size_t trials = 10000;
    std::uint64_t seed = default_seed;
    unsigned workers = 0;
};

/// Default classifier set: `count` true error rates equispaced in [lo, hi].
inline std::vector<double> equispaced_errors(std::size_t count, double lo, double hi)
{
    std::vector<double> e(count);
    for (std::size_t i = 0; i < count; ++i)
        e[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return e;
}

/// Frequency with which the drawn classifier violates the randomized
/// classifier bound. `rule` maps empirical errors to weights summing to 1;
/// theta w.r.t. the uniform reference probability is count * weight.
inline McEstimate validate_classifier_coverage(const ClassifierCoverageSpec& spec, const DensityRule& rule)
{
    OCCAM_REQUIRE(!spec.true_errors.empty(), ErrorKind::InvalidParameter, "classifier set is empty");
    for (double e : spec.true_errors)
        OCCAM_REQUIRE(e >= 0.0 && e <= 1.0, ErrorKind::InvalidParameter, "true error outside [0,1]");
    hammer_classifier_budget(spec.n, spec.delta, 1.0); // validates n and delta
    const std::size_t count = spec.true_errors.size();
    const double nd = static_cast<double>(spec.n);
    const auto hits = run_indexed<double>(spec.trials, spec.workers, [&](std::size_t t) {
        Rng rng(derive_seed(spec.seed, t));
        std::vector<double> empirical(count);
        for (std::size_t c = 0; c < count; ++c) {
            std::int64_t errors = 0;
            for (std::int64_t j = 0; j < spec.n; ++j) errors += rng.bernoulli(spec.true_errors[c]) ? 1 : 0;
            empirical[c] = static_cast<double>(errors) / nd;
        }
        const auto weights = rule(empirical, rng);
        detail::check_density(weights, count);
        const std::size_t h = detail::draw_index(weights, rng);
        const double theta = static_cast<double>(count) * weights[h];
        const double budget = hammer_classifier_budget(spec.n, spec.delta, theta);
        return kl_bernoulli_plus(empirical[h], spec.true_errors[h]) > budget ? 1.0 : 0.0;
    });
    return detail::summarize(hits, spec.seed);
}

/// Frequency of the Chernoff bad event for one fixed Bernoulli(p) classifier.
inline McEstimate validate_chernoff_coverage(std::int64_t n, double delta, double p, std::size_t trials,
                                             std::uint64_t seed, unsigned workers = 0)
{
    const double nd = static_cast<double>(n);
    const auto hits = run_indexed<double>(trials, workers, [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        std::int64_t errors = 0;
        for (std::int64_t j = 0; j < n; ++j) errors += rng.bernoulli(p) ? 1 : 0;
        return chernoff_violation(static_cast<double>(errors) / nd, p, n, delta) ? 1.0 : 0.0;
    });
    return detail::summarize(hits, seed);
}

} // namespace occam
