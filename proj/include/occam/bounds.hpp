#pragma once

// Scalar machinery for the randomized-classifier bound: one-sided Bernoulli
// KL divergence, its upper inversion, the Chernoff bad event, binomial tail
// inversion, and the assembled report. Logarithms are natural throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "error.hpp"
#include "stats.hpp"

namespace occam {

inline constexpr double kl_infinity = std::numeric_limits<double>::infinity();

namespace detail {

// x log(x / y) with 0 log 0 = 0.
inline double xlogx_over(double x, double y) noexcept
{
    if (x == 0.0) return 0.0;
    if (y == 0.0) return kl_infinity;
    return x * std::log(x / y);
}

inline void check_unit(double v, const char* name)
{
    OCCAM_REQUIRE(v >= 0.0 && v <= 1.0, ErrorKind::Domain, std::string(name) + " must lie in [0,1]");
}

} // namespace detail

/// D+(q||p) = q log(q/p) + (1-q) log((1-q)/(1-p)) if q < p, else 0.
/// Saturates to kl_infinity at p = 1, q < 1.
inline double kl_bernoulli_plus(double q, double p)
{
    detail::check_unit(q, "q");
    detail::check_unit(p, "p");
    if (q >= p) return 0.0;
    return detail::xlogx_over(q, p) + detail::xlogx_over(1.0 - q, 1.0 - p);
}

/// sup{p in [q,1] : D+(q||p) <= budget}.
inline double kl_upper_inverse(double q, double budget)
{
    detail::check_unit(q, "q");
    OCCAM_REQUIRE(budget >= 0.0 && !std::isnan(budget), ErrorKind::Domain, "budget must be non-negative");
    if (budget == 0.0 || q == 1.0) return q;
    if (kl_bernoulli_plus(q, 1.0) <= budget) return 1.0;
    return bisect_last_true(q, 1.0, [&](double p) { return kl_bernoulli_plus(q, p) <= budget; });
}

/// log(n/delta)/n + log+(theta)/(n-1).
inline double hammer_classifier_budget(std::int64_t n, double delta, double theta_value)
{
    OCCAM_REQUIRE(n >= 2, ErrorKind::InvalidParameter, "sample size n must be >= 2");
    OCCAM_REQUIRE(delta > 0.0 && delta <= 1.0, ErrorKind::InvalidParameter, "delta must lie in (0,1]");
    OCCAM_REQUIRE(theta_value >= 0.0, ErrorKind::InvalidParameter, "theta must be non-negative");
    const double nd = static_cast<double>(n);
    const double log_plus = theta_value > 1.0 ? std::log(theta_value) : 0.0;
    return std::log(nd / delta) / nd + log_plus / (nd - 1.0);
}

/// True iff the sample fell in the Chernoff bad event D+(emp||truth) > log(1/delta)/n.
/// delta = 0 has an empty bad event.
inline bool chernoff_violation(double empirical, double truth, std::int64_t n, double delta)
{
    OCCAM_REQUIRE(n >= 1, ErrorKind::InvalidParameter, "sample size n must be >= 1");
    OCCAM_REQUIRE(delta >= 0.0 && delta <= 1.0, ErrorKind::InvalidParameter, "delta must lie in [0,1]");
    if (delta == 0.0) return false;
    return kl_bernoulli_plus(empirical, truth) > std::log(1.0 / delta) / static_cast<double>(n);
}

/// log P(Binomial(n, p) <= k), by an incremental log-pmf recursion and log-sum-exp.
inline double binomial_log_cdf(std::int64_t k, std::int64_t n, double p)
{
    OCCAM_REQUIRE(n >= 0 && k >= 0 && k <= n, ErrorKind::Domain, "need 0 <= k <= n");
    if (k == n || p <= 0.0) return 0.0;
    if (p >= 1.0) return -kl_infinity;
    const double log_odds = std::log(p) - std::log1p(-p);
    double log_pmf = static_cast<double>(n) * std::log1p(-p); // i = 0
    double max_term = log_pmf;
    // first pass for the max, second for the sum, keeps the recursion exact-order
    for (std::int64_t i = 0; i < k; ++i) {
        log_pmf += std::log(static_cast<double>(n - i) / static_cast<double>(i + 1)) + log_odds;
        max_term = std::max(max_term, log_pmf);
    }
    log_pmf = static_cast<double>(n) * std::log1p(-p);
    CompensatedSum acc;
    acc.add(std::exp(log_pmf - max_term));
    for (std::int64_t i = 0; i < k; ++i) {
        log_pmf += std::log(static_cast<double>(n - i) / static_cast<double>(i + 1)) + log_odds;
        acc.add(std::exp(log_pmf - max_term));
    }
    return std::min(0.0, max_term + std::log(acc.value()));
}

/// sup{p : P(Binomial(n,p) <= k) >= delta}.
inline double binomial_tail_inverse(std::int64_t k, std::int64_t n, double delta)
{
    OCCAM_REQUIRE(n >= 1 && k >= 0 && k <= n, ErrorKind::Domain, "need 0 <= k <= n and n >= 1");
    OCCAM_REQUIRE(delta > 0.0 && delta < 1.0, ErrorKind::Domain, "delta must lie in (0,1)");
    if (k == n) return 1.0;
    const double log_delta = std::log(delta);
    return bisect_last_true(0.0, 1.0, [&](double p) { return binomial_log_cdf(k, n, p) >= log_delta; });
}

struct ClassifierBoundReport {
    std::int64_t n = 0;
    double delta = 0.0;
    double theta_value = 0.0;
    double kl_budget = 0.0;
    double empirical_error = 0.0;
    double upper_error_bound = 0.0;
};

/// Upper bound on the true error of the drawn classifier, holding with
/// probability 1 - delta over the sample and the draw.
inline ClassifierBoundReport classifier_bound_report(std::int64_t n, double delta, double theta_value,
                                                     double empirical_error)
{
    detail::check_unit(empirical_error, "empirical error");
    ClassifierBoundReport r;
    r.n = n;
    r.delta = delta;
    r.theta_value = theta_value;
    r.empirical_error = empirical_error;
    r.kl_budget = hammer_classifier_budget(n, delta, theta_value);
    r.upper_error_bound = kl_upper_inverse(empirical_error, r.kl_budget);
    return r;
}

} // namespace occam
