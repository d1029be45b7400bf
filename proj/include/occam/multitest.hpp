#pragma once

// Generalized step-up procedure driven by a complexity prior and a size prior,
// the BY / BH / weighted-Bonferroni baselines, a brute-force evaluation of the
// set supremum, and false-discovery accounting.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "priors.hpp"

namespace occam {

/// Finite pool of hypotheses with observed p-values. `null_mask[i]` is the
/// ground truth "hypothesis i is a true null" and is only known in simulation.
class HypothesisPool {
public:
    HypothesisPool() = default;

    HypothesisPool(std::vector<std::string> ids, std::vector<double> p_values,
                   std::optional<std::vector<bool>> null_mask = std::nullopt)
        : ids_(std::move(ids)), p_(std::move(p_values)), null_mask_(std::move(null_mask))
    {
        OCCAM_REQUIRE(ids_.size() == p_.size(), ErrorKind::Dimension, "ids and p-values differ in length");
        OCCAM_REQUIRE(!null_mask_ || null_mask_->size() == p_.size(), ErrorKind::Dimension,
                      "null mask and p-values differ in length");
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            OCCAM_REQUIRE(p_[i] >= 0.0 && p_[i] <= 1.0, ErrorKind::Validation,
                          "p-value of '" + ids_[i] + "' outside [0,1]");
            OCCAM_REQUIRE(seen.insert(ids_[i]).second, ErrorKind::Duplicate, "duplicate hypothesis id '" + ids_[i] + "'");
        }
    }

    std::size_t size() const noexcept { return p_.size(); }
    bool empty() const noexcept { return p_.empty(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const double> p_values() const noexcept { return p_; }
    double p(std::size_t i) const { return p_[i]; }
    bool has_ground_truth() const noexcept { return null_mask_.has_value(); }
    const std::optional<std::vector<bool>>& null_mask() const noexcept { return null_mask_; }

private:
    std::vector<std::string> ids_;
    std::vector<double> p_;
    std::optional<std::vector<bool>> null_mask_;
};

struct StepUpResult {
    std::vector<std::size_t> rejected; // pool indices, ascending
    std::size_t k_star = 0;
    std::vector<double> thresholds;    // per hypothesis, at k_star
    double alpha = 0.0;
    std::string procedure;             // e.g. "hammer", "by", "bh"
    std::string prior_spec;            // kappa or size-prior description

    std::vector<std::string> rejected_ids(const HypothesisPool& pool) const
    {
        std::vector<std::string> out;
        out.reserve(rejected.size());
        for (std::size_t i : rejected) out.push_back(pool.ids()[i]);
        return out;
    }
};

/// Level-`level` test on a p-value. Level 0 never rejects, matching the
/// convention that the bad event at level 0 is empty.
constexpr bool rejects(double p, double level) noexcept
{
    return level > 0.0 && p <= level;
}

namespace detail {

inline void check_alpha(double alpha)
{
    OCCAM_REQUIRE(alpha >= 0.0 && alpha <= 1.0, ErrorKind::InvalidParameter, "alpha must lie in [0,1]");
}

inline void check_dims(const HypothesisPool& pool, const ComplexityPrior& pi, const SizePrior& gamma)
{
    OCCAM_REQUIRE(pi.size() == pool.size() && gamma.size() == pool.size(), ErrorKind::Dimension,
                  "priors are not sized for the pool (m=" + std::to_string(pool.size()) + ")");
}

inline StepUpResult finish(const HypothesisPool& pool, const ComplexityPrior& pi, const SizePrior& gamma,
                           double alpha, std::size_t k_star)
{
    StepUpResult r;
    r.alpha = alpha;
    r.k_star = k_star;
    r.procedure = "hammer";
    r.prior_spec = gamma.label();
    r.thresholds.resize(pool.size());
    const double b = gamma.beta(k_star);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        r.thresholds[i] = alpha * pi[i] * b;
        if (rejects(pool.p(i), r.thresholds[i])) r.rejected.push_back(i);
    }
    return r;
}

// Indices sorted by p-value, ties by index.
inline StepUpResult empty_result(double alpha, const SizePrior& gamma)
{
    StepUpResult r;
    r.alpha = alpha;
    r.procedure = "hammer";
    r.prior_spec = gamma.label();
    return r;
}

inline std::vector<std::size_t> order_by_p(const HypothesisPool& pool)
{
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pool.p(a) < pool.p(b); });
    return order;
}

// Sorted-order step-up with threshold(k) for k = 1..m; rejects the k* smallest.
template <class Threshold>
StepUpResult sorted_step_up(const HypothesisPool& pool, double alpha, Threshold threshold, std::string name,
                            std::string spec)
{
    const auto order = order_by_p(pool);
    const std::size_t m = pool.size();
    std::size_t k_star = 0;
    for (std::size_t k = m; k >= 1; --k) {
        if (rejects(pool.p(order[k - 1]), threshold(k))) {
            k_star = k;
            break;
        }
    }
    StepUpResult r;
    r.alpha = alpha;
    r.k_star = k_star;
    r.procedure = std::move(name);
    r.prior_spec = std::move(spec);
    r.thresholds.assign(m, k_star == 0 ? 0.0 : threshold(k_star));
    r.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_star));
    std::sort(r.rejected.begin(), r.rejected.end());
    return r;
}

} // namespace detail

/// Step-up procedure: with S_k = {h : p_h <= alpha * pi(h) * beta(k)},
/// k* = max{k : |S_k| >= k} (0 if none) and the rejected set is S_{k*},
/// which is the largest G with every member of G passing at level
/// alpha * pi(h) * beta(|G|).
inline StepUpResult step_up(const HypothesisPool& pool, const ComplexityPrior& pi, const SizePrior& gamma,
                            double alpha)
{
    detail::check_alpha(alpha);
    if (pool.empty()) return detail::empty_result(alpha, gamma);
    detail::check_dims(pool, pi, gamma);
    const std::size_t m = pool.size();

    std::size_t k_star = 0;
    if (pi.is_uniform()) {
        std::vector<double> sorted(pool.p_values().begin(), pool.p_values().end());
        std::sort(sorted.begin(), sorted.end());
        const double w = pi[0];
        for (std::size_t k = m; k >= 1; --k) {
            const double level = alpha * w * gamma.beta(k);
            if (level <= 0.0) break; // beta is nondecreasing, so smaller k cannot pass either
            const auto f = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), level) - sorted.begin());
            if (f >= k) {
                k_star = k;
                break;
            }
        }
    } else {
        // nonuniform pi breaks the sorted-threshold trick; count S_k directly
        for (std::size_t k = m; k >= 1; --k) {
            const double b = gamma.beta(k);
            std::size_t f = 0;
            for (std::size_t i = 0; i < m; ++i)
                if (rejects(pool.p(i), alpha * pi[i] * b)) ++f;
            if (f >= k) {
                k_star = k;
                break;
            }
        }
    }
    return detail::finish(pool, pi, gamma, alpha, k_star);
}

/// Benjamini-Yekutieli on sorted p-values: largest k with p_(k) <= k alpha / (m kappa).
inline StepUpResult by_baseline(const HypothesisPool& pool, double alpha)
{
    detail::check_alpha(alpha);
    const double md = static_cast<double>(pool.size());
    const double kappa = harmonic_number(pool.size());
    return detail::sorted_step_up(
        pool, alpha, [&](std::size_t k) { return static_cast<double>(k) * alpha / (md * kappa); }, "by",
        "kappa=" + detail::format_g(kappa));
}

/// Benjamini-Hochberg: as BY with kappa = 1. No distribution-free guarantee.
inline StepUpResult bh_baseline(const HypothesisPool& pool, double alpha)
{
    detail::check_alpha(alpha);
    const double md = static_cast<double>(pool.size());
    return detail::sorted_step_up(
        pool, alpha, [&](std::size_t k) { return static_cast<double>(k) * alpha / md; }, "bh", "kappa=1");
}

/// Union bound with a prior: reject every h with p_h <= alpha * pi(h).
inline StepUpResult bonferroni_weighted(const HypothesisPool& pool, const ComplexityPrior& pi, double alpha)
{
    detail::check_alpha(alpha);
    OCCAM_REQUIRE(pi.size() == pool.size(), ErrorKind::Dimension, "complexity prior not sized for the pool");
    StepUpResult r;
    r.alpha = alpha;
    r.procedure = "bonferroni";
    r.prior_spec = "weighted";
    r.thresholds.resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        r.thresholds[i] = alpha * pi[i];
        if (rejects(pool.p(i), r.thresholds[i])) r.rejected.push_back(i);
    }
    r.k_star = r.rejected.size();
    return r;
}

inline constexpr std::size_t brute_force_max_pool = 20;

/// Literal evaluation of the supremum: the union of every subset G with
/// G subset of S_{|G|}, over all 2^m subsets.
inline StepUpResult brute_force_sup(const HypothesisPool& pool, const ComplexityPrior& pi, const SizePrior& gamma,
                                    double alpha)
{
    detail::check_alpha(alpha);
    OCCAM_REQUIRE(pool.size() <= brute_force_max_pool, ErrorKind::TooLarge, "brute force limited to m <= 20");
    if (pool.empty()) return detail::empty_result(alpha, gamma);
    detail::check_dims(pool, pi, gamma);
    const std::size_t m = pool.size();

    // passing[k] = bitmask of S_k
    std::vector<std::uint32_t> passing(m + 1, 0);
    for (std::size_t k = 1; k <= m; ++k)
        for (std::size_t i = 0; i < m; ++i)
            if (rejects(pool.p(i), alpha * pi[i] * gamma.beta(k))) passing[k] |= std::uint32_t{1} << i;

    std::uint32_t sup = 0;
    const std::uint32_t end = std::uint32_t{1} << m;
    for (std::uint32_t g = 1; g < end; ++g) {
        const auto size = static_cast<std::size_t>(std::popcount(g));
        if ((g & ~passing[size]) == 0) sup |= g;
    }
    StepUpResult r = detail::finish(pool, pi, gamma, alpha, static_cast<std::size_t>(std::popcount(sup)));
    // report exactly the enumerated union; finish() recomputes S_{|sup|}, which must agree
    r.rejected.clear();
    for (std::size_t i = 0; i < m; ++i)
        if (sup & (std::uint32_t{1} << i)) r.rejected.push_back(i);
    return r;
}

/// Single-trial false discovery proportion |A cap H0| / |A| (0 when A is empty).
inline double realized_fdp(const StepUpResult& result, const HypothesisPool& pool)
{
    OCCAM_REQUIRE(pool.has_ground_truth(), ErrorKind::MissingGroundTruth, "pool has no null mask");
    if (result.rejected.empty()) return 0.0;
    const auto& nulls = *pool.null_mask();
    std::size_t false_rejections = 0;
    for (std::size_t i : result.rejected)
        if (nulls.at(i)) ++false_rejections;
    return static_cast<double>(false_rejections) / static_cast<double>(result.rejected.size());
}

/// Markov: E[rho] <= bound implies rho <= bound / delta with probability 1 - delta.
inline double markov_confidence(double expected_fpr_bound, double delta)
{
    OCCAM_REQUIRE(delta > 0.0 && delta <= 1.0, ErrorKind::InvalidParameter, "delta must lie in (0,1]");
    OCCAM_REQUIRE(expected_fpr_bound >= 0.0 && expected_fpr_bound <= 1.0, ErrorKind::InvalidParameter,
                  "expected FPR bound must lie in [0,1]");
    return std::min(expected_fpr_bound / delta, 1.0);
}

} // namespace occam
