#pragma once

// Complexity priors over a finite pool, size priors over {1..m} with their
// first-moment partial sums, continuous inverse-density priors, and the level
// function that combines them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace occam {

namespace detail {

// Validates raw non-negative weights and returns them divided by their sum.
inline std::vector<double> normalized(std::span<const double> weights, const char* what)
{
    OCCAM_REQUIRE(!weights.empty(), ErrorKind::InvalidPrior, std::string(what) + ": no weights");
    CompensatedSum total;
    for (double w : weights) {
        OCCAM_REQUIRE(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidPrior,
                      std::string(what) + ": weights must be finite and non-negative");
        total.add(w);
    }
    const double sum = total.value();
    OCCAM_REQUIRE(sum > 0.0, ErrorKind::InvalidPrior, std::string(what) + ": weights are all zero");
    std::vector<double> out(weights.begin(), weights.end());
    for (double& w : out) w /= sum;
    return out;
}

inline std::string format_g(double x)
{
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

} // namespace detail

/// Normalized weights pi(h) over a pool of m hypotheses (density w.r.t.
/// counting measure).
class ComplexityPrior {
public:
    ComplexityPrior() = default;

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// True when every weight is bitwise identical (enables the sorted fast path).
    bool is_uniform() const noexcept
    {
        return std::adjacent_find(weights_.begin(), weights_.end(), std::not_equal_to<>()) == weights_.end();
    }

    /// Total mass on the hypotheses selected by `mask`.
    double mass(std::span<const bool> mask) const
    {
        CompensatedSum s;
        for (std::size_t i = 0; i < weights_.size() && i < mask.size(); ++i)
            if (mask[i]) s.add(weights_[i]);
        return s.value();
    }

private:
    explicit ComplexityPrior(std::vector<double> w) : weights_(std::move(w)) {}
    friend ComplexityPrior complexity_prior_uniform(std::size_t m);
    friend ComplexityPrior complexity_prior_custom(std::span<const double> weights);

    std::vector<double> weights_;
};

inline ComplexityPrior complexity_prior_uniform(std::size_t m)
{
    OCCAM_REQUIRE(m >= 1, ErrorKind::InvalidPrior, "complexity prior needs at least one hypothesis");
    return ComplexityPrior(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

inline ComplexityPrior complexity_prior_custom(std::span<const double> weights)
{
    return ComplexityPrior(detail::normalized(weights, "complexity prior"));
}

/// Distribution gamma over set sizes {1..m} together with the prefix sums
/// beta(k) = sum_{i<=k} i * gamma(i). Sizes are 1-based in the accessors.
class SizePrior {
public:
    SizePrior() = default;

    std::size_t size() const noexcept { return gamma_.size(); }

    /// gamma(k) for k in 1..m.
    double gamma(std::size_t k) const { return gamma_.at(k - 1); }

    /// beta(k) with beta(0) = 0 and beta(k) = beta(m) for k > m.
    double beta(std::size_t k) const noexcept
    {
        if (k == 0 || gamma_.empty()) return 0.0;
        return beta_[std::min(k, beta_.size()) - 1];
    }

    /// beta at a real argument x > 0: the step function beta(floor(x)).
    /// Values within 1e-9 (relative) below an integer are snapped up to it,
    /// since inverse densities such as 1/(1/k) may land one ulp under k.
    double beta_at(double x) const noexcept
    {
        if (!(x >= 1.0 - 1e-9)) return 0.0;
        if (x >= static_cast<double>(size())) return beta(size());
        return beta(static_cast<std::size_t>(std::floor(x * (1.0 + 1e-9))));
    }

    std::span<const double> gammas() const noexcept { return gamma_; }
    /// beta(1..m), index k-1.
    std::span<const double> beta_partials() const noexcept { return beta_; }

    /// Mean size under gamma, equal to beta(m).
    double mean_size() const noexcept { return beta(size()); }

    /// Short human-readable description used in reports, e.g. "by(kappa=2.08333333333)".
    const std::string& label() const noexcept { return label_; }

private:
    SizePrior(std::vector<double> gamma, std::vector<double> beta, std::string label)
        : gamma_(std::move(gamma)), beta_(std::move(beta)), label_(std::move(label))
    {
    }
    friend SizePrior size_prior_by(std::size_t m);
    friend SizePrior size_prior_uniform(std::size_t m);
    friend SizePrior size_prior_dirac(std::size_t a, std::size_t m);
    friend SizePrior size_prior_custom(std::span<const double> weights);

    std::vector<double> gamma_;
    std::vector<double> beta_;
    std::string label_;
};

/// Harmonic number sum_{i<=m} 1/i, summed smallest terms first.
inline double harmonic_number(std::size_t m) noexcept
{
    double kappa = 0.0;
    for (std::size_t i = m; i >= 1; --i) kappa += 1.0 / static_cast<double>(i);
    return kappa;
}

/// gamma(i) proportional to 1/i, so beta(k) = k / kappa (Benjamini-Yekutieli).
inline SizePrior size_prior_by(std::size_t m)
{
    OCCAM_REQUIRE(m >= 1, ErrorKind::InvalidPoolSize, "size prior needs m >= 1");
    const double kappa = harmonic_number(m);
    std::vector<double> gamma(m), beta(m);
    for (std::size_t k = 1; k <= m; ++k) {
        gamma[k - 1] = 1.0 / (static_cast<double>(k) * kappa);
        beta[k - 1] = static_cast<double>(k) / kappa;
    }
    return SizePrior(std::move(gamma), std::move(beta), "by(kappa=" + detail::format_g(kappa) + ")");
}

inline SizePrior size_prior_uniform(std::size_t m)
{
    OCCAM_REQUIRE(m >= 1, ErrorKind::InvalidPoolSize, "size prior needs m >= 1");
    const double md = static_cast<double>(m);
    std::vector<double> gamma(m, 1.0 / md), beta(m);
    for (std::size_t k = 1; k <= m; ++k) {
        const double kd = static_cast<double>(k);
        beta[k - 1] = kd * (kd + 1.0) / (2.0 * md);
    }
    return SizePrior(std::move(gamma), std::move(beta), "uniform");
}

/// Point mass at size a.
inline SizePrior size_prior_dirac(std::size_t a, std::size_t m)
{
    OCCAM_REQUIRE(a >= 1 && a <= m, ErrorKind::InvalidSize, "dirac size must lie in 1..m");
    std::vector<double> gamma(m, 0.0), beta(m, 0.0);
    gamma[a - 1] = 1.0;
    for (std::size_t k = a; k <= m; ++k) beta[k - 1] = static_cast<double>(a);
    return SizePrior(std::move(gamma), std::move(beta), "dirac(" + std::to_string(a) + ")");
}

/// Weights over sizes 1..m (index k-1), normalized.
inline SizePrior size_prior_custom(std::span<const double> weights)
{
    std::vector<double> gamma = detail::normalized(weights, "size prior");
    std::vector<double> beta(gamma.size());
    CompensatedSum acc;
    for (std::size_t k = 1; k <= gamma.size(); ++k) {
        acc.add(static_cast<double>(k) * gamma[k - 1]);
        beta[k - 1] = acc.value();
    }
    return SizePrior(std::move(gamma), std::move(beta), "custom");
}

/// Inverse-density prior gamma on (0, inf), represented through
/// beta(x) = int_0^x u dgamma(u). All built-in members live on (0, 1] or on
/// (0, last knot] for tables.
class ContinuousPrior {
public:
    enum class Kind { Power, Uniform01, Table };

    Kind kind() const noexcept { return kind_; }
    int sample_size() const noexcept { return n_; }

    /// Upper end of the support; beta is constant beyond it.
    double support_max() const noexcept { return kind_ == Kind::Table ? knots_.back() : 1.0; }

    double beta(double x) const noexcept
    {
        if (!(x > 0.0)) return 0.0;
        switch (kind_) {
        case Kind::Uniform01: {
            const double c = std::min(x, 1.0);
            return 0.5 * c * c;
        }
        case Kind::Power: {
            const double nd = n_;
            return std::min(std::pow(x, nd / (nd - 1.0)), 1.0) / nd;
        }
        case Kind::Table: {
            const std::size_t i = bin_of(x);
            if (i == knots_.size()) return beta_at_knot_.back();
            const double lo = i == 0 ? 0.0 : knots_[i - 1];
            const double base = i == 0 ? 0.0 : beta_at_knot_[i - 1];
            return base + 0.5 * density_[i] * (x * x - lo * lo);
        }
        }
        return 0.0;
    }

    /// CDF of gamma.
    double cdf(double x) const noexcept
    {
        if (!(x > 0.0)) return 0.0;
        switch (kind_) {
        case Kind::Uniform01: return std::min(x, 1.0);
        case Kind::Power: return x >= 1.0 ? 1.0 : std::pow(x, 1.0 / (n_ - 1.0));
        case Kind::Table: {
            const std::size_t i = bin_of(x);
            if (i == knots_.size()) return 1.0;
            const double lo = i == 0 ? 0.0 : knots_[i - 1];
            const double base = i == 0 ? 0.0 : cdf_at_knot_[i - 1];
            return std::min(1.0, base + density_[i] * (x - lo));
        }
        }
        return 0.0;
    }

    double sample(Rng& rng) const
    {
        const double u = rng.uniform();
        switch (kind_) {
        case Kind::Uniform01: return u;
        case Kind::Power: return std::pow(u, n_ - 1.0);
        case Kind::Table: {
            auto it = std::upper_bound(cdf_at_knot_.begin(), cdf_at_knot_.end(), u);
            std::size_t i = std::min<std::size_t>(it - cdf_at_knot_.begin(), knots_.size() - 1);
            while (density_[i] == 0.0 && i + 1 < knots_.size()) ++i;
            const double lo = i == 0 ? 0.0 : knots_[i - 1];
            const double base = i == 0 ? 0.0 : cdf_at_knot_[i - 1];
            return std::min(knots_[i], lo + (u - base) / density_[i]);
        }
        }
        return 0.0;
    }

    /// False when beta has a flat stretch inside (0, support_max].
    bool strictly_increasing() const noexcept
    {
        return kind_ != Kind::Table || std::all_of(density_.begin(), density_.end(), [](double d) { return d > 0.0; });
    }

    std::string label() const
    {
        switch (kind_) {
        case Kind::Uniform01: return "uniform01";
        case Kind::Power: return "power(" + std::to_string(n_) + ")";
        case Kind::Table: return "table(" + std::to_string(knots_.size()) + " bins)";
        }
        return "";
    }

private:
    ContinuousPrior() = default;
    friend ContinuousPrior continuous_prior_power(int n);
    friend ContinuousPrior continuous_prior_uniform01();
    friend ContinuousPrior continuous_prior_table(std::span<const double> knots, std::span<const double> weights);

    // Index of the bin (knots_[i-1], knots_[i]] holding x; knots_.size() past the end.
    std::size_t bin_of(double x) const noexcept
    {
        return static_cast<std::size_t>(std::lower_bound(knots_.begin(), knots_.end(), x) - knots_.begin());
    }

    Kind kind_ = Kind::Uniform01;
    int n_ = 0;
    // Table only: right bin edges, per-bin density, beta and CDF at each edge.
    std::vector<double> knots_;
    std::vector<double> density_;
    std::vector<double> beta_at_knot_;
    std::vector<double> cdf_at_knot_;
};

/// gamma with density x^{-1+1/(n-1)} / (n-1) on [0,1]; beta(x) = min(x^{n/(n-1)}, 1) / n.
inline ContinuousPrior continuous_prior_power(int n)
{
    OCCAM_REQUIRE(n >= 2, ErrorKind::InvalidParameter, "power prior needs sample size n >= 2");
    ContinuousPrior p;
    p.kind_ = ContinuousPrior::Kind::Power;
    p.n_ = n;
    return p;
}

/// Lebesgue measure on [0,1]; beta(x) = min(x,1)^2 / 2.
inline ContinuousPrior continuous_prior_uniform01()
{
    return ContinuousPrior();
}

/// Histogram prior: bin i covers (knots[i-1], knots[i]] (knots[-1] = 0) and
/// carries mass weights[i] spread uniformly over the bin.
inline ContinuousPrior continuous_prior_table(std::span<const double> knots, std::span<const double> weights)
{
    OCCAM_REQUIRE(!knots.empty() && knots.size() == weights.size(), ErrorKind::InvalidPrior,
                  "table prior needs one weight per knot");
    std::vector<double> w = detail::normalized(weights, "table prior");
    ContinuousPrior p;
    p.kind_ = ContinuousPrior::Kind::Table;
    double prev = 0.0, beta = 0.0, cdf = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        OCCAM_REQUIRE(std::isfinite(knots[i]) && knots[i] > prev, ErrorKind::InvalidPrior,
                      "table knots must be positive and strictly increasing");
        const double width = knots[i] - prev;
        p.knots_.push_back(knots[i]);
        p.density_.push_back(w[i] / width);
        beta += w[i] * 0.5 * (knots[i] + prev);
        cdf += w[i];
        p.beta_at_knot_.push_back(beta);
        p.cdf_at_knot_.push_back(cdf);
        prev = knots[i];
    }
    p.cdf_at_knot_.back() = 1.0;
    return p;
}

/// x in [0, support_max] with beta(x) = y, by bisection (200-iteration cap).
inline double beta_inverse(const ContinuousPrior& prior, double y)
{
    const double x_max = prior.support_max();
    const double y_max = prior.beta(x_max);
    OCCAM_REQUIRE(y >= 0.0 && y <= y_max, ErrorKind::OutOfRange, "beta_inverse argument outside [0, beta(x_max)]");
    OCCAM_REQUIRE(prior.strictly_increasing(), ErrorKind::NonInvertible, "beta has flat segments");
    if (y == 0.0) return 0.0;
    if (y == y_max) return x_max;
    return bisect_last_true(0.0, x_max, [&](double x) { return prior.beta(x) <= y; });
}

/// Level granted to an object with prior weight pi_h when beta evaluated at
/// its inverse output density equals beta_value: min(delta * pi_h * beta, 1).
inline double level_function(double delta, double pi_h, double beta_value) noexcept
{
    return std::min(delta * pi_h * beta_value, 1.0);
}

} // namespace occam
