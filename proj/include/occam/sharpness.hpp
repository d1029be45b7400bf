#pragma once

// Tightness construction on the unit circle. Given an inverse-size prior nu
// on [0,1] with continuous strictly increasing beta and a level alpha0, the
// family (X_h) below has marginal P at every h, the random set A has |A| ~ nu,
// and the proportion of A whose X_h reaches the threshold t(alpha0 beta(|A|))
// equals alpha0 almost surely.
//
//   x ~ U[0,1), u = alpha0 * v with v ~ nu
//   X_h = G(u) on [x, x+u),  Y ~ P(. | X < T) elsewhere
//   G(u) = t(alpha0 * beta(u / alpha0)),  T = t(alpha0 * beta(1))
//   A = [x, x + u / alpha0)
//
// where t(a) is the upper a-quantile of P. Intervals wrap around the circle
// and are half-open. The circle is discretized into grid_n equispaced points.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "error.hpp"
#include "priors.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace occam {

struct SharpnessConfig {
    double alpha0 = 0.2;
    ContinuousPrior nu = continuous_prior_uniform01();
    std::size_t grid_n = 100000;
    std::size_t trials = 1000;
    std::uint64_t seed = default_seed;
    unsigned workers = 0;
};

struct SharpnessTrial {
    double x = 0.0;
    double u = 0.0;
    double fpr = 0.0;
    double set_size = 0.0;   // grid count of A / grid_n
    std::size_t set_count = 0;
    std::size_t bad_count = 0;
    bool degenerate = false; // A holds no grid point
    bool wrapped = false;    // A crosses the point 1 == 0
    double probe = 0.0;      // X_h at one uniformly drawn grid point
};

template <class Marginal = GaussianMarginal>
class SharpnessModel {
public:
    SharpnessModel(const SharpnessConfig& config, Marginal marginal)
        : alpha0_(config.alpha0), nu_(config.nu), marginal_(marginal), grid_n_(config.grid_n)
    {
        OCCAM_REQUIRE(alpha0_ > 0.0 && alpha0_ < 1.0, ErrorKind::InvalidParameter, "alpha0 must lie in (0,1)");
        OCCAM_REQUIRE(nu_.support_max() <= 1.0, ErrorKind::InvalidPrior, "nu must be supported on [0,1]");
        OCCAM_REQUIRE(nu_.strictly_increasing(), ErrorKind::NonInvertible,
                      "beta of nu must be continuous and strictly increasing");
        OCCAM_REQUIRE(grid_n_ >= 1, ErrorKind::InvalidParameter, "grid_n must be positive");
        top_level_ = alpha0_ * nu_.beta(1.0);
        floor_threshold_ = marginal_.upper_quantile(top_level_);
    }

    double alpha0() const noexcept { return alpha0_; }
    const ContinuousPrior& nu() const noexcept { return nu_; }
    const Marginal& marginal() const noexcept { return marginal_; }
    std::size_t grid_n() const noexcept { return grid_n_; }

    /// Y < T almost surely.
    double floor_threshold() const noexcept { return floor_threshold_; }

    /// Upper a-quantile of the marginal; +inf at a = 0.
    double quantile(double level) const
    {
        if (level <= 0.0) return std::numeric_limits<double>::infinity();
        return marginal_.upper_quantile(level);
    }

    /// Threshold t(alpha0 * beta(s)) for a set of measure s.
    double threshold_at_size(double s) const { return quantile(alpha0_ * nu_.beta(s)); }

    /// G(u), decreasing from +inf at u = 0 to T at u = alpha0.
    double g(double u) const { return threshold_at_size(u / alpha0_); }

    /// t(alpha) = G(alpha0 * beta^{-1}(alpha / alpha0)), for alpha in [0, alpha0 beta(1)].
    double quantile_via_construction(double alpha) const
    {
        return g(alpha0_ * beta_inverse(nu_, alpha / alpha0_));
    }

    double sample_u(Rng& rng) const { return alpha0_ * nu_.sample(rng); }

    /// Marginal conditioned below T, by rejection.
    double sample_below(Rng& rng) const
    {
        double y;
        do {
            y = marginal_.sample(rng);
        } while (!(y < floor_threshold_));
        return y;
    }

    /// X at grid point `index` given the draw (x, u).
    double value_at(std::size_t index, double x, double u, Rng& rng) const
    {
        const auto [start, bad] = span(x, u);
        const std::size_t offset = (index + grid_n_ - start % grid_n_) % grid_n_;
        return offset < bad ? g(u) : sample_below(rng);
    }

    /// First grid index and number of grid points in the half-open arc [x, x+length).
    std::pair<std::size_t, std::size_t> span(double x, double length) const
    {
        const double n = static_cast<double>(grid_n_);
        const double first = std::ceil(x * n);
        const double past = std::ceil((x + length) * n);
        const auto count = static_cast<std::size_t>(std::max(0.0, std::min(past - first, n)));
        return {static_cast<std::size_t>(first) % grid_n_, count};
    }

private:
    double alpha0_;
    ContinuousPrior nu_;
    Marginal marginal_;
    std::size_t grid_n_;
    double top_level_ = 0.0;
    double floor_threshold_ = 0.0;
};

template <class Marginal = GaussianMarginal>
SharpnessModel<Marginal> build_construction(const SharpnessConfig& config, Marginal marginal = Marginal{})
{
    return SharpnessModel<Marginal>(config, marginal);
}

/// One draw of (x, u), the realized set A and its false prediction rate.
/// Bad points are those of A with X_h >= t(alpha0 beta(|A|)), |A| = u / alpha0.
template <class Marginal>
SharpnessTrial run_trial(const SharpnessModel<Marginal>& model, std::uint64_t seed)
{
    OCCAM_REQUIRE(model.grid_n() >= 100, ErrorKind::InvalidParameter, "grid_n must be >= 100");
    Rng rng(seed);
    SharpnessTrial t;
    t.x = rng.uniform();
    t.u = model.sample_u(rng);
    const double size = t.u / model.alpha0();
    const std::size_t count = model.span(t.x, size).second;
    const std::size_t bad_span = model.span(t.x, t.u).second;
    t.set_count = count;
    t.set_size = static_cast<double>(count) / static_cast<double>(model.grid_n());
    t.wrapped = t.x + size > 1.0;

    const double threshold = model.threshold_at_size(size);
    const double high = model.g(t.u);
    for (std::size_t i = 0; i < count; ++i) {
        const double value = i < bad_span ? high : model.sample_below(rng);
        if (value >= threshold) ++t.bad_count;
    }
    if (count == 0) {
        t.degenerate = true;
        t.fpr = 0.0;
    } else {
        t.fpr = static_cast<double>(t.bad_count) / static_cast<double>(count);
    }

    const auto probe_index = static_cast<std::size_t>(rng.uniform_int(0, model.grid_n() - 1));
    t.probe = model.value_at(probe_index, t.x, t.u, rng);
    return t;
}

struct SharpnessSummary {
    std::size_t trials = 0;
    std::size_t degenerate = 0;
    double mean_fpr = 0.0;  // over non-degenerate trials
    double std_error = 0.0;
    double ks_set_size = 0.0; // KS distance of the |A| sample to nu
    std::vector<SharpnessTrial> per_trial;
};

template <class Marginal = GaussianMarginal>
SharpnessSummary estimate(const SharpnessConfig& config, Marginal marginal = Marginal{})
{
    OCCAM_REQUIRE(config.trials >= 1, ErrorKind::InvalidParameter, "at least one trial is required");
    const auto model = build_construction(config, marginal);
    SharpnessSummary s;
    s.trials = config.trials;
    s.per_trial = run_indexed<SharpnessTrial>(config.trials, config.workers, [&](std::size_t i) {
        return run_trial(model, derive_seed(config.seed, i));
    });

    CompensatedSum sum;
    std::size_t used = 0;
    std::vector<double> sizes;
    sizes.reserve(config.trials);
    for (const auto& t : s.per_trial) {
        sizes.push_back(t.set_size);
        if (t.degenerate) {
            ++s.degenerate;
            continue;
        }
        sum.add(t.fpr);
        ++used;
    }
    if (used > 0) {
        s.mean_fpr = sum.value() / static_cast<double>(used);
        CompensatedSum sq;
        for (const auto& t : s.per_trial)
            if (!t.degenerate) sq.add((t.fpr - s.mean_fpr) * (t.fpr - s.mean_fpr));
        s.std_error = std::sqrt(sq.value() / static_cast<double>(used)) / std::sqrt(static_cast<double>(used));
    }
    s.ks_set_size = ks_distance(sizes, [&](double v) { return config.nu.cdf(v); });
    return s;
}

} // namespace occam
