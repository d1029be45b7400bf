#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"
#include "random.hpp"

namespace occam {

/// Bisection for the boundary of a monotone predicate on [lo, hi].
/// `inside(lo)` must hold; returns the largest x found with inside(x) true.
/// Stops after `max_iter` halvings or when the bracket cannot shrink further.
template <class Pred>
double bisect_last_true(double lo, double hi, Pred inside, int max_iter = 200)
{
    for (int i = 0; i < max_iter; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (inside(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

/// P(Z > z) for a standard normal Z.
inline double normal_upper_tail(double z) noexcept
{
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// P(Z <= z) for a standard normal Z.
inline double normal_cdf(double z) noexcept
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Gaussian marginal N(mean, sd^2). Quantiles are found by bisection on the
/// erfc-based tail so they are consistent with upper_tail() to the last bit.
struct GaussianMarginal {
    double mean = 0.0;
    double sd = 1.0;

    double upper_tail(double x) const noexcept { return normal_upper_tail((x - mean) / sd); }
    double cdf(double x) const noexcept { return normal_cdf((x - mean) / sd); }

    /// t with P(X > t) = level, for level in (0, 1).
    double upper_quantile(double level) const
    {
        OCCAM_REQUIRE(level > 0.0 && level < 1.0, ErrorKind::OutOfRange, "quantile level must lie in (0,1)");
        // the tail is decreasing, so "tail(z) >= level" holds on a left half-line
        const double z = bisect_last_true(-40.0, 40.0, [&](double t) { return normal_upper_tail(t) >= level; });
        return mean + sd * z;
    }

    double sample(Rng& rng) const { return mean + sd * rng.normal(); }
};

/// Exponential marginal with the given rate; closed-form quantiles.
struct ExponentialMarginal {
    double rate = 1.0;

    double upper_tail(double x) const noexcept { return x <= 0.0 ? 1.0 : std::exp(-rate * x); }
    double cdf(double x) const noexcept { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }

    double upper_quantile(double level) const
    {
        OCCAM_REQUIRE(level > 0.0 && level < 1.0, ErrorKind::OutOfRange, "quantile level must lie in (0,1)");
        return -std::log(level) / rate;
    }

    double sample(Rng& rng) const { return -std::log(rng.uniform_open()) / rate; }
};

/// Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)| of a sample to a
/// continuous CDF.
template <class Cdf>
double ks_distance(std::span<const double> sample, Cdf cdf)
{
    if (sample.empty()) return 0.0;
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

} // namespace occam
