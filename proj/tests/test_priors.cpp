#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "occam/priors.hpp"
#include "oracles.hpp"

using namespace occam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

template <class F>
ErrorKind kind_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an occam::Error");
    return ErrorKind::Io;
}

std::vector<double> random_weights(Rng& rng, std::size_t m)
{
    std::vector<double> w(m);
    for (double& x : w) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
    w[rng.uniform_int(0, m - 1)] += 0.5;
    return w;
}

double sum(std::span<const double> xs)
{
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
}

} // namespace

TEST_CASE("BY size prior for m = 4 uses kappa = 25/12")
{
    const auto g = size_prior_by(4);
    const auto kappa = oracle::harmonic(4);
    REQUIRE(kappa.num == 25);
    REQUIRE(kappa.den == 12);
    const double expected[] = {0.48, 0.96, 1.44, 1.92};
    for (std::size_t k = 1; k <= 4; ++k) {
        const oracle::Ratio kk{static_cast<std::int64_t>(k), 1};
        CHECK_THAT(g.beta(k), WithinAbs(expected[k - 1], 1e-15));
        CHECK_THAT(g.beta(k), WithinAbs((kk / kappa).value(), 1e-15));
        CHECK_THAT(g.gamma(k), WithinAbs((oracle::Ratio{1, 1} / (kk * kappa)).value(), 1e-15));
        CHECK(g.beta(k) <= static_cast<double>(k));
    }
    CHECK(g.label() == "by(kappa=2.08333333333)");
    CHECK_THAT(g.mean_size(), WithinAbs(1.92, 1e-15));
}

TEST_CASE("BY size prior for m = 1 is a point mass")
{
    const auto g = size_prior_by(1);
    CHECK(g.gamma(1) == 1.0);
    CHECK(g.beta(1) == 1.0);
}

TEST_CASE("BY partial sums times kappa recover k")
{
    for (std::size_t m : {1, 2, 7, 20, 137, 1000, 10000}) {
        const auto g = size_prior_by(m);
        const double kappa = m <= 20 ? oracle::harmonic(static_cast<std::int64_t>(m)).value() : harmonic_number(m);
        CHECK_THAT(harmonic_number(m), WithinRel(kappa, 1e-15));
        for (std::size_t k = 1; k <= m; ++k) REQUIRE_THAT(g.beta(k) * kappa, WithinAbs(static_cast<double>(k), 1e-12 * k));
        CHECK_THAT(sum(g.gammas()), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("uniform size prior")
{
    const auto g = size_prior_uniform(4);
    CHECK_THAT(g.beta(2), WithinAbs(0.75, 1e-15));
    CHECK_THAT(g.beta(4), WithinAbs(2.5, 1e-15));
    CHECK(g.beta(4) <= 4.0);
    CHECK(size_prior_uniform(1).beta(1) == 1.0);
    for (std::size_t k = 1; k <= 4; ++k) CHECK(g.gamma(k) == 0.25);
}

TEST_CASE("dirac size prior")
{
    const auto one = size_prior_dirac(1, 6);
    for (std::size_t k = 1; k <= 6; ++k) CHECK(one.beta(k) == 1.0);

    const auto three = size_prior_dirac(3, 5);
    const double expected[] = {0, 0, 3, 3, 3};
    for (std::size_t k = 1; k <= 5; ++k) CHECK(three.beta(k) == expected[k - 1]);
    CHECK(three.gamma(3) == 1.0);
    CHECK(three.gamma(2) == 0.0);

    CHECK(size_prior_dirac(1, 1).beta(1) == 1.0);
    CHECK(kind_of([] { size_prior_dirac(0, 3); }) == ErrorKind::InvalidSize);
    CHECK(kind_of([] { size_prior_dirac(4, 3); }) == ErrorKind::InvalidSize);
}

TEST_CASE("custom size prior")
{
    const std::vector<double> a{1, 1};
    const auto g = size_prior_custom(a);
    CHECK(g.gamma(1) == 0.5);
    CHECK(g.gamma(2) == 0.5);
    CHECK_THAT(g.beta(1), WithinAbs(0.5, 1e-15));
    CHECK_THAT(g.beta(2), WithinAbs(1.5, 1e-15));

    const std::vector<double> b{2, 0};
    const auto d = size_prior_custom(b);
    CHECK(d.gamma(1) == 1.0);
    CHECK(d.beta(1) == 1.0);
    CHECK(d.beta(2) == 1.0);

    const std::vector<double> zeros{0, 0};
    CHECK(kind_of([&] { size_prior_custom(zeros); }) == ErrorKind::InvalidPrior);
    const std::vector<double> negative{1, -0.5};
    CHECK(kind_of([&] { size_prior_custom(negative); }) == ErrorKind::InvalidPrior);
    CHECK(kind_of([] { size_prior_custom(std::vector<double>{}); }) == ErrorKind::InvalidPrior);
}

TEST_CASE("size priors reject m = 0")
{
    CHECK(kind_of([] { size_prior_by(0); }) == ErrorKind::InvalidPoolSize);
    CHECK(kind_of([] { size_prior_uniform(0); }) == ErrorKind::InvalidPoolSize);
}

TEST_CASE("size prior beta at zero, past m, and at real arguments")
{
    const auto g = size_prior_by(5);
    CHECK(g.beta(0) == 0.0);
    CHECK(g.beta(9) == g.beta(5));
    CHECK(g.beta_at(0.5) == 0.0);
    CHECK(g.beta_at(2.7) == g.beta(2));
    CHECK(g.beta_at(3.0) == g.beta(3));
    CHECK(g.beta_at(1.0 / (1.0 / 3.0)) == g.beta(3));
    CHECK(g.beta_at(3.0 - 1e-13) == g.beta(3));
    CHECK(g.beta_at(100.0) == g.beta(5));
}

TEST_CASE("property: size prior partial sums are nondecreasing, bounded by k, and end at the mean size")
{
    Rng rng(101);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t m = rng.uniform_int(1, 60);
        const auto w = random_weights(rng, m);
        const auto g = size_prior_custom(w);
        REQUIRE_THAT(sum(g.gammas()), WithinAbs(1.0, 1e-12));
        double mean = 0.0, prev = 0.0;
        for (std::size_t k = 1; k <= m; ++k) {
            REQUIRE(g.gamma(k) >= 0.0);
            REQUIRE(g.beta(k) >= prev);
            REQUIRE(g.beta(k) <= static_cast<double>(k));
            prev = g.beta(k);
            mean += static_cast<double>(k) * g.gamma(k);
        }
        REQUIRE_THAT(g.beta(m), WithinAbs(mean, 1e-12 * m));
    }
}

TEST_CASE("complexity priors")
{
    const auto u = complexity_prior_uniform(4);
    REQUIRE(u.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == 0.25);
    CHECK(u.is_uniform());

    const std::vector<double> w{3, 1};
    const auto c = complexity_prior_custom(w);
    CHECK(c[0] == 0.75);
    CHECK(c[1] == 0.25);
    CHECK_FALSE(c.is_uniform());
    const bool mask[] = {false, true};
    CHECK(c.mass(mask) == 0.25);

    CHECK(kind_of([] { complexity_prior_custom(std::vector<double>{}); }) == ErrorKind::InvalidPrior);
    CHECK(kind_of([] { complexity_prior_custom(std::vector<double>{0, 0, 0}); }) == ErrorKind::InvalidPrior);
    CHECK(kind_of([] { complexity_prior_custom(std::vector<double>{1, -1, 2}); }) == ErrorKind::InvalidPrior);
    CHECK(kind_of([] { complexity_prior_uniform(0); }) == ErrorKind::InvalidPrior);
}

TEST_CASE("property: custom complexity priors sum to one")
{
    Rng rng(7);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t m = rng.uniform_int(1, 500);
        const auto pi = complexity_prior_custom(random_weights(rng, m));
        REQUIRE(pi.size() == m);
        REQUIRE_THAT(sum(pi.weights()), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("power prior beta")
{
    const auto p2 = continuous_prior_power(2);
    CHECK_THAT(p2.beta(0.5), WithinAbs(0.125, 1e-15));
    CHECK(p2.beta(0.0) == 0.0);
    for (int n : {2, 3, 10, 100}) {
        const auto p = continuous_prior_power(n);
        CHECK_THAT(p.beta(1.0), WithinAbs(1.0 / n, 1e-15));
        CHECK_THAT(p.beta(3.5), WithinAbs(1.0 / n, 1e-15));
    }
    CHECK(kind_of([] { continuous_prior_power(1); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { continuous_prior_power(0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("power prior beta matches the first-moment integral of its density")
{
    // density (1/(n-1)) u^{-1+1/(n-1)} on (0,1]; integrand u * density is bounded for n >= 2
    for (int n : {2, 3, 5, 50}) {
        const auto p = continuous_prior_power(n);
        const double e = 1.0 / (n - 1.0);
        const auto integrand = [&](double u) { return u <= 0.0 ? 0.0 : e * std::pow(u, e); };
        for (double x : {0.1, 0.37, 0.8, 1.0}) {
            const double quad = oracle::simpson(integrand, 0.0, x, 200000);
            CHECK_THAT(p.beta(x), WithinAbs(quad, 2e-6));
        }
    }
}

TEST_CASE("uniform01 prior equals the power prior at n = 2")
{
    const auto u = continuous_prior_uniform01();
    const auto p2 = continuous_prior_power(2);
    for (double x : {0.0, 0.01, 0.3, 0.5, 0.99, 1.0, 2.0}) {
        CHECK_THAT(u.beta(x), WithinAbs(std::pow(std::min(x, 1.0), 2) / 2.0, 1e-15));
        CHECK_THAT(u.beta(x), WithinAbs(p2.beta(x), 1e-15));
    }
    CHECK(u.label() == "uniform01");
}

TEST_CASE("table prior is a histogram with exact quadratic beta")
{
    const std::vector<double> knots{0.25, 0.5, 0.75, 1.0};
    const std::vector<double> weights{1, 2, 3, 4};
    const auto t = continuous_prior_table(knots, weights);
    CHECK(t.support_max() == 1.0);
    CHECK(t.strictly_increasing());
    // bin i has density 4 w_i / 10; beta integrates u times the density
    const auto density = [&](double u) {
        for (std::size_t i = 0; i < knots.size(); ++i)
            if (u <= knots[i]) return 0.4 * weights[i];
        return 0.0;
    };
    for (double x : {0.1, 0.25, 0.3, 0.6, 0.75, 0.9, 1.0}) {
        double expect = 0.0;
        double lo = 0.0;
        for (double edge : {0.25, 0.5, 0.75, 1.0}) {
            const double hi = std::min(edge, x);
            if (hi > lo) expect += density(hi) * (hi * hi - lo * lo) / 2.0;
            lo = edge;
        }
        CHECK_THAT(t.beta(x), WithinAbs(expect, 1e-15));
        CHECK(t.beta(x) <= x);
    }
    CHECK_THAT(t.cdf(1.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(t.cdf(0.5), WithinAbs(0.3, 1e-15));
    CHECK(t.beta(5.0) == t.beta(1.0));

    const std::vector<double> gap{0, 1, 1, 1};
    CHECK_FALSE(continuous_prior_table(knots, gap).strictly_increasing());
    const std::vector<double> bad_knots{0.5, 0.25};
    const std::vector<double> two{1, 1};
    CHECK(kind_of([&] { continuous_prior_table(bad_knots, two); }) == ErrorKind::InvalidPrior);
    CHECK(kind_of([&] { continuous_prior_table(knots, two); }) == ErrorKind::InvalidPrior);
}

TEST_CASE("table prior sampler follows its CDF")
{
    const std::vector<double> knots{0.25, 0.5, 0.75, 1.0};
    const std::vector<double> weights{0.1, 0.2, 0.3, 0.4};
    const auto t = continuous_prior_table(knots, weights);
    Rng rng(3);
    std::vector<double> xs(20000);
    for (double& x : xs) x = t.sample(rng);
    CHECK(ks_distance(xs, [&](double v) { return t.cdf(v); }) < 0.015);
}

TEST_CASE("property: continuous priors have beta(0) = 0, nondecreasing beta, and beta(x) <= x")
{
    const std::vector<double> knots{0.1, 0.4, 0.45, 1.0, 1.5};
    const std::vector<double> weights{2, 0.5, 1, 3, 1};
    const std::vector<ContinuousPrior> priors{continuous_prior_uniform01(), continuous_prior_power(2),
                                              continuous_prior_power(7), continuous_prior_power(1000),
                                              continuous_prior_table(knots, weights)};
    Rng rng(11);
    for (const auto& p : priors) {
        CHECK(p.beta(0.0) == 0.0);
        double prev = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            const double x = 2.0 * i / 2000.0;
            REQUIRE(p.beta(x) >= prev);
            REQUIRE(p.beta(x) <= x);
            prev = p.beta(x);
        }
        for (int i = 0; i < 500; ++i) {
            const double x = 2.0 * rng.uniform();
            REQUIRE(p.beta(x) <= x);
        }
    }
}

TEST_CASE("beta inverse for uniform01")
{
    const auto u = continuous_prior_uniform01();
    CHECK_THAT(beta_inverse(u, 0.125), WithinAbs(0.5, 1e-12));
    CHECK(beta_inverse(u, 0.0) == 0.0);
    CHECK(beta_inverse(u, 0.5) == 1.0);
    CHECK(kind_of([&] { beta_inverse(u, 0.6); }) == ErrorKind::OutOfRange);
    CHECK(kind_of([&] { beta_inverse(u, -0.1); }) == ErrorKind::OutOfRange);

    const std::vector<double> knots{0.5, 1.0};
    const std::vector<double> gap{0, 1};
    CHECK(kind_of([&] { beta_inverse(continuous_prior_table(knots, gap), 0.1); }) == ErrorKind::NonInvertible);
}

TEST_CASE("property: beta inverse undoes beta and meets its residual tolerance")
{
    const std::vector<double> knots{0.2, 0.5, 1.0};
    const std::vector<double> weights{1, 3, 2};
    const std::vector<ContinuousPrior> priors{continuous_prior_uniform01(), continuous_prior_power(3),
                                              continuous_prior_power(40), continuous_prior_table(knots, weights)};
    Rng rng(5);
    for (const auto& p : priors) {
        for (int i = 0; i < 100; ++i) {
            const double x = p.support_max() * (0.001 + 0.999 * rng.uniform());
            const double y = p.beta(x);
            const double back = beta_inverse(p, y);
            REQUIRE_THAT(back, WithinAbs(x, 1e-10));
            REQUIRE(std::fabs(p.beta(back) - y) <= 1e-12 * std::max(1.0, y));
        }
        // closed form for uniform01 is sqrt(2y)
        if (p.kind() == ContinuousPrior::Kind::Uniform01)
            for (int i = 0; i < 100; ++i) {
                const double y = 0.5 * rng.uniform();
                REQUIRE_THAT(beta_inverse(p, y), WithinAbs(std::sqrt(2.0 * y), 1e-10));
            }
    }
}

TEST_CASE("level function")
{
    CHECK(level_function(0.0, 0.3, 2.0) == 0.0);
    CHECK_THAT(level_function(0.05, 0.25, 0.48), WithinAbs(0.006, 1e-15));
    CHECK(level_function(1.0, 1.0, 5.0) == 1.0);
}

TEST_CASE("property: level function is monotone in each argument and lies in [0,1]")
{
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const double d = rng.uniform(), p = rng.uniform(), b = 5.0 * rng.uniform();
        const double v = level_function(d, p, b);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        const double bump = rng.uniform() * 0.5;
        REQUIRE(level_function(std::min(1.0, d + bump), p, b) >= v);
        REQUIRE(level_function(d, std::min(1.0, p + bump), b) >= v);
        REQUIRE(level_function(d, p, b + bump) >= v);
    }
}
