#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "occam/multitest.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace occam;
using namespace gen;
using Catch::Matchers::WithinAbs;

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

std::size_t count_passing(const HypothesisPool& pool, const ComplexityPrior& pi, const SizePrior& gamma, double alpha,
                          std::size_t k)
{
    std::size_t f = 0;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (rejects(pool.p(i), alpha * pi[i] * gamma.beta(k))) ++f;
    return f;
}

} // namespace

TEST_CASE("hypothesis pool validation")
{
    CHECK(kind_of([] { HypothesisPool({"a", "b"}, {0.1}); }) == ErrorKind::Dimension);
    CHECK(kind_of([] { HypothesisPool({"a"}, {1.2}); }) == ErrorKind::Validation);
    CHECK(kind_of([] { HypothesisPool({"a"}, {-0.1}); }) == ErrorKind::Validation);
    CHECK(kind_of([] { HypothesisPool({"a", "a"}, {0.1, 0.2}); }) == ErrorKind::Duplicate);
    CHECK(kind_of([] { HypothesisPool({"a"}, {0.1}, std::vector<bool>{true, false}); }) == ErrorKind::Dimension);
    const HypothesisPool ok({"a", "b"}, {0.0, 1.0}, std::vector<bool>{true, false});
    CHECK(ok.size() == 2);
    CHECK(ok.has_ground_truth());
}

TEST_CASE("step-up worked example with BY size prior")
{
    const auto pool = worked_pool();
    const auto pi = complexity_prior_uniform(4);
    const auto gamma = size_prior_by(4);
    const double alpha = 0.05;

    // hand trace: thresholds 0.006 k, f = [1, 2, 2, 3]
    const std::vector<double> beta{gamma.beta(1), gamma.beta(2), gamma.beta(3), gamma.beta(4)};
    const std::vector<double> p(pool.p_values().begin(), pool.p_values().end());
    const std::vector<double> w(4, 0.25);
    const auto f = oracle::step_counts(p, w, beta, alpha);
    CHECK(f == std::vector<std::size_t>{1, 2, 2, 3});
    for (std::size_t k = 1; k <= 4; ++k) CHECK_THAT(alpha * 0.25 * gamma.beta(k), WithinAbs(0.006 * k, 1e-15));

    const auto r = step_up(pool, pi, gamma, alpha);
    CHECK(r.k_star == 2);
    CHECK(r.rejected == std::vector<std::size_t>{0, 1});
    CHECK(r.rejected_ids(pool) == std::vector<std::string>{"g1", "g2"});
    for (double t : r.thresholds) CHECK_THAT(t, WithinAbs(0.012, 1e-15));

    CHECK(by_baseline(pool, alpha).rejected == r.rejected);
    CHECK(brute_force_sup(pool, pi, gamma, alpha).rejected == r.rejected);
}

TEST_CASE("step-up rejects nothing when every p is one")
{
    Rng rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t m = rng.uniform_int(1, 30);
        const auto pool = make_pool(std::vector<double>(m, 1.0));
        const double alpha = 0.999 * rng.uniform();
        const auto r = step_up(pool, random_complexity(rng, m), random_size(rng, m), alpha);
        CHECK(r.k_star == 0);
        CHECK(r.rejected.empty());
        CHECK(by_baseline(pool, alpha).rejected.empty());
        CHECK(bh_baseline(pool, alpha).rejected.empty());
    }
}

TEST_CASE("step-up with dirac(1) is the weighted union bound")
{
    const auto pool = make_pool({0.01, 0.04, 0.2, 0.03, 0.5});
    const std::vector<double> w{0.5, 0.1, 0.1, 0.2, 0.1};
    const auto pi = complexity_prior_custom(w);
    const auto r = step_up(pool, pi, size_prior_dirac(1, 5), 0.2);
    // levels 0.1, 0.02, 0.02, 0.04, 0.02
    CHECK(r.rejected == std::vector<std::size_t>{0, 3});
    CHECK(r.rejected == bonferroni_weighted(pool, pi, 0.2).rejected);
}

TEST_CASE("step-up dimension errors")
{
    const auto pool = worked_pool();
    CHECK(kind_of([&] { step_up(pool, complexity_prior_uniform(3), size_prior_by(4), 0.1); }) == ErrorKind::Dimension);
    CHECK(kind_of([&] { step_up(pool, complexity_prior_uniform(4), size_prior_by(5), 0.1); }) == ErrorKind::Dimension);
    CHECK(kind_of([&] { step_up(pool, complexity_prior_uniform(4), size_prior_by(4), 1.5); }) ==
          ErrorKind::InvalidParameter);
}

TEST_CASE("BY baseline")
{
    const auto r = by_baseline(worked_pool(), 0.05);
    CHECK(r.rejected == std::vector<std::size_t>{0, 1});
    CHECK(r.k_star == 2);
    CHECK(r.procedure == "by");

    const auto single = make_pool({0.04});
    CHECK(by_baseline(single, 0.05).rejected == std::vector<std::size_t>{0});
    CHECK(by_baseline(make_pool({1.0, 1.0, 1.0}), 0.05).rejected.empty());
}

TEST_CASE("BH baseline")
{
    const auto r = bh_baseline(worked_pool(), 0.05);
    CHECK(r.k_star == 3);
    CHECK(r.rejected == std::vector<std::size_t>{0, 1, 2});
    CHECK_THAT(r.thresholds[0], WithinAbs(0.0375, 1e-15));
    CHECK(bh_baseline(make_pool({1.0, 1.0}), 0.3).rejected.empty());
    for (double p : {0.01, 0.05, 0.06, 0.5}) {
        const auto one = make_pool({p});
        CHECK(bh_baseline(one, 0.05).rejected == by_baseline(one, 0.05).rejected);
    }
}

TEST_CASE("brute force supremum edge cases")
{
    const HypothesisPool empty;
    const auto r = brute_force_sup(empty, complexity_prior_uniform(1), size_prior_by(1), 0.1);
    CHECK(r.rejected.empty());
    CHECK(step_up(empty, complexity_prior_uniform(1), size_prior_by(1), 0.1).rejected.empty());

    const auto pool = make_pool({0.0, 0.0, 0.3});
    CHECK(brute_force_sup(pool, complexity_prior_uniform(3), size_prior_by(3), 0.0).rejected.empty());

    const auto big = make_pool(std::vector<double>(21, 0.5));
    CHECK(kind_of([&] { brute_force_sup(big, complexity_prior_uniform(21), size_prior_by(21), 0.1); }) ==
          ErrorKind::TooLarge);
}

TEST_CASE("alpha zero rejects nothing, alpha one with zero p-values rejects all positive-weight hypotheses")
{
    Rng rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = rng.uniform_int(1, 25);
        const auto pi = random_complexity(rng, m);
        const auto gamma = random_size(rng, m);
        const auto pool = make_pool(random_pvalues(rng, m));
        REQUIRE(step_up(pool, pi, gamma, 0.0).rejected.empty());

        const auto zeros = make_pool(std::vector<double>(m, 0.0));
        const auto all = step_up(zeros, pi, gamma, 1.0);
        std::vector<std::size_t> positive;
        for (std::size_t i = 0; i < m; ++i)
            if (pi[i] > 0.0) positive.push_back(i);
        // every weighted set of size |positive| passes once beta is positive there
        if (gamma.beta(positive.size()) > 0.0) REQUIRE(all.rejected == positive);
    }
}

TEST_CASE("property: step-up equals the brute-force supremum and is a fixpoint")
{
    Rng rng(2024);
    for (int rep = 0; rep < 1500; ++rep) {
        const std::size_t m = rng.uniform_int(1, 12);
        const auto pi = random_complexity(rng, m);
        const auto gamma = random_size(rng, m);
        const auto pool = make_pool(random_pvalues(rng, m));
        const double alpha = rng.uniform();
        const auto fast = step_up(pool, pi, gamma, alpha);
        const auto slow = brute_force_sup(pool, pi, gamma, alpha);
        REQUIRE(fast.rejected == slow.rejected);
        REQUIRE(fast.rejected.size() == fast.k_star);
        REQUIRE(count_passing(pool, pi, gamma, alpha, fast.k_star) == fast.k_star);
        for (std::size_t k = fast.k_star + 1; k <= m; ++k) REQUIRE(count_passing(pool, pi, gamma, alpha, k) < k);
        for (std::size_t i = 0; i < m; ++i) {
            const bool in = std::binary_search(fast.rejected.begin(), fast.rejected.end(), i);
            REQUIRE(in == rejects(pool.p(i), fast.thresholds[i]));
        }
    }
}

TEST_CASE("property: step-up with uniform complexity and BY size prior equals the BY baseline")
{
    Rng rng(99);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t m = rng.uniform_int(1, 200);
        const auto pool = make_pool(random_pvalues(rng, m));
        const double alpha = rng.uniform();
        REQUIRE(step_up(pool, complexity_prior_uniform(m), size_prior_by(m), alpha).rejected ==
                by_baseline(pool, alpha).rejected);
    }
}

TEST_CASE("property: the general scan agrees with the uniform fast path")
{
    Rng rng(4);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t m = rng.uniform_int(2, 60);
        const auto pool = make_pool(random_pvalues(rng, m));
        const auto gamma = random_size(rng, m);
        const double alpha = rng.uniform();
        // same weights, but not bitwise equal, so the general scan runs
        std::vector<double> w(m, 1.0);
        w[0] = 1.0 + 1e-15;
        const auto nearly = complexity_prior_custom(w);
        REQUIRE_FALSE(nearly.is_uniform());
        const auto a = step_up(pool, complexity_prior_uniform(m), gamma, alpha);
        const auto b = step_up(pool, nearly, gamma, alpha);
        if (m <= 12) REQUIRE(b.rejected == brute_force_sup(pool, nearly, gamma, alpha).rejected);
        // only a p-value sitting exactly on a threshold can tell the two apart
        bool on_edge = false;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 1; k <= m; ++k)
                if (std::fabs(pool.p(i) - alpha * gamma.beta(k) / m) < 1e-12) on_edge = true;
        if (!on_edge) REQUIRE(a.rejected == b.rejected);
    }
}

TEST_CASE("property: lowering one p-value never removes a rejection")
{
    Rng rng(8);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t m = rng.uniform_int(1, 40);
        const auto pi = random_complexity(rng, m);
        const auto gamma = random_size(rng, m);
        auto p = random_pvalues(rng, m);
        const double alpha = rng.uniform();
        const auto before = step_up(make_pool(p), pi, gamma, alpha);
        const std::size_t j = rng.uniform_int(0, m - 1);
        p[j] *= rng.uniform();
        const auto after = step_up(make_pool(p), pi, gamma, alpha);
        REQUIRE(std::includes(after.rejected.begin(), after.rejected.end(), before.rejected.begin(),
                              before.rejected.end()));
    }
}

TEST_CASE("property: dirac(1) step-up equals weighted Bonferroni")
{
    Rng rng(12);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t m = rng.uniform_int(1, 80);
        const auto pi = random_complexity(rng, m);
        const auto pool = make_pool(random_pvalues(rng, m));
        const double alpha = rng.uniform();
        const auto hammer = step_up(pool, pi, size_prior_dirac(1, m), alpha);
        std::vector<std::size_t> expect;
        for (std::size_t i = 0; i < m; ++i)
            if (alpha * pi[i] > 0.0 && pool.p(i) <= alpha * pi[i]) expect.push_back(i);
        REQUIRE(hammer.rejected == expect);
        REQUIRE(bonferroni_weighted(pool, pi, alpha).rejected == expect);
    }
}

TEST_CASE("property: BH rejects a superset of BY")
{
    Rng rng(13);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t m = rng.uniform_int(1, 150);
        const auto pool = make_pool(random_pvalues(rng, m));
        const double alpha = rng.uniform();
        const auto by = by_baseline(pool, alpha);
        const auto bh = bh_baseline(pool, alpha);
        REQUIRE(std::includes(bh.rejected.begin(), bh.rejected.end(), by.rejected.begin(), by.rejected.end()));
    }
}

TEST_CASE("realized false discovery proportion")
{
    const auto pool = make_pool({0.01, 0.02, 0.5, 0.6}, std::vector<bool>{false, true, false, true});
    StepUpResult r;
    r.rejected = {0, 1};
    CHECK(realized_fdp(r, pool) == 0.5);
    r.rejected = {};
    CHECK(realized_fdp(r, pool) == 0.0);
    r.rejected = {0, 2};
    CHECK(realized_fdp(r, pool) == 0.0);
    r.rejected = {1, 3};
    CHECK(realized_fdp(r, pool) == 1.0);
    CHECK(kind_of([] { realized_fdp(StepUpResult{}, make_pool({0.1})); }) == ErrorKind::MissingGroundTruth);
}

TEST_CASE("Markov confidence conversion")
{
    CHECK_THAT(markov_confidence(0.0025, 0.05), WithinAbs(0.05, 1e-15));
    CHECK(markov_confidence(0.3, 1.0) == 0.3);
    CHECK(markov_confidence(0.5, 0.1) == 1.0);
    CHECK(kind_of([] { markov_confidence(0.1, 0.0); }) == ErrorKind::InvalidParameter);
}
