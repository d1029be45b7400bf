// Compares the prior-weighted step-up procedure with BH and BY on a small
// pool, then prints the randomized-classifier bound for a few output densities.

#include <cmath>
#include <iostream>

#include <occam/bounds.hpp>
#include <occam/multitest.hpp>
#include <occam/priors.hpp>

int main()
{
    const occam::HypothesisPool pool({"g1", "g2", "g3", "g4", "g5", "g6"},
                                     {0.0004, 0.003, 0.011, 0.018, 0.04, 0.6});
    const double alpha = 0.05;
    const auto pi = occam::complexity_prior_uniform(pool.size());

    auto show = [&](const char* name, const occam::StepUpResult& r) {
        std::cout << name << ": k*=" << r.k_star << " rejects";
        for (const auto& id : r.rejected_ids(pool)) std::cout << ' ' << id;
        std::cout << '\n';
    };
    show("hammer/by     ", occam::step_up(pool, pi, occam::size_prior_by(pool.size()), alpha));
    show("hammer/uniform", occam::step_up(pool, pi, occam::size_prior_uniform(pool.size()), alpha));
    show("hammer/dirac:1", occam::step_up(pool, pi, occam::size_prior_dirac(1, pool.size()), alpha));
    show("by            ", occam::by_baseline(pool, alpha));
    show("bh            ", occam::bh_baseline(pool, alpha));

    std::cout << "\nclassifier bound, n=1000, delta=0.05, empirical error 0.08\n";
    for (double theta : {1.0, 10.0, 100.0, std::exp(20.0)}) {
        const auto r = occam::classifier_bound_report(1000, 0.05, theta, 0.08);
        std::cout << "  theta=" << theta << "  budget=" << r.kl_budget << "  bound=" << r.upper_error_bound << '\n';
    }
}
