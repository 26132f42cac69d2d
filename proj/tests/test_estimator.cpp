#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/estimator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pweight;
using namespace pweight::estimator;

TEST_CASE("group moments")
{
    const double x[] = {1.0, 2.0, 3.0, 4.0};
    const auto mo = group_moments(x);
    CHECK(mo.Y == doctest::Approx(2.5));
    CHECK(mo.S2 == doctest::Approx(5.0 / 3.0));
    CHECK(mo.r == 4);
    const double one[] = {1.0};
    CHECK_THROWS_AS(group_moments(one), DomainError);
}

TEST_CASE("normal method of moments inverts population moments")
{
    // Mixture (1-pi) N(0,1) + pi N(xi,1): mean pi xi, variance 1 + pi(1-pi) xi^2.
    for (double pi : {0.05, 0.1, 0.3, 0.7}) {
        for (double xi : {0.5, 1.0, 2.5, 4.0}) {
            const double Y = pi * xi;
            const double S2 = 1.0 + pi * (1.0 - pi) * xi * xi;
            const auto f = mom_normal(Y, S2, 1000);
            CAPTURE(pi);
            CAPTURE(xi);
            CHECK(f.pi_hat == doctest::Approx(pi).epsilon(1e-12));
            CHECK(f.xi_hat == doctest::Approx(xi).epsilon(1e-12));
        }
    }
}

TEST_CASE("normal method of moments guards")
{
    CHECK(mom_normal(0.0, 1.0, 100).xi_hat == 0.0);
    CHECK(mom_normal(0.5, 0.5, 100).xi_hat == 0.0);  // S2 + Y^2 - 1 <= 0
    const auto tiny = mom_normal(0.01, 1.5, 100);    // pi = 1e-4 / 0.5001 < 1/r
    CHECK(tiny.xi_hat == 0.0);
    CHECK(tiny.pi_hat >= 0.0);
    // Sign is kept here; weights_from_groups clamps negative effects to 0.
    CHECK(mom_normal(-1.0, 2.0, 100).xi_hat == doctest::Approx(-2.0));
}

TEST_CASE("chi-square method of moments")
{
    const auto f = mom_chisq(2.0, 5.0, 100);
    CHECK(f.xi_hat == doctest::Approx(std::sqrt(12.0)).epsilon(1e-14));
    CHECK(f.pi_hat == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(mom_chisq(1.0, 5.0, 100).xi_hat == 0.0);
    CHECK(mom_chisq(0.8, 5.0, 100).pi_hat == 0.0);

    // Derived variant inverts the population moments of
    // (1-pi) chi2_1 + pi chi2_1(xi^2): mean 1 + pi xi^2,
    // variance 2 + pi (4 xi^2 + xi^4) - pi^2 xi^4.
    for (double pi : {0.05, 0.2, 0.5}) {
        for (double xi : {2.0, 3.0, 5.0}) {
            const double l = xi * xi;
            const double Y = 1.0 + pi * l;
            const double S2 = 2.0 + pi * (4.0 * l + l * l) - pi * pi * l * l;
            const auto d = mom_chisq(Y, S2, 1000, ChisqVariant::derived);
            CAPTURE(pi);
            CAPTURE(xi);
            CHECK(d.xi_hat == doctest::Approx(xi).epsilon(1e-10));
            CHECK(d.pi_hat == doctest::Approx(pi).epsilon(1e-10));
        }
    }
}

TEST_CASE("normal estimator on simulated groups lands within 3 SE")
{
    std::mt19937_64 rng(41);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution coin(0.2);
    const std::size_t r = 10000;
    const int reps = 200;
    std::vector<double> x(r), pis, xis;
    for (int rep = 0; rep < reps; ++rep) {
        for (auto& v : x) {
            v = z(rng) + (coin(rng) ? 3.0 : 0.0);
        }
        const auto mo = group_moments(x);
        const auto f = mom_normal(mo.Y, mo.S2, r);
        pis.push_back(f.pi_hat);
        xis.push_back(f.xi_hat);
    }
    const auto sd = [](const std::vector<double>& v) {
        const auto mo = group_moments(v);
        return std::sqrt(mo.S2);
    };
    const double se_pi = sd(pis), se_xi = sd(xis);
    CHECK(std::fabs(pis[0] - 0.2) < 3 * se_pi);
    CHECK(std::fabs(xis[0] - 3.0) < 3 * se_xi);
    CHECK(std::fabs(group_moments(pis).Y - 0.2) < 3 * se_pi / std::sqrt(reps) + 1e-3);
    CHECK(std::fabs(group_moments(xis).Y - 3.0) < 3 * se_xi / std::sqrt(reps) + 1e-2);
}

TEST_CASE("weights from groups")
{
    std::mt19937_64 rng(43);
    std::normal_distribution<double> z(0.0, 1.0);
    const std::size_t K = 10, size = 200;
    std::vector<double> stats;
    std::vector<std::size_t> groups;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < size; ++i) {
            const bool signal = k < 2 && i < 40;
            stats.push_back(z(rng) + (signal ? 3.0 : 0.0));
            groups.push_back(k);
        }
    }
    EstimatorOptions opt;
    const auto w = weights_from_groups(stats, groups, opt);
    REQUIRE(w.groups.size() == K);
    CHECK(w.per_test.size() == K * size);
    CHECK(w.per_test.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(w.c));
    for (double s : w.smoothed) {
        CHECK(s > 0.0);
    }
    CHECK(w.smoothed[0] > w.smoothed[5]);
    CHECK(w.per_test[0] == w.smoothed[0]);
    CHECK(w.warnings.empty());

    opt.gamma_smooth = 1.0;
    const auto flat = weights_from_groups(stats, groups, opt);
    for (double x : flat.per_test.values()) {
        CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("estimator fallbacks and warnings")
{
    std::mt19937_64 rng(47);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> stats;
    std::vector<std::size_t> groups;
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < 30; ++i) {
            stats.push_back(-std::fabs(z(rng)));
            groups.push_back(k);
        }
    }
    const auto none = weights_from_groups(stats, groups, {});
    CHECK(std::isnan(none.c));
    CHECK_FALSE(none.warnings.empty());
    for (double x : none.per_test.values()) {
        CHECK(x == 1.0);
    }

    stats.push_back(5.0);
    groups.push_back(3);
    const auto single = weights_from_groups(stats, groups, {});
    CHECK(single.groups[3].xi_hat == 0.0);
    CHECK(single.warnings.size() >= 2);

    const std::vector<double> s2 = {1.0, 2.0, 3.0};
    const std::vector<std::size_t> g2 = {0, 0, 0, 0};
    CHECK_THROWS_AS(weights_from_groups(s2, g2, {}), ContractError);
}

TEST_CASE("battery front end needs groups")
{
    CHECK_THROWS_AS(weights_from_groups(TestBattery::from_p_values({0.1, 0.2}), {}),
                    ContractError);
    const TestBattery b({"a", "b", "c", "d"}, {0.01, 0.2, 0.5, 0.9}, std::nullopt,
                        std::vector<std::string>{"x", "x", "y", "y"});
    const auto w = weights_from_groups(b, {});
    CHECK(w.groups[0].group_id == "x");
    CHECK(w.groups[0].Y_k ==
          doctest::Approx((distfn::upper_quantile(0.01) + distfn::upper_quantile(0.2)) / 2));
}

TEST_CASE("pipeline FWER stays within the Monte Carlo bound")
{
    PipelineConfig config;
    config.n_groups = 10;
    config.group_size = 100;
    config.n_enriched = 2;
    config.signal_fraction = 0.2;
    config.signal_mean = 3.0;
    const auto r = fwer_of_estimated_weights(config, 1000, 7, 2);
    CHECK(r.reps == 1000);
    CHECK(r.fwer <= r.bound);
    CHECK(r.mean_true_weighted >= r.mean_true_unweighted);

    const auto again = fwer_of_estimated_weights(config, 1000, 7, 3);
    CHECK(again.any_false == r.any_false);
    CHECK(again.mean_true_weighted == r.mean_true_weighted);
}
