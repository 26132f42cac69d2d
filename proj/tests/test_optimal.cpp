#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/optimal.hpp"
#include "pweight/power.hpp"
#include "pweight/procedures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pweight;
using optimal::rho;
using optimal::solve_c;

TEST_CASE("rho basics")
{
    CHECK(rho(0.0, 1.0, 0.05, 100) == 0.0);
    CHECK(rho(-2.0, 1.0, 0.05, 100) == 0.0);
    CHECK(rho(1e-13, 1.0, 0.05, 100) == 0.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double c = -5.0; c < 20.0; c += 0.5) {
        const double r = rho(3.0, c, 0.05, 100);
        CHECK(r < prev);
        prev = r;
    }
    // For fixed c > 0, xi / 2 + c / xi is smallest at xi = sqrt(2c).
    for (double c : {0.5, 2.0, 8.0}) {
        const double peak = rho(std::sqrt(2.0 * c), c, 0.05, 100);
        CHECK(peak == doctest::Approx(100 / 0.05 * distfn::upper_tail(std::sqrt(2.0 * c))));
        for (double xi = 0.1; xi < 12.0; xi += 0.1) {
            CHECK(rho(xi, c, 0.05, 100) <= peak * (1.0 + 1e-14));
        }
    }
    CHECK(rho(2.0, 60.0, 0.05, 100) > 0.0);
    CHECK(rho(2.0, 200.0, 0.05, 100) == 0.0);
}

TEST_CASE("solve_c matches mpmath reference configurations")
{
    {
        const auto sol = solve_c(EffectConfiguration({0, 0, 0, 1, 2, 3, 4, 0, 0, 0}), 0.05);
        CHECK(sol.c == doctest::Approx(2.0048777674149023792).epsilon(1e-12));
        CHECK(sol.weights[4] == doctest::Approx(4.5237550029419542).epsilon(1e-11));
        CHECK(sol.weights[0] == 0.0);
        CHECK(sol.residual <= optimal::kResidualTolerance);
        CHECK(sol.oracle_power == doctest::Approx(0.57386310912695745835).epsilon(1e-11));
    }
    {
        const auto sol = solve_c(
            EffectConfiguration({0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5}), 0.01);
        CHECK(sol.c == doctest::Approx(4.0648173320899558792).epsilon(1e-12));
        CHECK(sol.weights[1] == doctest::Approx(0.0024996472722799965).epsilon(1e-10));
        CHECK(sol.weights[5] == doctest::Approx(2.1522540342203572).epsilon(1e-11));
        CHECK(sol.oracle_power == doctest::Approx(0.45117813161744303094).epsilon(1e-11));
    }
}

TEST_CASE("equal alternatives share the budget")
{
    std::vector<double> xi(20, 0.0);
    for (int j = 0; j < 4; ++j) {
        xi[j] = 2.5;
    }
    const auto sol = solve_c(EffectConfiguration(xi), 0.05);
    const double a = 4.0 / 20.0;
    CHECK(sol.weights[0] == doctest::Approx(1.0 / a).epsilon(1e-10));
    CHECK(sol.weights[10] == 0.0);
    const double c_closed = 2.5 * (distfn::upper_quantile(0.05 / (20 * a)) - 1.25);
    CHECK(sol.c == doctest::Approx(c_closed).epsilon(1e-10));
    CHECK(sol.c == doctest::Approx(2.4785068190123634377).epsilon(1e-12));
}

TEST_CASE("single hypothesis gets weight one")
{
    const auto sol = solve_c(EffectConfiguration({3.0}), 0.05);
    CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(distfn::upper_tail(1.5 + sol.c / 3.0) / 0.05 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("solve_c errors")
{
    CHECK_THROWS_AS(solve_c(EffectConfiguration({0.0, -1.0}), 0.05), DomainError);
    CHECK_THROWS_AS(solve_c(EffectConfiguration({1.0, 0.0}, Sidedness::two_sided), 0.05),
                    DomainError);
}

TEST_CASE("grid scan brackets the same root")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 2 + rep % 49;
        std::vector<double> xi(m);
        for (auto& x : xi) {
            x = u(rng) < 0.5 ? 0.0 : 6.0 * u(rng);
        }
        xi[0] = 0.5 + 3.0 * u(rng);
        const EffectConfiguration config(xi);
        const auto sol = solve_c(config, 0.05);
        const auto excess = [&](double c) {
            double s = 0.0;
            for (double x : xi) {
                s += rho(x, c, 0.05, m);
            }
            return s / static_cast<double>(m) - 1.0;
        };
        constexpr int kPoints = 1000000;
        double prev_c = -50.0;
        double prev = excess(prev_c);
        int crossings = 0;
        double lo = 0.0, hi = 0.0;
        // Coarse pass to localize, then a 1e6-point scan of the bracketing cell.
        for (int k = 1; k <= 1000; ++k) {
            const double c = -50.0 + 100.0 * k / 1000.0;
            const double e = excess(c);
            if (prev > 0.0 && e <= 0.0) {
                ++crossings;
                lo = prev_c;
                hi = c;
            }
            prev_c = c;
            prev = e;
        }
        REQUIRE(crossings == 1);
        double lo2 = lo;
        for (int k = 1; k <= kPoints / 1000; ++k) {
            const double c = lo + (hi - lo) * k / (kPoints / 1000);
            if (excess(c) <= 0.0) {
                CHECK(sol.c >= lo2 - 1e-12);
                CHECK(sol.c <= c + 1e-12);
                break;
            }
            lo2 = c;
        }
        CHECK(sol.residual <= optimal::kResidualTolerance);
        CHECK(std::fabs(sol.weights.mean() - 1.0) <= 1e-10);
    }
}

TEST_CASE("optimal weights beat random weights")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> e(1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t m = 3 + rep;
        std::vector<double> xi(m);
        for (auto& x : xi) {
            x = u(rng) < 0.3 ? 0.0 : 5.0 * u(rng);
        }
        xi[0] = 3.0;
        const EffectConfiguration config(xi);
        const double best = power::oracle_power(config, 0.05);
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> raw(m);
            for (auto& w : raw) {
                w = std::pow(e(rng), 2.0);
            }
            CHECK(power::average_power(config, WeightVector::normalize(raw), 0.05) <=
                  best + 1e-12);
        }
    }
}

TEST_CASE("mixture solve matches the configuration solve")
{
    const EffectConfiguration config({0, 0, 0, 1, 2, 3, 4, 0, 0, 0});
    const auto a = solve_c(config, 0.05);
    const auto b = optimal::solve_c_mixture(MixtureSpec::empirical(config), 0.05, 10);
    CHECK(a.c == doctest::Approx(b.c).epsilon(1e-12));
    CHECK(a.oracle_power == doctest::Approx(b.oracle_power).epsilon(1e-12));

    const auto two = optimal::solve_c_mixture(MixtureSpec({{0.9, 0.0}, {0.1, 3.0}}), 0.05, 1000);
    CHECK(two.atom_weights[1] == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(two.atom_weights[0] == 0.0);

    // Three atoms: gamma Q(u/2 + c/u) + a Q(xi/2 + c/xi) = alpha/m.
    const double g = 0.1, aa = 0.05, uu = 1.5, xx = 4.0;
    const auto three = optimal::solve_c_mixture(MixtureSpec({{1 - g - aa, 0.0}, {g, uu}, {aa, xx}}),
                                                0.05, 1000);
    const double lhs = g * distfn::upper_tail(uu / 2 + three.c / uu) +
                       aa * distfn::upper_tail(xx / 2 + three.c / xx);
    CHECK(lhs == doctest::Approx(0.05 / 1000).epsilon(1e-10));
}

TEST_CASE("cutoff duality with weighted Bonferroni")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 5 + rep % 40;
        std::vector<double> xi(m), t(m), p(m);
        for (std::size_t j = 0; j < m; ++j) {
            xi[j] = u(rng) < 0.5 ? 0.0 : 6.0 * u(rng);
        }
        xi[0] = 4.0;
        const EffectConfiguration config(xi);
        const auto sol = solve_c(config, 0.05);
        const auto cut = optimal::equivalent_cutoffs(sol, config);
        for (std::size_t j = 0; j < m; ++j) {
            t[j] = xi[j] + 1.5 * z(rng);
            p[j] = distfn::upper_tail(t[j]);
            if (xi[j] <= 0.0) {
                CHECK(std::isinf(cut[j]));
            } else {
                CHECK(distfn::upper_tail(cut[j] - xi[j]) ==
                      doctest::Approx(distfn::upper_tail(sol.c / xi[j] - xi[j] / 2)));
            }
        }
        const auto r = procedures::weighted_bonferroni(TestBattery::from_p_values(p),
                                                       sol.weights, 0.05);
        for (std::size_t j = 0; j < m; ++j) {
            // Skip ties within rounding of the cutoff.
            if (std::fabs(t[j] - cut[j]) < 1e-9) {
                continue;
            }
            CAPTURE(j);
            CHECK(r.contains(j) == (t[j] > cut[j]));
        }
    }
}

TEST_CASE("discontinuity example reproduces the reference numbers")
{
    const auto d = optimal::discontinuity_example(1000, 0.05, 0.1, 0.1, 1000, 0.1);
    CHECK(d.A == doctest::Approx(4.8918351562949875573).epsilon(1e-12));
    CHECK(d.B == doctest::Approx(3.2908079234468868944).epsilon(1e-12));
    CHECK(d.xi == doctest::Approx(9.7631851946687036596).epsilon(1e-12));
    CHECK(d.u == doctest::Approx(0.030529286731795974447).epsilon(1e-10));
    CHECK(d.w_on_xi_under_Q == doctest::Approx(10.0).epsilon(1e-10));
    CHECK(d.w_on_xi_under_Qtilde == doctest::Approx(1.0 / 100.1).epsilon(1e-8));
    CHECK(d.ratio == doctest::Approx(1001.0).epsilon(1e-8));
    CHECK(d.c_solved == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(d.ks_distance == doctest::Approx(0.1).epsilon(1e-12));

    CHECK_THROWS_AS(optimal::discontinuity_example(1000, 0.05, 0.1, 0.1, 1000, 50.0),
                    DomainError);
}
