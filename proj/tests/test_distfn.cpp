#include "pweight/distfn.hpp"
#include "pweight/error.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pweight;

namespace {

bool rel_close(double got, double want, double tol)
{
    return std::fabs(got - want) <= tol * std::fabs(want);
}

} // namespace

// Reference values computed with mpmath at 60 digits (tests/oracle).
TEST_CASE("upper tail matches high-precision reference")
{
    struct Row {
        double z, q;
    };
    const Row rows[] = {
        {-8.0, 0.9999999999999993779},
        {-1.0, 0.84134474606854294859},
        {0.5, 0.30853753872598689636},
        {1.0, 0.15865525393145705141},
        {2.0, 0.0227501319481792072},
        {5.0, 2.8665157187919391167e-7},
        {8.0, 6.2209605742717841235e-16},
        {10.0, 7.619853024160526066e-24},
        {15.0, 3.6709661993127508858e-51},
        {20.0, 2.7536241186062336951e-89},
        {25.0, 3.0566967063825609164e-138},
        {30.0, 4.9067139271481870595e-198},
        {35.0, 1.124910706472406244e-268},
        {37.0, 5.7255712225245768227e-300},
    };
    for (const auto& r : rows) {
        CAPTURE(r.z);
        CHECK(rel_close(distfn::upper_tail(r.z), r.q, 1e-12));
    }
}

TEST_CASE("upper tail limits and symmetry")
{
    CHECK(distfn::upper_tail(0.0) == 0.5);
    CHECK(distfn::upper_tail(-40.0) == 1.0);
    CHECK(distfn::upper_tail(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(distfn::upper_tail(-std::numeric_limits<double>::infinity()) == 1.0);
    for (double z = -6.0; z <= 6.0; z += 0.37) {
        CHECK(distfn::upper_tail(z) + distfn::lower_tail(z) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("log upper tail stays finite past double underflow")
{
    struct Row {
        double z, lq;
    };
    const Row rows[] = {
        {3.0, -6.6077262215103495433},
        {30.0, -454.32124395634319711},
        {38.0, -726.5572160188201301},
        {40.0, -804.60844201375378817},
        {100.0, -5005.5242086942050886},
        {1000.0, -500007.82669481218431},
    };
    for (const auto& r : rows) {
        CAPTURE(r.z);
        CHECK(rel_close(distfn::log_upper_tail(r.z), r.lq, 1e-13));
    }
}

TEST_CASE("quantile inverts the tail")
{
    struct Row {
        double p, z;
    };
    const Row rows[] = {
        {5e-5, 3.890591886413093967},    {1e-2, 2.326347874040841101},
        {1e-5, 4.264890793922824628},    {1e-8, 5.612001244174788732},
        {1e-12, 7.034483825301131930},   {1e-16, 8.222082216130435613},
        {0.05, 1.644853626951472715},    {5e-7, 4.891638475698590386},
    };
    for (const auto& r : rows) {
        CAPTURE(r.p);
        CHECK(rel_close(distfn::upper_quantile(r.p), r.z, 1e-13));
    }
    CHECK(distfn::upper_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    for (double lp = -300.0; lp < -0.01; lp += 7.3) {
        const double p = std::pow(10.0, lp);
        CAPTURE(p);
        CHECK(rel_close(distfn::upper_tail(distfn::upper_quantile(p)), p, 1e-12));
    }
    for (double p = 0.02; p < 1.0; p += 0.05) {
        CHECK(rel_close(distfn::upper_tail(distfn::upper_quantile(p)), p, 1e-13));
    }
}

TEST_CASE("quantile rejects probabilities outside (0, 1)")
{
    CHECK_THROWS_AS(distfn::upper_quantile(0.0), DomainError);
    CHECK_THROWS_AS(distfn::upper_quantile(1.0), DomainError);
    CHECK_THROWS_AS(distfn::upper_quantile(-0.1), DomainError);
    CHECK_THROWS_AS(distfn::upper_quantile(std::nan("")), DomainError);
}

TEST_CASE("threshold quantile extends to the closed interval")
{
    CHECK(distfn::threshold_quantile(0.0) == std::numeric_limits<double>::infinity());
    CHECK(distfn::threshold_quantile(1.0) == -std::numeric_limits<double>::infinity());
    CHECK(distfn::threshold_quantile(3.0) == -std::numeric_limits<double>::infinity());
    CHECK(distfn::threshold_quantile(0.05) == distfn::upper_quantile(0.05));
}

TEST_CASE("noncentral chi-square tail matches scipy")
{
    CHECK(rel_close(distfn::noncentral_chisq1_upper_tail(10.0, 4.0), 0.12256147097461542, 1e-12));
    CHECK(rel_close(distfn::noncentral_chisq1_upper_tail(30.0, 9.0), 0.006620409413472401, 1e-12));
    CHECK(rel_close(distfn::noncentral_chisq1_upper_tail(1.0, 0.0), 0.31731050786291115, 1e-12));
    CHECK(rel_close(distfn::noncentral_chisq1_upper_tail(50.0, 1.0), 6.353129281845282e-10, 1e-10));
    CHECK(distfn::noncentral_chisq1_upper_tail(0.0, 3.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(distfn::noncentral_chisq1_upper_tail(-1.0, 0.0), DomainError);
    CHECK_THROWS_AS(distfn::noncentral_chisq1_upper_tail(1.0, -1.0), DomainError);
}

TEST_CASE("density")
{
    CHECK(distfn::density(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    CHECK(distfn::density(2.0) == doctest::Approx(0.05399096651318806).epsilon(1e-14));
}
