#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/hypotheses.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace pweight;

TEST_CASE("effect configuration counts alternatives by sidedness")
{
    const EffectConfiguration one({0.0, 1.0, -2.0, 3.0});
    CHECK(one.m1() == 2);
    CHECK(one.m0() == 2);
    const EffectConfiguration two({0.0, 1.0, -2.0, 3.0}, Sidedness::two_sided);
    CHECK(two.m1() == 3);
    CHECK(two.m0() + two.m1() == two.size());
    CHECK_THROWS_AS(EffectConfiguration({}), DomainError);
    CHECK_THROWS_AS(EffectConfiguration({std::nan("")}), DomainError);
}

TEST_CASE("weight vector enforces the budget")
{
    CHECK_NOTHROW(WeightVector({0.5, 1.5, 1.0}));
    CHECK_THROWS_AS(WeightVector({1.0, 1.1}), ContractError);
    CHECK_THROWS_AS(WeightVector({-0.5, 2.5}), ContractError);
    CHECK_THROWS_AS(WeightVector(std::vector<double>{}), ContractError);

    const auto w = WeightVector::normalize({2.0, 4.0, 0.0});
    CHECK(w.mean() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(2.0));
    CHECK(w.scale_factor() == doctest::Approx(0.5));
    CHECK_THROWS_AS(WeightVector::normalize({0.0, 0.0}), ContractError);
    CHECK(WeightVector::unit(4).scale_factor() == 1.0);
}

TEST_CASE("rejection set is sorted and unique")
{
    const RejectionSet r({3, 1, 3, 0}, 5);
    REQUIRE(r.size() == 3);
    CHECK(r.indices()[0] == 0);
    CHECK(r.indices()[2] == 3);
    CHECK(r.contains(1));
    CHECK_FALSE(r.contains(2));
    CHECK(RejectionSet({1}, 5).is_subset_of(r));
    CHECK_FALSE(RejectionSet({2}, 5).is_subset_of(r));
    CHECK_THROWS_AS(RejectionSet({5}, 5), ContractError);
}

TEST_CASE("tally against truth")
{
    const bool truth[] = {true, false, true, false};
    const auto o = tally(RejectionSet({0, 1}, 4), truth);
    CHECK(o.true_positives == 1);
    CHECK(o.false_positives == 1);
    CHECK(o.rejections == 2);
    CHECK(o.m1 == 2);
    CHECK(o.m0 == 2);
    CHECK(o.consistent());
}

TEST_CASE("mixture spec and KS distance")
{
    CHECK_THROWS_AS(MixtureSpec({{0.5, 0.0}, {0.4, 1.0}}), DomainError);
    const MixtureSpec q({{0.9, 0.0}, {0.1, 3.0}});
    CHECK(q.cdf(-1.0) == 0.0);
    CHECK(q.cdf(0.0) == doctest::Approx(0.9));
    CHECK(q.cdf(3.0) == doctest::Approx(1.0));
    const MixtureSpec qt({{0.8, 0.0}, {0.1, 1.0}, {0.1, 3.0}});
    CHECK(ks_distance(q, qt) == doctest::Approx(0.1));
    const auto emp = MixtureSpec::empirical(EffectConfiguration({0.0, 0.0, 2.0, 0.0}));
    CHECK(emp.size() == 2);
    CHECK(emp.cdf(0.0) == doctest::Approx(0.75));
}

TEST_CASE("battery parse: basic file")
{
    std::istringstream in("id\tp\nrs1\t0.01\nrs2\t0.5\n");
    const auto b = read_battery(in, "mem");
    CHECK(b.size() == 2);
    CHECK(b.ids()[0] == "rs1");
    CHECK(b.p(1) == 0.5);
    CHECK_FALSE(b.has_statistics());
    CHECK_FALSE(b.has_groups());
}

TEST_CASE("battery parse errors name the line")
{
    const auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            read_battery(in, "mem");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("id\tp\nrs1\t0.01\nrs2\t1.5\n") == 3);
    CHECK(line_of("id\tp\nrs1\t0.01\nrs1\t0.5\n") == 3);
    CHECK(line_of("id\tp\nrs1\tabc\n") == 2);
    CHECK(line_of("id\tp\nrs1\tnan\n") == 2);
    CHECK(line_of("id\tp\nrs1\t0.1\t3\n") == 2);
    CHECK(line_of("p\tid\nrs1\t0.1\n") == 1);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_battery(empty, "mem"), ParseError);
}

TEST_CASE("battery with statistics and groups")
{
    std::istringstream in("# comment\nid\tp\tstat\tgroup\n"
                          "a\t0.05\t1.6449\tg1\n"
                          "\n"
                          "b\t0.5\t0\tg2\n"
                          "c\t0.3\t0.5\tg1\n");
    const auto b = read_battery(in, "mem");
    REQUIRE(b.has_statistics());
    REQUIRE(b.has_groups());
    CHECK(b.group_names().size() == 2);
    CHECK(b.group_index()[2] == 0);
    CHECK(b.group_label(1) == "g2");
    // 1.6449 rounds z_0.05, so its tail misses 0.05 by about 5e-6.
    const auto v = consistency_check(b);
    REQUIRE(v.size() == 2);
    CHECK(v[0].index == 0);
    CHECK(std::fabs(v[0].p_value - v[0].expected) < 1e-5);
}

TEST_CASE("consistency check")
{
    const double t = 1.6448536269514722;
    const TestBattery ok({"a", "b"}, {distfn::upper_tail(t), 0.5}, std::vector<double>{t, 0.0});
    CHECK(consistency_check(ok).empty());

    const TestBattery flipped({"a", "b"}, {distfn::lower_tail(t), 0.5},
                              std::vector<double>{t, 0.0});
    const auto v = consistency_check(flipped);
    REQUIRE(v.size() == 1);
    CHECK(v[0].index == 0);

    const TestBattery two({"a"}, {distfn::noncentral_chisq1_upper_tail(4.0, 0.0)},
                          std::vector<double>{-2.0}, std::nullopt, Sidedness::two_sided);
    CHECK(consistency_check(two).empty());
    CHECK(distfn::noncentral_chisq1_upper_tail(4.0, 0.0) ==
          doctest::Approx(2.0 * distfn::upper_tail(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(consistency_check(TestBattery::from_p_values({0.1})), ContractError);
}

TEST_CASE("battery round trip is bit-exact")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 3.0);
    std::vector<std::string> ids, groups;
    std::vector<double> p, t;
    for (int j = 0; j < 200; ++j) {
        ids.push_back("snp" + std::to_string(j));
        t.push_back(z(rng));
        p.push_back(j % 7 == 0 ? std::pow(10.0, -300.0 * u(rng)) : u(rng));
        groups.push_back("g" + std::to_string(j % 5));
    }
    const TestBattery b(ids, p, t, groups);
    std::stringstream buf;
    write_battery(buf, b);
    const auto back = read_battery(buf, "mem");
    REQUIRE(back.size() == b.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
        CHECK(back.ids()[j] == b.ids()[j]);
        CHECK(back.p(j) == b.p(j));
        CHECK(back.statistics()[j] == b.statistics()[j]);
        CHECK(back.group_label(j) == b.group_label(j));
    }
}

TEST_CASE("weights, means and mixtures files")
{
    std::istringstream w("id\tweight\nb\t1.5\na\t0.5\n");
    const auto named = read_weights(w, "mem");
    const auto battery = TestBattery({"a", "b"}, {0.1, 0.2});
    const auto aligned = align_to_battery(battery, named);
    CHECK(aligned[0] == 0.5);
    CHECK(aligned[1] == 1.5);

    std::istringstream bad("id\tweight\na\t-1\n");
    CHECK_THROWS_AS(read_weights(bad, "mem"), ParseError);

    std::istringstream missing("id\tweight\na\t1\nc\t1\n");
    CHECK_THROWS_AS(align_to_battery(battery, read_weights(missing, "mem")), ContractError);

    std::istringstream means("id\tmean\nx\t-1\ny\t2.5\n");
    CHECK(read_means(means, "mem").values[0] == -1.0);

    std::istringstream mix("mass\tlocation\n0.9\t0\n0.1\t3\n");
    CHECK(read_mixture(mix, "mem").size() == 2);
    std::istringstream badmix("mass\tlocation\n0.9\t0\n0.2\t3\n");
    CHECK_THROWS(read_mixture(badmix, "mem"));
}

TEST_CASE("format_real round trips")
{
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_real(std::nan("")) == "nan");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e10, 1e10);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        CHECK(std::stod(format_real(x)) == x);
    }
}
