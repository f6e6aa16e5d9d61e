#include "nmlc/discrete.hpp"
#include "nmlc/error.hpp"
#include "nmlc/zoo.hpp"

#include <doctest.h>

#include <cmath>

using namespace nmlc;

namespace {

RationalEstimator mle_of(const DiscreteModel& m)
{
    return [&m](PointView x) { return m.mle_rational(x); };
}

RationalParams half() { return RationalParams::make({1}, 2); }

} // namespace

TEST_CASE("comp_bruteforce_discrete examples")
{
    const auto one = Luckiness::constant_one();
    CHECK(comp_bruteforce_discrete(*make_bernoulli(2), one) == 2.5);
    CHECK(comp_bruteforce_discrete(*make_bernoulli(1), one) == 2.0);
    CHECK(comp_bruteforce_discrete(*make_bernoulli(2), Luckiness::indicator(0.0, 0.5)) == 1.5);
}

TEST_CASE("enumeration budget")
{
    try {
        comp_bruteforce_discrete(*make_bernoulli(24), Luckiness::constant_one());
        FAIL("expected enumeration_budget_exceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::enumeration_budget_exceeded);
    }
    CHECK_NOTHROW(comp_bruteforce_discrete(*make_bernoulli(10), Luckiness::constant_one(), 1024));
    CHECK_THROWS_AS(comp_bruteforce_discrete(*make_bernoulli(10), Luckiness::constant_one(), 1023), Error);
}

TEST_CASE("pushforward_pmf examples")
{
    const auto m = make_bernoulli(2);
    CHECK(pushforward_pmf(*m, mle_of(*m), Params{0.5}, half()) == 0.5);
    CHECK(pushforward_pmf(*m, mle_of(*m), Params{0.0}, RationalParams::make({0}, 1)) == 1.0);
    CHECK(pushforward_pmf(*m, mle_of(*m), Params{0.5}, RationalParams::make({1}, 4)) == 0.0);
}

TEST_CASE("rational keys are normalized")
{
    CHECK(RationalParams::make({2}, 4) == half());
    CHECK(RationalParams::make({0}, 7) == RationalParams::make({0}, 1));
    CHECK(RationalParams::make({3, 6}, 9).to_double() == Params{1.0 / 3.0, 2.0 / 3.0});
}

TEST_CASE("comp_via_pushforward examples")
{
    const auto one = Luckiness::constant_one();
    const auto b2 = make_bernoulli(2);
    CHECK(comp_via_pushforward(*b2, one) == 2.5);

    // Any estimator works; here the constant map to 1/2.
    const RationalEstimator constant = [](PointView) { return half(); };
    CHECK(comp_via_pushforward(*b2, constant, one) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(comp_via_pushforward(*make_multinomial(3, 2), one) == doctest::Approx(4.5).epsilon(1e-15));
}

TEST_CASE("comp_via_sufficient_stat examples")
{
    const auto one = Luckiness::constant_one();
    CHECK(comp_via_sufficient_stat(*make_bernoulli(2), one) == 2.5);
    CHECK(comp_via_sufficient_stat(*make_bernoulli(1), one) == 2.0);
    // sum_s C(4,s) (s/4)^s (1 - s/4)^(4-s) = 2 + 27/32 + 3/8 = 103/32.
    CHECK(comp_via_sufficient_stat(*make_bernoulli(4), one) == doctest::Approx(3.21875).epsilon(1e-15));
    CHECK(comp_bruteforce_discrete(*make_bernoulli(4), one) == doctest::Approx(3.21875).epsilon(1e-15));
}

TEST_CASE("three-way agreement on the discrete zoo")
{
    const auto one = Luckiness::constant_one();
    const auto lucky = Luckiness::indicator(0.2, 0.7);
    for (int n = 1; n <= 12; ++n) {
        CAPTURE(n);
        const auto m = make_bernoulli(n);
        for (const auto* v : {&one, &lucky}) {
            const auto r = comp_discrete_all(*m, *v);
            CHECK(r.max_discrepancy <= 1e-12);
        }
    }
    for (int n = 1; n <= 6; ++n) {
        CAPTURE(n);
        const auto r = comp_discrete_all(*make_multinomial(3, n), one);
        CHECK(r.max_discrepancy <= 1e-12);
    }
    const auto r4 = comp_discrete_all(*make_multinomial(4, 4), Luckiness::parse("box:0,0.5;0,0.5;0,1"));
    CHECK(r4.max_discrepancy <= 1e-12);
}

TEST_CASE("pushforward distributions are normalized")
{
    const auto bern = make_bernoulli(7);
    for (double theta : {0.0, 0.13, 0.5, 0.91, 1.0}) {
        double total = 0.0;
        for (const auto& [key, mass] : pushforward_distribution(*bern, mle_of(*bern), Params{theta})) total += mass;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    }
    const auto multi = make_multinomial(3, 4);
    for (const Params& theta : {Params{0.2, 0.3}, Params{1.0, 0.0}, Params{0.0, 0.5}}) {
        double total = 0.0;
        for (const auto& [key, mass] : pushforward_distribution(*multi, mle_of(*multi), theta)) total += mass;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("luckiness linearity and monotonicity")
{
    const auto m = make_bernoulli(6);
    const auto v = Luckiness::indicator(0.1, 0.6);
    const double base = comp_bruteforce_discrete(*m, v);
    for (double c : {0.0, 0.5, 1.0, 3.25}) {
        CHECK(comp_bruteforce_discrete(*m, v.scaled(c)) == doctest::Approx(c * base).epsilon(1e-14));
        CHECK(comp_via_pushforward(*m, v.scaled(c)) == doctest::Approx(c * base).epsilon(1e-14));
        CHECK(comp_via_sufficient_stat(*m, v.scaled(c)) == doctest::Approx(c * base).epsilon(1e-14));
    }
    const auto wider = Luckiness::indicator(0.0, 0.8);
    const auto one = Luckiness::constant_one();
    CHECK(comp_bruteforce_discrete(*m, v) <= comp_bruteforce_discrete(*m, wider));
    CHECK(comp_bruteforce_discrete(*m, wider) <= comp_bruteforce_discrete(*m, one));
    const auto bump = Luckiness::custom("bump", [](ParamView t) { return 4.0 * t[0] * (1.0 - t[0]); });
    CHECK(comp_bruteforce_discrete(*m, bump) <= comp_bruteforce_discrete(*m, one));
    CHECK(comp_via_pushforward(*m, bump) == doctest::Approx(comp_bruteforce_discrete(*m, bump)).epsilon(1e-14));
}

namespace {

// Two coin flips without a registered statistic.
class BareCoins final : public DiscreteModel {
public:
    BareCoins() : DiscreteModel(DataSpace::discrete(2, 2), ParamSpace{1, {{0.0, 1.0}}}) {}
    std::string id() const override { return "bare-coins"; }
    std::string description() const override { return "two coin flips"; }
    double density(ParamView t, PointView x) const override
    {
        const double k = x[0] + x[1];
        return std::pow(t[0], k) * std::pow(1.0 - t[0], 2.0 - k);
    }
    MleResult mle(PointView x) const override { return {{(x[0] + x[1]) / 2.0}, false}; }
    RationalParams mle_rational(PointView x) const override
    {
        return RationalParams::make({std::llround(x[0] + x[1])}, 2);
    }
    std::vector<Point> sample(ParamView, std::uint64_t, std::size_t count) const override
    {
        return std::vector<Point>(count, Point{0.0, 0.0});
    }
};

} // namespace

TEST_CASE("models without a sufficient statistic")
{
    const BareCoins m;
    try {
        comp_via_sufficient_stat(m, Luckiness::constant_one());
        FAIL("expected no_sufficient_stat");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_sufficient_stat);
    }
    CHECK(comp_bruteforce_discrete(m, Luckiness::constant_one()) == 2.5);
    CHECK(comp_via_pushforward(m, Luckiness::constant_one()) == 2.5);
}
