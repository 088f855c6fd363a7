#include <cmath>

#include "broker/model.hpp"
#include "doctest.h"

using namespace broker;

namespace {
MarketParams base() { return MarketParams::asymmetric(1000, 1, 10, 9); }
}  // namespace

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(base().validate());
    CHECK_THROWS_AS(MarketParams::asymmetric(1000, 1, 9, 10).validate(), InputError);
    CHECK_THROWS_AS(MarketParams::asymmetric(1000, 0, 10, 9).validate(), InputError);
    CHECK_THROWS_AS(MarketParams::asymmetric(10, 1, 10, 9).validate(), InputError);
    auto p = base();
    p.V2 = p.V1;
    CHECK_THROWS_AS(p.validate(), InputError);
    CHECK_NOTHROW(MarketParams::symmetric(10000, 18, 10, 1).validate());
}

TEST_CASE("population checks") {
    CHECK_THROWS_AS(Population::discrete({{0.2, 0.5}, {0.7, 0.4}}), InputError);
    CHECK_THROWS_AS(Population::discrete({{1.2, 1.0}}), InputError);
    CHECK_THROWS_AS(Population::discrete({}), InputError);
    const auto g = discretize_uniform(4);
    REQUIRE(g.size() == 4);
    CHECK(g.types()[0].x == doctest::Approx(0.125));
    CHECK(g.types()[3].mass == doctest::Approx(0.25));
}

TEST_CASE("segment boundary and ties") {
    const auto p = base();
    CHECK(x_lower(p) == doctest::Approx(0.5));
    CHECK(in_first_segment(0.5, p));
    CHECK_FALSE(in_first_segment(0.5 + 1e-6, p));
    // at x_lower, seller 1 at H and seller 2 at L tie; ties go to seller 1
    const auto o = purchase(0.5, Price::H, Price::L, p);
    CHECK(o.seller == Seller::S1);
    CHECK(o.price == 10.0);
    CHECK(purchase(0.6, Signal::HL, p).seller == Seller::S2);
    CHECK(purchase(0.9, Signal::LL, p).seller == Seller::S1);
    CHECK(x_lower(MarketParams::asymmetric(1000, 1, 20, 9)) == 0.0);
}

TEST_CASE("signal helpers") {
    CHECK(make_signal(Price::H, Price::L) == Signal::HL);
    CHECK(price_of(Signal::LH, Seller::S2) == Price::H);
    CHECK(with_price(Signal::HH, Seller::S1, Price::L) == Signal::LH);
    CHECK(to_string(Signal::LL) == "LL");
}

TEST_CASE("utilities and seller revenue under a scheme") {
    const auto p = base();
    const auto pop = Population::discrete({{0.25, 0.5}, {0.75, 0.5}});
    Mechanism m;
    m.scheme = {{1, 0, 0, 0}, {0, 0.5, 0, 0.5}};
    m.consumer_fees = {0, 0};
    CHECK(truthful_utility(0, m, pop, p) == doctest::Approx(1000 - 0.25 - 10));
    const double u1 = 0.5 * (1000 - 0.75 - 9) + 0.5 * (999 - 0.25 - 9);
    CHECK(truthful_utility(1, m, pop, p) == doctest::Approx(u1));
    CHECK(misreport_utility(0.75, 0.25, m, pop, p) == doctest::Approx(1000 - 0.75 - 10));
    CHECK(seller_expected_revenue(Seller::S1, m, pop, p) == doctest::Approx(0.5 * 10 + 0.25 * 9));
    CHECK(seller_expected_revenue(Seller::S2, m, pop, p) == doctest::Approx(0.25 * 9));
}

TEST_CASE("max extractable fees satisfy IC and IR") {
    const auto p = base();
    const auto pop = Population::discrete({{0.25, 0.4}, {0.6, 0.3}, {0.9, 0.3}});
    std::vector<SignalDistribution> s{{1, 0, 0, 0}, {0, 0.3, 0, 0.7}, {0, 0.5, 0, 0.5}};
    const auto f = max_extractable_fees(s, pop, p);
    REQUIRE(f);
    Mechanism m{s, *f, {0, 0}};
    m.seller_fees = {seller_expected_revenue(Seller::S1, m, pop, p), seller_expected_revenue(Seller::S2, m, pop, p)};
    AuditToggles tg;
    tg.obedience = false;
    const auto a = audit_mechanism(m, pop, p, tg);
    CHECK(a.feasible());
    // without IC each fee equals the gross utility
    const auto g = max_extractable_fees(s, pop, p, false);
    for (std::size_t i = 0; i < 3; ++i) CHECK((*g)[i] == doctest::Approx(truthful_utility(i, m, pop, p)));
}

TEST_CASE("audit flags an obedience violation") {
    const auto p = base();
    const auto pop = Population::discrete({{0.2, 1.0}});
    Mechanism m{{{0, 0, 0, 1}}, {0}, {0, 0}};
    // recommending L to seller 1 at x = 0.2 when H still wins the sale
    const auto a = audit_mechanism(m, pop, p, {});
    bool flagged = false;
    for (const auto &e : a.violations()) flagged = flagged || e.family == ConstraintFamily::Obedience;
    CHECK(flagged);
    CHECK(obedience_slack(Seller::S1, Price::L, Price::H, m, pop, p) < 0.0);
}
