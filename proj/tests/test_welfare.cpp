#include <cmath>

#include "broker/canonical.hpp"
#include "broker/welfare.hpp"
#include "doctest.h"

using namespace broker;

TEST_CASE("closed-form welfare identity") {
    const auto p = MarketParams::asymmetric(1000, 1, 10, 9);
    for (const auto &m : {solve_privacy_duopoly(p), solve_no_obedience(p)}) {
        const auto w = report(m);
        CHECK(std::abs(w.identity_residual()) <= 1e-9);
        CHECK(w.first_best == doctest::Approx(999.5));
        CHECK(w.total_welfare == doctest::Approx(w.first_best - w.efficiency_loss));
    }
}

TEST_CASE("grid report agrees with closed form") {
    const auto sc = canonical::uniform_market(50);
    const auto r = solve(sc);
    const auto g = report(r.mechanism, sc);
    const auto c = report(solve_privacy_duopoly(sc.params));
    CHECK(std::abs(g.identity_residual()) <= 1e-9);
    CHECK(std::abs(g.efficiency_loss - c.efficiency_loss) <= 1e-4 * sc.params.t);
    CHECK(std::abs(g.total_welfare - c.total_welfare) <= 1e-4 * sc.params.t);
    CHECK(std::abs(g.broker_revenue - c.broker_revenue) <= sc.params.t / 50.0);
    CHECK(std::abs(g.consumer_surplus_total - c.consumer_surplus_total) <= sc.params.t / 50.0);
}

TEST_CASE("infeasible mechanism names the constraint") {
    const auto sc = canonical::three_consumers();
    auto m = solve(sc).mechanism;
    m.consumer_fees[2] += 5.0;
    try {
        (void)report(m, sc);
        FAIL("expected InputError");
    } catch (const InputError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("infeasible") != std::string::npos);
        CHECK(msg.find("x3") != std::string::npos);
    }
}

TEST_CASE("comparison orderings") {
    const auto p = MarketParams::asymmetric(1000, 1, 10, 9);
    auto open = canonical::uniform_market(20);
    open.consumer_ic = false;
    const auto np = report(solve(open).mechanism, open);
    const auto du = report(solve_privacy_duopoly(p));
    const auto no = report(solve_no_obedience(p));
    const auto c = compare({"no_privacy", "duopoly", "no_obedience"}, {np, du, no});
    CHECK(c.ok());
    CHECK(c.rows.size() == 3);
    const auto bad = compare({"no_privacy", "duopoly", "no_obedience"}, {du, np, no});
    CHECK_FALSE(bad.ok());
}

TEST_CASE("first best in the symmetric market uses the nearer seller") {
    const auto p = MarketParams::symmetric(10000, 18, 10, 1);
    const auto pop = Population::discrete({{0.25, 0.5}, {0.75, 0.5}});
    CHECK(first_best_surplus(p, pop) == doctest::Approx(10000 - 18 * 0.25));
}
