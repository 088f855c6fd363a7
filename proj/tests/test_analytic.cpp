#include <cmath>

#include "broker/analytic.hpp"
#include "broker/canonical.hpp"
#include "doctest.h"

using namespace broker;

namespace {
MarketParams base() { return MarketParams::asymmetric(1000, 1, 10, 9); }
}  // namespace

TEST_CASE("step function") {
    const StepFunction f({0.0, 0.5, 1.0}, {1.0, 0.5});
    CHECK(f(0.5) == 1.0);
    CHECK(f(0.51) == 0.5);
    CHECK(f.integral(0.25, 0.75) == doctest::Approx(0.375));
    CHECK_FALSE(f.continuous_at(0.5));
    CHECK(f.continuous_at(0.7));
    CHECK_THROWS_AS(StepFunction({0.0, 1.0}, {0.1, 0.2}), InputError);
}

TEST_CASE("thresholds") {
    const auto p = base();
    CHECK(optimal_threshold_x_star(p) == doctest::Approx(8.0 / 9.0));
    CHECK(single_mass_threshold_x_star(p) == doctest::Approx(1.0 - 0.5 / 9.0));
    CHECK(x_double_star(p) == doctest::Approx(0.5));
    const auto q = MarketParams::asymmetric(1000, 1, 9.5, 9);
    CHECK(x_lower(q) == doctest::Approx(0.75));
    CHECK(x_double_star(q) == doctest::Approx(0.75));
}

TEST_CASE("duopoly closed form") {
    const auto m = solve_privacy_duopoly(base());
    CHECK(m.x_star == doctest::Approx(8.0 / 9.0));
    CHECK(m.revenue() == doctest::Approx(999.098765432).epsilon(1e-11));
    CHECK(m.payoff(m.x_lower) == doctest::Approx(0.388888889));
    CHECK(m.fee(0.7) == doctest::Approx(990.1111111));
    CHECK(m.fee(0.97) == doctest::Approx(990.0));
    CHECK(m.fee(1.0) == doctest::Approx(990.0));
    CHECK(m.fee(0.3) == doctest::Approx(989.1111111));
    CHECK(m.signal(0.3) == SignalDistribution{1, 0, 0, 0});
    CHECK(m.y(0.95) == doctest::Approx(0.5));
    // rent is positive up to the threshold and zero beyond it
    CHECK(m.payoff(0.8) > 0.0);
    CHECK(std::abs(m.payoff(0.95)) <= 1e-12);
}

TEST_CASE("revenue is maximized at the smallest feasible threshold") {
    const auto p = base();
    const double best = solve_privacy_duopoly(p).revenue();
    for (double th = 0.9; th <= 1.0; th += 0.02) CHECK(make_threshold_mechanism(p, th).revenue() < best);
    const auto no = solve_no_obedience(p);
    CHECK(no.revenue() == doctest::Approx(999.25));
    CHECK(no.revenue() > best);
}

TEST_CASE("grid threshold family") {
    const auto p = base();
    for (std::size_t n : {10u, 25u, 50u}) {
        const auto g = threshold_on_grid(p, n, true);
        // the rule's threshold is already the best family member with obedience on
        CHECK(g.threshold == doctest::Approx(grid_rule_threshold(p, n, true)));
    }
    const auto g = threshold_on_grid(p, 50, false);
    CHECK(g.threshold == doctest::Approx(0.52));
    CHECK(g.revenue >= threshold_on_grid_at(p, 50, 0.5).revenue);
}

TEST_CASE("three consumer branch tree") {
    const auto sc = canonical::three_consumers();
    const auto &ty = sc.population.types();
    const auto b = solve_three_consumers(sc.params, {ty[0].x, ty[1].x, ty[2].x}, {ty[0].mass, ty[1].mass, ty[2].mass});
    REQUIRE(b.feasible);
    CHECK(b.y2 == doctest::Approx(0.125));
    CHECK(b.y3 == doctest::Approx(0.125));
    CHECK(b.revenue == doctest::Approx(999.5375));
    CHECK(std::abs(b.residual_9) <= 1e-9);
    CHECK(std::abs(b.residual_10) <= 1e-9);
}

TEST_CASE("symmetric two-consumer extraction") {
    const auto sc = canonical::symmetric_pair(false);
    const auto &ty = sc.population.types();
    const auto a = solve_symmetric_two_consumer_no_obedience(sc.params, ty[0].x, ty[1].x, {ty[0].mass, ty[1].mass});
    CHECK(a.revenue == doctest::Approx(9993.19375));
}

TEST_CASE("structure checks pass on the oracle and fail on a bent scheme") {
    const auto sc = canonical::uniform_market(10);
    const auto r = solve(sc);
    CHECK(check_structure(r, sc).passed());
    auto bent = r.mechanism;
    bent.scheme[0] = {0, 0, 0, 1};
    const auto rep = check_structure(bent, r.population, sc.params, true);
    CHECK_FALSE(rep.find("first-segment-HH-only")->passed);
}

TEST_CASE("symmetric market is rejected by threshold builders") {
    CHECK_THROWS_AS(solve_privacy_duopoly(MarketParams::symmetric(10000, 18, 10, 1)), UnsupportedScenario);
}
