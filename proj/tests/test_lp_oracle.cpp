#include <cmath>

#include "broker/canonical.hpp"
#include "broker/lp_oracle.hpp"
#include "doctest.h"

using namespace broker;

TEST_CASE("program layout and round trip") {
    const auto sc = canonical::three_consumers();
    const auto prog = build_program(sc);
    CHECK(prog.lp.num_variables() == 5 * 3 + 2);
    const auto r = solve(sc);
    const auto x = prog.encode(r.mechanism);
    const auto back = prog.decode(x);
    for (std::size_t i = 0; i < 3; ++i) {
        for (Signal s : kSignals) CHECK(at(back.scheme[i], s) == doctest::Approx(at(r.mechanism.scheme[i], s)));
    }
}

TEST_CASE("three-consumer oracle") {
    const auto r = solve(canonical::three_consumers());
    CHECK(r.audit.feasible());
    CHECK(r.revenue == doctest::Approx(999.5375).epsilon(1e-12));
    CHECK(at(r.mechanism.scheme[1], Signal::LL) == doctest::Approx(0.125));
    CHECK(at(r.mechanism.scheme[2], Signal::LL) == doctest::Approx(0.125));
    CHECK(r.binding.find("IR[x2]")->binding);
    CHECK_FALSE(r.binding.find("IR[x3]")->binding);
    CHECK(r.binding.find("IR[x3]")->slack == doctest::Approx(0.125));
}

TEST_CASE("dropping a row by name") {
    const auto sc = canonical::three_consumers();
    BuildOptions o;
    o.drop_rows = {"IC[x1->x2]"};
    const auto full = build_program(sc);
    const auto loose = build_program(sc, o);
    CHECK(loose.lp.constraints.size() + 1 == full.lp.constraints.size());
    o.drop_rows = {"no-such-row"};
    CHECK_THROWS_AS(build_program(sc, o), InputError);
}

TEST_CASE("toggles order revenue") {
    auto sc = canonical::uniform_market(10);
    const double both = solve(sc).revenue;
    sc.obedience = false;
    const double ic = solve(sc).revenue;
    sc.consumer_ic = false;
    const double open = solve(sc).revenue;
    CHECK(open >= ic - 1e-9);
    CHECK(ic >= both - 1e-9);
    CHECK(both == doctest::Approx(999.1422222222).epsilon(1e-12));
}

TEST_CASE("binding report groups by family") {
    const auto sc = canonical::three_consumers();
    const auto r = solve(sc);
    const auto b = binding_report(r, sc);
    REQUIRE_FALSE(b.empty());
    for (std::size_t k = 1; k < b.size(); ++k) CHECK(static_cast<int>(b[k - 1].family) <= static_cast<int>(b[k].family));
}

TEST_CASE("brute force agrees with the oracle on a small instance") {
    ScenarioSpec sc;
    sc.params = MarketParams::asymmetric(100, 5, 10, 5);
    sc.population = Population::discrete({{0.2, 0.8}, {0.7, 0.2}});
    const auto rep = brute_force_verify(sc);
    CHECK_FALSE(rep.counterexample);
    CHECK(rep.grid_revenue <= rep.lp_revenue + 1e-9);
    CHECK(rep.lp_revenue - rep.grid_revenue <= rep.resolution_bound);
}
