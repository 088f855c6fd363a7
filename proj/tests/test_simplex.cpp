#include <cmath>
#include <random>

#include "canonical_lps.hpp"
#include "doctest.h"

using namespace broker::lp;

TEST_CASE("canonical LPs reach textbook answers") {
    for (const auto &c : testlps::canonical_cases()) {
        CAPTURE(c.name);
        for (bool par : {false, true}) {
            SimplexOptions o;
            o.parallel = par;
            const auto s = solve(c.lp, o);
            REQUIRE(s.status == c.status);
            if (c.status != Status::Optimal) continue;
            CHECK(std::abs(s.objective_value - c.objective) <= 1e-9);
            for (std::size_t j = 0; j < c.point.size(); ++j) CHECK(std::abs(s.primal[j] - c.point[j]) <= 1e-9);
            CHECK(audit(c.lp, s.primal).feasible());
        }
    }
}

TEST_CASE("serial and parallel pivots agree bit for bit") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t rows : {5u, 40u, 300u}) {
        const std::size_t stride = 2 * rows + 1;
        std::vector<double> a(rows * stride);
        for (auto &v : a) v = u(rng);
        a[3 * stride + 2] = 0.75;
        auto b = a;
        kernels::pivot_serial(a.data(), rows, stride, stride - 1, 3, 2);
        kernels::pivot_parallel(b.data(), rows, stride, stride - 1, 3, 2);
        CHECK(a == b);
    }
}

TEST_CASE("solve path is identical with and without the parallel kernel") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    LinearProgram lp;
    const std::size_t n = 60;
    for (std::size_t j = 0; j < n; ++j) lp.objective.push_back(u(rng));
    for (std::size_t i = 0; i < 40; ++i) {
        Constraint c;
        for (std::size_t j = 0; j < n; ++j) c.coefficients.push_back(u(rng));
        c.rhs = 10.0 * u(rng);
        lp.constraints.push_back(c);
    }
    lp.normalize();
    SimplexOptions serial;
    serial.parallel = false;
    const auto a = solve(lp, serial);
    const auto b = solve(lp);
    REQUIRE(a.status == Status::Optimal);
    CHECK(a.iterations == b.iterations);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.primal == b.primal);
}

TEST_CASE("secondary objective breaks ties on the optimal face") {
    LinearProgram lp;
    lp.objective = {1, 1};
    lp.constraints.push_back({{1, 1}, Relation::LessEqual, 1.0, "cap"});
    lp.secondary = {0, 1};
    lp.normalize();
    const auto s = solve(lp);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0));
    CHECK(s.primal[1] == doctest::Approx(1.0));
    lp.secondary = {1, 0};
    CHECK(solve(lp).primal[0] == doctest::Approx(1.0));
}

TEST_CASE("audit reports violated rows and bounds") {
    auto lp = testlps::make({1, 1}, {{{1, 1}, {Relation::LessEqual, 1.0}}});
    const auto r = audit(lp, {1.0, 0.5});
    CHECK_FALSE(r.feasible());
    CHECK(r.worst() == doctest::Approx(-0.5));
    CHECK(audit(lp, {-0.1, 0.0}).worst() == doctest::Approx(-0.1));
    CHECK(evaluate_objective(lp, {0.25, 0.5}) == doctest::Approx(0.75));
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram lp;
    lp.objective = {1, 2};
    lp.constraints.push_back({{1}, Relation::LessEqual, 1.0, "short"});
    CHECK_THROWS_AS(lp.normalize(), std::invalid_argument);
    LinearProgram nan;
    nan.objective = {std::nan("")};
    CHECK_THROWS_AS(nan.normalize(), std::invalid_argument);
}
