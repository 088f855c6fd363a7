#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "scenario_io.hpp"

using namespace brokerctl;

namespace {
json base() { return json::parse(R"({"V": 1000, "t": 1, "H": 10, "L": 9, "population": {"uniform": 10}})"); }

std::string error_of(const json &j) {
    try {
        (void)parse_scenario(j);
    } catch (const broker::InputError &e) {
        return e.what();
    }
    return "";
}
}  // namespace

TEST_CASE("scenario parsing") {
    const auto s = parse_scenario(base());
    CHECK(s.spec.params.V2 == 999.0);
    CHECK(s.spec.population.is_uniform());
    CHECK(s.spec.obedience);
    CHECK_FALSE(s.threshold);
}

TEST_CASE("parse errors name the field") {
    auto j = base();
    j["H"] = "ten";
    CHECK(error_of(j).find("H") == 0);
    j = base();
    j["colour"] = 1;
    CHECK(error_of(j).find("colour") != std::string::npos);
    j = base();
    j["population"] = json::parse(R"([{"x": 0.2, "mass": 0.5}, {"x": 0.7, "mass": 0.4}])");
    CHECK(error_of(j).find("population") == 0);
    j = base();
    j["V1"] = 1000;
    CHECK(error_of(j).find("V") == 0);
    j = base();
    j["toggles"] = {{"obedience", 1}};
    CHECK(error_of(j).find("toggles.obedience") == 0);
}

TEST_CASE("scenario round trip and hash") {
    auto j = base();
    j["mechanism"] = {{"threshold", 0.8}};
    const auto s = parse_scenario(j);
    const auto back = parse_scenario(scenario_to_json(s));
    CHECK(scenario_hash(scenario_to_json(s)) == scenario_hash(scenario_to_json(back)));
    CHECK(*back.threshold == 0.8);
    auto other = s;
    other.spec.params.H = 10.5;
    CHECK(scenario_hash(scenario_to_json(s)) != scenario_hash(scenario_to_json(other)));
}

TEST_CASE("mechanism json keeps full precision") {
    auto s = parse_scenario(base());
    const auto r = broker::solve(s.spec);
    const auto m = mechanism_from_json(mechanism_to_json(r.mechanism, r.population));
    CHECK(m.consumer_fees == r.mechanism.consumer_fees);
    CHECK(m.scheme == r.mechanism.scheme);
}

TEST_CASE("verify exit codes") {
    std::ostringstream os;
    CHECK(cmd_verify(BROKER_SCENARIO_DIR "/three_consumers.json", {}, os) == kOk);
    std::ostringstream bad;
    CHECK(cmd_verify(BROKER_SCENARIO_DIR "/tampered_threshold.json", {}, bad) == kVerifyFailure);
    CHECK(bad.str().find("OB[S1:H->L]") != std::string::npos);
    std::ostringstream none;
    CHECK_THROWS_AS(cmd_verify(BROKER_SCENARIO_DIR "/bad_mass.json", {}, none), broker::InputError);
}

TEST_CASE("analytic dispatch") {
    auto s = parse_scenario(base());
    CHECK(analytic(s.spec).method == "threshold_duopoly");
    s.spec.population = broker::Population::discrete({{0.1, 0.5}, {0.6, 0.3}, {0.8, 0.1}, {0.9, 0.1}});
    CHECK_THROWS_AS(analytic(s.spec), broker::UnsupportedScenario);
}
