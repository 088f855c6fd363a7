#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "broker/analytic.hpp"
#include "broker/lp_oracle.hpp"
#include "broker/welfare.hpp"

namespace brokerctl {

using json = nlohmann::ordered_json;

inline constexpr const char *kToolName = "brokerctl";
inline constexpr const char *kToolVersion = "1.0.0";

struct ScenarioFile {
    broker::ScenarioSpec spec;
    /// Optional mechanism to audit instead of solving: the threshold family at this threshold.
    std::optional<double> threshold;
};

/// Throws broker::InputError with the offending field in the message.
ScenarioFile parse_scenario(const json &j);
ScenarioFile load_scenario(const std::string &path);
json load_json(const std::string &path);

json scenario_to_json(const ScenarioFile &s);
std::string scenario_hash(const json &scenario);

/// Rounds to 9 significant digits for reporting.
double metric(double v);

json mechanism_to_json(const broker::Mechanism &m, const broker::Population &pop);
broker::Mechanism mechanism_from_json(const json &j);

json audit_to_json(const broker::FeasibilityAudit &a);
json welfare_to_json(const broker::WelfareReport &w);
json structure_to_json(const broker::StructureReport &r);

}  // namespace brokerctl
