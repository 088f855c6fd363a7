#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "scenario_io.hpp"

namespace brokerctl {

enum Exit : int { kOk = 0, kSolverFailure = 1, kInvalidInput = 2, kVerifyFailure = 3 };

struct Overrides {
    std::optional<std::size_t> grid;
    std::optional<double> tolerance;
};

void apply(const Overrides &o, ScenarioFile &s);

struct AnalyticOutcome {
    std::string method;
    broker::Population population;
    broker::Mechanism mechanism;
    /// Objective of the mechanism on the finite population.
    double revenue = 0.0;
    std::optional<double> closed_form_revenue;
    std::optional<broker::WelfareReport> closed_form_welfare;
    json extra = json::object();
};

/// Closed-form solution for the scenario. Throws broker::UnsupportedScenario when none applies.
AnalyticOutcome analytic(const broker::ScenarioSpec &spec);

/// Allowed |LP - analytic| for a scenario: 1e-3 t on uniform grids, 1e-6 otherwise.
double gap_tolerance(const broker::ScenarioSpec &spec);

int cmd_solve(const ScenarioFile &s, const std::string &engine, const std::string &out, bool debug_lp);
int cmd_verify(const std::string &path, const Overrides &o, std::ostream &os);
int cmd_sweep(const ScenarioFile &s, const std::string &param, double from, double to, double step,
              const std::string &out);
int cmd_repro(const std::string &target, std::ostream &os);

}  // namespace brokerctl
