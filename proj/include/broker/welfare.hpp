#pragma once

#include <array>
#include <string>
#include <vector>

#include "broker/analytic.hpp"
#include "broker/lp_oracle.hpp"
#include "broker/model.hpp"

namespace broker {

struct WelfareReport {
    MarketParams params;
    double broker_revenue = 0.0;
    double consumer_surplus_total = 0.0;
    /// U(x) - m_c(x) per type. Empty for closed-form reports.
    std::vector<double> information_rent_by_type;
    std::array<double, 2> seller_profits{0.0, 0.0};
    double transport_cost = 0.0;
    /// Realized gross surplus: value of the purchase minus transport.
    double total_welfare = 0.0;
    double first_best = 0.0;
    double efficiency_loss = 0.0;

    /// total_welfare - (broker + consumers + sellers).
    [[nodiscard]] double identity_residual() const;
};

/// Replays the purchase rule cell by cell. Throws InputError naming the first violated constraint when the
/// mechanism is infeasible for the scenario.
WelfareReport report(const Mechanism &mech, const ScenarioSpec &scenario);

/// Closed-form report for a threshold mechanism on the uniform population.
WelfareReport report(const ThresholdMechanism &mech);

/// Sum of lambda(x)(V1 - xt); the symmetric market uses the nearer seller instead.
double first_best_surplus(const MarketParams &params, const Population &pop);

struct ComparisonRow {
    std::string name;
    double revenue = 0.0;
    double rent_total = 0.0;
    double efficiency_loss = 0.0;
    double total_welfare = 0.0;
};

struct ComparisonDelta {
    std::string from;
    std::string to;
    double revenue = 0.0;
    double rent_total = 0.0;
    double efficiency_loss = 0.0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::vector<ComparisonDelta> deltas;
    /// Ordering facts that failed, empty when all hold.
    std::vector<std::string> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Rows named "no_privacy", "duopoly" and "no_obedience" are checked against the known orderings.
Comparison compare(const std::vector<std::string> &names, const std::vector<WelfareReport> &reports,
                   double tol = 1e-9);

}  // namespace broker
