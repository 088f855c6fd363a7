#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "broker/lp_oracle.hpp"
#include "broker/model.hpp"

namespace broker {

/// Piecewise-constant function on [lo, hi]. Piece k covers (breaks[k], breaks[k+1]]; the first piece
/// also owns lo itself.
class StepFunction {
  public:
    StepFunction() = default;
    StepFunction(std::vector<double> breaks, std::vector<double> values);
    static StepFunction constant(double lo, double hi, double v);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double lo() const { return breaks_.front(); }
    [[nodiscard]] double hi() const { return breaks_.back(); }
    [[nodiscard]] const std::vector<double> &breaks() const { return breaks_; }
    [[nodiscard]] const std::vector<double> &values() const { return values_; }
    /// Integral of the function over [a, b] intersected with its domain.
    [[nodiscard]] double integral(double a, double b) const;
    /// True when x is not a break point (interior ones only).
    [[nodiscard]] bool continuous_at(double x, double eps = 0.0) const;

  private:
    std::vector<double> breaks_{0.0, 1.0};
    std::vector<double> values_{0.0};
};

/// Fees on the second segment [x_lower, 1] pinned down by the envelope condition with G(1) = 0.
class EnvelopeFees {
  public:
    EnvelopeFees() = default;
    EnvelopeFees(StepFunction y, const MarketParams &params);

    [[nodiscard]] const StepFunction &y() const { return y_; }
    /// Gross utility of truthful x under y(x): S1 at L on (L,L), S2 at L on (H,L).
    [[nodiscard]] double utility(double x) const;
    /// G(x) = U(x) - m_c(x) = integral over [x, 1] of (2y - 1)t.
    [[nodiscard]] double payoff(double x) const;
    [[nodiscard]] double fee(double x) const { return utility(x) - payoff(x); }
    /// Integral of the fee over [a, b], exact for the piecewise-linear schedule.
    [[nodiscard]] double fee_integral(double a, double b) const;
    [[nodiscard]] double payoff_integral(double a, double b) const;

  private:
    StepFunction y_;
    MarketParams params_;
};

EnvelopeFees payments_from_envelope(const StepFunction &y, const MarketParams &params);

/// Threshold mechanism on the uniform population: (H,H) on [0, x_lower], (L,L) up to x_star and an
/// even (L,L)/(H,L) split above.
struct ThresholdMechanism {
    MarketParams params;
    double x_lower = 0.0;
    double x_star = 0.0;
    EnvelopeFees fees;
    double fee_low_segment = 0.0;
    std::array<double, 2> seller_fees{0.0, 0.0};

    [[nodiscard]] double y(double x) const;
    [[nodiscard]] SignalDistribution signal(double x) const;
    [[nodiscard]] double fee(double x) const;
    /// Consumer payoff net of fees (the information rent).
    [[nodiscard]] double payoff(double x) const;
    [[nodiscard]] double revenue() const;
    [[nodiscard]] double consumer_surplus() const;
    [[nodiscard]] double efficiency_loss() const;
    [[nodiscard]] double transport_cost() const;
    /// Expected seller revenues U1, U2 under the scheme.
    [[nodiscard]] std::array<double, 2> seller_revenues() const;
};

/// max{x_lower, 1/2, 1 - 2 * lambda1 * (H-L)/L}, clamped to [x_lower, 1].
/// lambda1 defaults to x_lower, the first-segment mass of the uniform population.
double optimal_threshold_x_star(const MarketParams &params);
double optimal_threshold_x_star(const MarketParams &params, double lambda1);

/// max{x_lower, 1/2, 1 - x_lower(H-L)/L}: the bound that counts all mass above x* as (H,L). Comparison output only.
double single_mass_threshold_x_star(const MarketParams &params);

/// max{x_lower, 1/2}.
double x_double_star(const MarketParams &params);

/// Threshold mechanism for a given threshold, with fees from the envelope and binding seller IR.
ThresholdMechanism make_threshold_mechanism(const MarketParams &params, double threshold);

ThresholdMechanism solve_privacy_duopoly(const MarketParams &params);
ThresholdMechanism solve_no_obedience(const MarketParams &params);

struct FiniteSolution {
    Population population;
    Mechanism mechanism;
    double revenue = 0.0;
    /// Threshold used, for threshold-family solutions.
    double threshold = 0.0;
};

/// Full extraction. Uniform populations use the closed form V - t/2 for revenue and the grid for the mechanism.
FiniteSolution solve_no_privacy(const MarketParams &params, const Population &pop);

/// Threshold family on a uniform grid: (H,H) below x_lower, y averaged over each cell, maximal IC/IR fees and
/// seller fees equal to U_i. The rule's threshold (x* with the grid's first-segment mass, or x**) is a floor;
/// the best family member at that floor or at a cell boundary above it is returned.
FiniteSolution threshold_on_grid(const MarketParams &params, std::size_t n, bool obedience = true);

/// The rule's threshold for the grid, before any search.
double grid_rule_threshold(const MarketParams &params, std::size_t n, bool obedience);

/// Same with an explicit threshold.
FiniteSolution threshold_on_grid_at(const MarketParams &params, std::size_t n, double threshold);

struct ThreeConsumerSolution {
    double y2 = 0.0;
    double y3 = 0.0;
    std::array<double, 3> fees{0.0, 0.0, 0.0};
    std::string binding_case;
    Mechanism mechanism;
    Population population;
    double revenue = 0.0;
    bool feasible = false;
    /// Residuals of m2 - m3 = (y2 - y3)(2 - 2 x2)t and m2 - m1 = y2(H - L).
    double residual_9 = 0.0;
    double residual_10 = 0.0;
    /// Every branch whose conditions held, with its audited revenue.
    std::vector<std::pair<std::string, double>> candidates;
};

ThreeConsumerSolution solve_three_consumers(const MarketParams &params, std::array<double, 3> x,
                                            std::array<double, 3> masses);

/// Two consumers in the second and third segments of the symmetric market, obedience off. Both IRs bind.
FiniteSolution solve_symmetric_two_consumer_no_obedience(const MarketParams &params, double x1, double x2,
                                                         std::array<double, 2> masses);

struct StructureCheck {
    std::string name;
    bool passed = true;
    bool required = true;
    double worst = 0.0;
    std::string detail;
};

struct StructureReport {
    std::vector<StructureCheck> checks;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const StructureCheck *find(const std::string &name) const;
};

inline constexpr double kStructureTolerance = 1e-6;

/// Checks (a) first segment on (H,H) only, (b) monotone y and fees, (c) sandwich inequality,
/// (d) y >= 1/2 (required on uniform grids only), (e) top first-segment type to first second-segment type IC binds.
StructureReport check_structure(const Mechanism &mech, const Population &pop, const MarketParams &params,
                                bool uniform_grid, double tol = kStructureTolerance);
StructureReport check_structure(const SolveResult &result, const ScenarioSpec &scenario,
                                double tol = kStructureTolerance);

}  // namespace broker
