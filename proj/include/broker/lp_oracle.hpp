#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "broker/model.hpp"
#include "broker/simplex.hpp"

namespace broker {

struct ScenarioSpec {
    MarketParams params;
    Population population = Population::uniform();
    bool consumer_ic = true;
    bool obedience = true;
    bool fee_nonneg = true;
    double tolerance = kTolerance;

    [[nodiscard]] AuditToggles toggles() const { return {consumer_ic, obedience, fee_nonneg}; }
    void validate() const;
};

struct RowInfo {
    ConstraintFamily family = ConstraintFamily::SimplexInternal;
    int i = -1;  ///< type index, seller index (0/1) for seller rows
    int j = -1;  ///< reported type for IC rows
    double rhs = 0.0;  ///< right-hand side in unshifted utility units
};

/// The broker's program over a finite population, with row metadata for reporting.
struct Program {
    lp::LinearProgram lp;
    Population population;
    std::vector<RowInfo> rows;

    [[nodiscard]] std::size_t pi_index(std::size_t type, Signal s) const { return 4 * type + static_cast<std::size_t>(s); }
    [[nodiscard]] std::size_t fee_index(std::size_t type) const { return 4 * population.size() + type; }
    [[nodiscard]] std::size_t seller_fee_index(Seller s) const {
        return 5 * population.size() + static_cast<std::size_t>(s) - 1;
    }
    [[nodiscard]] std::vector<double> encode(const Mechanism &mech) const;
    [[nodiscard]] Mechanism decode(const std::vector<double> &x) const;
};

struct BuildOptions {
    /// Rows to leave out, by name. Used for negative controls only.
    std::vector<std::string> drop_rows;
    /// Prefer, among optimal vertices, (H,H) on the first segment and (L,L) elsewhere (asymmetric only).
    bool tie_break = true;
};

Program build_program(const ScenarioSpec &scenario, const BuildOptions &options = {});

struct ConstraintRecord {
    ConstraintFamily family = ConstraintFamily::SimplexInternal;
    std::string name;
    int i = -1;
    int j = -1;
    double slack = 0.0;
    bool binding = false;
};

struct ConstraintReport {
    std::vector<ConstraintRecord> records;

    [[nodiscard]] const ConstraintRecord *find(const std::string &name) const;
    /// Binding records grouped by family in generation order.
    [[nodiscard]] std::vector<ConstraintRecord> binding() const;
};

/// Binding when |slack| <= 1e-7 * max(1, |rhs|).
inline constexpr double kBindingTolerance = 1e-7;

struct SolverStats {
    std::size_t rows = 0;
    std::size_t columns = 0;
    std::size_t iterations = 0;
    std::size_t phase1_iterations = 0;
    std::size_t secondary_iterations = 0;
    double seconds = 0.0;
};

struct SolveResult {
    Population population;  ///< the finite population the program was built on
    Mechanism mechanism;
    double revenue = 0.0;
    std::vector<double> consumer_payoffs;
    std::array<double, 2> seller_payoffs{0.0, 0.0};
    ConstraintReport binding;
    FeasibilityAudit audit;
    SolverStats stats;
};

struct SolveOptions {
    BuildOptions build;
    lp::SimplexOptions simplex;
    /// Receives the textual program when set.
    std::string *lp_dump = nullptr;
};

/// Solves the broker's program; throws lp::SolverFailure on any non-optimal status.
SolveResult solve(const ScenarioSpec &scenario, const SolveOptions &options = {});

/// Binding constraints of a solved scenario, grouped by family.
std::vector<ConstraintRecord> binding_report(const SolveResult &result, const ScenarioSpec &scenario);

struct Counterexample {
    std::vector<SignalDistribution> scheme;
    std::vector<double> fees;
    double grid_revenue = 0.0;
    double lp_revenue = 0.0;
    std::string reason;
};

struct BruteForceReport {
    double lp_revenue = 0.0;
    double grid_revenue = 0.0;
    /// Largest revenue any mechanism can gain over the best grid point. Infinite when no bound is available.
    double resolution_bound = 0.0;
    std::size_t points = 0;
    std::size_t feasible_points = 0;
    std::optional<Counterexample> counterexample;
};

/// Exhaustive grid over the reduced mechanism space with maximal extractable fees, compared against the LP.
BruteForceReport brute_force_verify(const ScenarioSpec &scenario, std::size_t grid_steps = 21,
                                    const BuildOptions &lp_options = {});

}  // namespace broker
