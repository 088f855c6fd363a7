#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace broker::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Constraint {
    std::vector<double> coefficients;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
    std::string name;
};

struct Bound {
    double lower = 0.0;
    double upper = kInf;
};

/// maximize objective . x subject to constraints and bounds.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::vector<Bound> bounds;
    std::vector<std::string> names;
    /// Optional tie-break objective, maximized over the optimal face of `objective`.
    std::vector<double> secondary;

    [[nodiscard]] std::size_t num_variables() const { return objective.size(); }
    /// Fills default bounds and names, then checks widths and finiteness. Throws std::invalid_argument.
    void normalize();
    void validate() const;
};

class SolverFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// How an original variable is recovered from standard-form columns.
struct VariableMap {
    enum class Kind { Shift, Mirror, Split } kind = Kind::Shift;
    std::size_t column = 0;   ///< x = offset + y  (Shift), x = offset - y (Mirror), x = y - y2 (Split)
    std::size_t column2 = 0;  ///< negative part of a split variable
    double offset = 0.0;
};

/// Equality form A y + s = b, y >= 0, s >= 0. Slack columns are identity columns scaled by slack_sign
/// (0 for equality rows) and are stored implicitly after the structural columns.
struct StandardForm {
    std::size_t rows = 0;
    std::size_t structural = 0;
    std::vector<double> A;  ///< rows x structural, row-major
    std::vector<double> b;
    std::vector<double> c;
    std::vector<double> c_secondary;
    std::vector<int> slack_sign;
    std::vector<std::string> row_names;
    std::vector<VariableMap> map;
    double objective_offset = 0.0;
    double secondary_offset = 0.0;
    bool infeasible_bounds = false;

    [[nodiscard]] std::size_t num_slacks() const;
    /// Total standard variables: structural columns plus one slack per inequality row.
    [[nodiscard]] std::size_t num_variables() const { return structural + num_slacks(); }
    [[nodiscard]] double at(std::size_t r, std::size_t j) const { return A[r * structural + j]; }
    /// Recovers original variable values from structural column values.
    [[nodiscard]] std::vector<double> recover(const std::vector<double> &y) const;
};

StandardForm to_standard_form(const LinearProgram &lp);

enum class Status { Optimal, Infeasible, Unbounded };

const char *to_string(Status s);

struct SimplexOptions {
    double pivot_tolerance = 1e-10;
    double feasibility_tolerance = 1e-9;
    double optimality_tolerance = 1e-9;
    std::size_t max_iterations = 50000;
    bool parallel = true;
};

struct SimplexSolution {
    Status status = Status::Infeasible;
    double objective_value = 0.0;
    std::vector<double> primal;
    std::size_t iterations = 0;
    std::size_t phase1_iterations = 0;
    std::size_t secondary_iterations = 0;
    std::size_t rows = 0;
    std::size_t columns = 0;
};

/// Two-phase primal simplex with Bland's rule on a dense condensed tableau.
SimplexSolution solve(const LinearProgram &lp, const SimplexOptions &options = {});

struct SlackEntry {
    std::string name;
    bool is_bound = false;
    double slack = 0.0;
    bool violated = false;
};

struct SlackReport {
    std::vector<SlackEntry> entries;
    [[nodiscard]] bool feasible() const;
    [[nodiscard]] double worst() const;
};

/// Slack of every row (rhs - a.x for <=, a.x - rhs for >=, -|a.x - rhs| for =) and every finite bound.
SlackReport audit(const LinearProgram &lp, const std::vector<double> &point, double tolerance = 1e-9);

double evaluate_objective(const LinearProgram &lp, const std::vector<double> &point);

/// Human-readable dump, one constraint per line.
std::string dump(const LinearProgram &lp);

namespace kernels {

/// Jordan exchange on a row-major tableau with `stride` columns; only the first `active` columns and the last
/// (right-hand side) column are touched.
void pivot_serial(double *T, std::size_t rows, std::size_t stride, std::size_t active, std::size_t r, std::size_t s);
void pivot_parallel(double *T, std::size_t rows, std::size_t stride, std::size_t active, std::size_t r,
                    std::size_t s);

}  // namespace kernels

}  // namespace broker::lp
