#include "broker/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace broker::lp {

void LinearProgram::normalize() {
    if (bounds.empty()) bounds.assign(objective.size(), Bound{});
    if (names.empty()) {
        names.reserve(objective.size());
        for (std::size_t j = 0; j < objective.size(); ++j) names.push_back("x" + std::to_string(j));
    }
    for (std::size_t r = 0; r < constraints.size(); ++r) {
        if (constraints[r].name.empty()) constraints[r].name = "r" + std::to_string(r);
    }
    validate();
}

void LinearProgram::validate() const {
    const std::size_t n = objective.size();
    if (n == 0) throw std::invalid_argument("linear program has no variables");
    if (bounds.size() != n || names.size() != n) throw std::invalid_argument("bounds/names width mismatch");
    if (!secondary.empty() && secondary.size() != n) throw std::invalid_argument("secondary objective width mismatch");
    for (double c : objective) {
        if (!std::isfinite(c)) throw std::invalid_argument("objective coefficient not finite");
    }
    for (const auto &row : constraints) {
        if (row.coefficients.size() != n) throw std::invalid_argument("row '" + row.name + "' width mismatch");
        if (!std::isfinite(row.rhs)) throw std::invalid_argument("row '" + row.name + "' rhs not finite");
        for (double a : row.coefficients) {
            if (!std::isfinite(a)) throw std::invalid_argument("row '" + row.name + "' coefficient not finite");
        }
    }
}

std::size_t StandardForm::num_slacks() const {
    return static_cast<std::size_t>(std::count_if(slack_sign.begin(), slack_sign.end(), [](int s) { return s != 0; }));
}

std::vector<double> StandardForm::recover(const std::vector<double> &y) const {
    std::vector<double> x(map.size());
    for (std::size_t j = 0; j < map.size(); ++j) {
        const auto &m = map[j];
        switch (m.kind) {
            case VariableMap::Kind::Shift: x[j] = m.offset + y[m.column]; break;
            case VariableMap::Kind::Mirror: x[j] = m.offset - y[m.column]; break;
            case VariableMap::Kind::Split: x[j] = y[m.column] - y[m.column2]; break;
        }
    }
    return x;
}

StandardForm to_standard_form(const LinearProgram &lp) {
    lp.validate();
    const std::size_t n = lp.num_variables();
    StandardForm sf;
    sf.map.resize(n);

    std::vector<std::size_t> upper_rows;  // variables needing an explicit upper-bound row
    for (std::size_t j = 0; j < n; ++j) {
        const Bound &b = lp.bounds[j];
        auto &m = sf.map[j];
        if (b.lower > b.upper) sf.infeasible_bounds = true;
        if (std::isfinite(b.lower)) {
            m = {VariableMap::Kind::Shift, sf.structural++, 0, b.lower};
            if (std::isfinite(b.upper)) upper_rows.push_back(j);
        } else if (std::isfinite(b.upper)) {
            m = {VariableMap::Kind::Mirror, sf.structural++, 0, b.upper};
        } else {
            m.kind = VariableMap::Kind::Split;
            m.column = sf.structural++;
            m.column2 = sf.structural++;
        }
    }

    const std::size_t k = sf.structural;
    sf.c.assign(k, 0.0);
    sf.c_secondary.assign(k, 0.0);
    const auto spread = [&](const std::vector<double> &cost, std::vector<double> &out, double &offset) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto &m = sf.map[j];
            switch (m.kind) {
                case VariableMap::Kind::Shift:
                    out[m.column] += cost[j];
                    offset += cost[j] * m.offset;
                    break;
                case VariableMap::Kind::Mirror:
                    out[m.column] -= cost[j];
                    offset += cost[j] * m.offset;
                    break;
                case VariableMap::Kind::Split:
                    out[m.column] += cost[j];
                    out[m.column2] -= cost[j];
                    break;
            }
        }
    };
    spread(lp.objective, sf.c, sf.objective_offset);
    if (!lp.secondary.empty()) spread(lp.secondary, sf.c_secondary, sf.secondary_offset);

    sf.rows = lp.constraints.size() + upper_rows.size();
    sf.A.assign(sf.rows * k, 0.0);
    sf.b.reserve(sf.rows);
    std::size_t r = 0;
    for (const auto &row : lp.constraints) {
        double rhs = row.rhs;
        double *a = sf.A.data() + r * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = row.coefficients[j];
            if (v == 0.0) continue;
            const auto &m = sf.map[j];
            switch (m.kind) {
                case VariableMap::Kind::Shift:
                    a[m.column] += v;
                    rhs -= v * m.offset;
                    break;
                case VariableMap::Kind::Mirror:
                    a[m.column] -= v;
                    rhs -= v * m.offset;
                    break;
                case VariableMap::Kind::Split:
                    a[m.column] += v;
                    a[m.column2] -= v;
                    break;
            }
        }
        sf.b.push_back(rhs);
        sf.slack_sign.push_back(row.relation == Relation::LessEqual ? 1 : row.relation == Relation::GreaterEqual ? -1 : 0);
        sf.row_names.push_back(row.name);
        ++r;
    }
    for (std::size_t j : upper_rows) {
        const auto &m = sf.map[j];
        sf.A[r * k + m.column] = 1.0;
        sf.b.push_back(lp.bounds[j].upper - lp.bounds[j].lower);
        sf.slack_sign.push_back(1);
        sf.row_names.push_back("ub[" + lp.names[j] + "]");
        ++r;
    }
    return sf;
}

const char *to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "?";
}

namespace {

constexpr double kRelativePivot = 1e-7;
constexpr double kPerturbation = 1e-7;
constexpr double kCleanTolerance = 1e-10;
constexpr int kCleanupRounds = 4;

// Condensed tableau: rows are basic variables plus the objective row (last); columns are nonbasic variables
// plus the right-hand side (last column of the stride). Entry (i, j) is the coefficient of nonbasic j in
// x_B(i) = rhs_i - sum_j T_ij x_N(j). Labels index standard variables; artificials come after them.
class Tableau {
  public:
    Tableau(const StandardForm &sf, const SimplexOptions &opt) : sf_(sf), opt_(opt) { build(); }

    SimplexSolution run() {
        SimplexSolution sol;
        sol.rows = sf_.rows;
        sol.columns = sf_.num_variables();
        if (sf_.infeasible_bounds) {
            sol.status = Status::Infeasible;
            return sol;
        }
        if (n_art_ > 0) {
            set_phase1_objective();
            iterate();
            sol.phase1_iterations = iterations_;
            if (-rhs(m_) > opt_.feasibility_tolerance) {
                sol.status = Status::Infeasible;
                sol.iterations = iterations_;
                return sol;
            }
            drive_out_artificials();
        }
        Status s = optimize();
        for (int round = 0; s == Status::Optimal && round < kCleanupRounds; ++round) {
            // drop the perturbation: reload exact basic values and repair the rare slightly negative ones
            load_exact_rhs();
            if (!restore_feasibility()) break;
            s = optimize();
        }
        sol.status = s;
        sol.iterations = iterations_;
        sol.secondary_iterations = secondary_iterations_;
        if (s != Status::Optimal) return sol;
        sol.primal = sf_.recover(structural_values());
        return sol;
    }

  private:
    const StandardForm &sf_;
    const SimplexOptions &opt_;
    std::size_t m_ = 0;       // constraint rows currently in the tableau
    std::size_t k_ = 0;       // active nonbasic columns
    std::size_t stride_ = 0;  // column capacity + rhs
    std::size_t n_std_ = 0;
    std::size_t n_art_ = 0;
    std::size_t iterations_ = 0;
    std::size_t secondary_iterations_ = 0;
    bool face_restricted_ = false;
    std::vector<double> T_;
    std::vector<std::size_t> basic_;
    std::vector<std::size_t> nonbasic_;
    std::vector<std::size_t> slack_label_;
    std::vector<int> row_sign_;

    double &cell(std::size_t i, std::size_t j) { return T_[i * stride_ + j]; }
    double &rhs(std::size_t i) { return T_[i * stride_ + stride_ - 1]; }

    [[nodiscard]] bool is_artificial(std::size_t label) const { return label >= n_std_; }
    [[nodiscard]] bool has_secondary() const {
        return std::any_of(sf_.c_secondary.begin(), sf_.c_secondary.end(), [](double c) { return c != 0.0; });
    }
    [[nodiscard]] double cost(const std::vector<double> &c, std::size_t label) const {
        return label < sf_.structural ? c[label] : 0.0;
    }

    void build() {
        m_ = sf_.rows;
        n_std_ = sf_.num_variables();
        slack_label_.assign(m_, 0);
        std::size_t next = sf_.structural;
        for (std::size_t r = 0; r < m_; ++r) {
            if (sf_.slack_sign[r] != 0) slack_label_[r] = next++;
        }
        row_sign_.resize(m_);
        std::vector<bool> slack_basic(m_, false);
        for (std::size_t r = 0; r < m_; ++r) {
            row_sign_[r] = sf_.b[r] < 0.0 ? -1 : 1;
            slack_basic[r] = sf_.slack_sign[r] * row_sign_[r] == 1;
            if (!slack_basic[r]) ++n_art_;
        }
        for (std::size_t j = 0; j < sf_.structural; ++j) nonbasic_.push_back(j);
        for (std::size_t r = 0; r < m_; ++r) {
            if (sf_.slack_sign[r] != 0 && !slack_basic[r]) nonbasic_.push_back(slack_label_[r]);
        }
        k_ = nonbasic_.size();
        stride_ = k_ + 2;  // one spare column for the feasibility repair
        T_.assign((m_ + 1) * stride_, 0.0);
        basic_.resize(m_);
        std::size_t art = n_std_;
        for (std::size_t r = 0; r < m_; ++r) {
            const double s = row_sign_[r];
            for (std::size_t j = 0; j < sf_.structural; ++j) cell(r, j) = s * sf_.at(r, j);
            for (std::size_t j = sf_.structural; j < k_; ++j) {
                if (nonbasic_[j] == slack_label_[r] && sf_.slack_sign[r] != 0) cell(r, j) = s * sf_.slack_sign[r];
            }
            rhs(r) = s * sf_.b[r];
            if (slack_basic[r]) {
                // deterministic perturbation breaks degenerate ties; load_exact_rhs() removes it
                const double jitter = 0.5 + 0.5 * static_cast<double>((r * 7919U) % 1000U) / 1000.0;
                rhs(r) += kPerturbation * (1.0 + std::abs(sf_.b[r])) * jitter;
            }
            basic_[r] = slack_basic[r] ? slack_label_[r] : art++;
        }
    }

    void set_phase1_objective() {
        for (std::size_t j = 0; j < k_; ++j) cell(m_, j) = 0.0;
        rhs(m_) = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_artificial(basic_[i])) continue;
            for (std::size_t j = 0; j < k_; ++j) cell(m_, j) -= cell(i, j);
            rhs(m_) -= rhs(i);
        }
    }

    void set_objective(const std::vector<double> &c) {
        for (std::size_t j = 0; j < k_; ++j) cell(m_, j) = -cost(c, nonbasic_[j]);
        rhs(m_) = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost(c, basic_[i]);
            if (cb == 0.0) continue;
            const double *row = &T_[i * stride_];
            for (std::size_t j = 0; j < k_; ++j) cell(m_, j) += cb * row[j];
            rhs(m_) += cb * rhs(i);
        }
    }

    Status optimize() {
        set_objective(sf_.c);
        Status s = iterate();
        if (s == Status::Optimal && has_secondary()) {
            if (!face_restricted_) {
                restrict_to_optimal_face();
                face_restricted_ = true;
            }
            const std::size_t before = iterations_;
            set_objective(sf_.c_secondary);
            s = iterate();
            secondary_iterations_ += iterations_ - before;
        }
        return s;
    }

    void pivot(std::size_t r, std::size_t s) {
        if (opt_.parallel) {
            kernels::pivot_parallel(T_.data(), m_ + 1, stride_, k_, r, s);
        } else {
            kernels::pivot_serial(T_.data(), m_ + 1, stride_, k_, r, s);
        }
        std::swap(basic_[r], nonbasic_[s]);
        ++iterations_;
        if (iterations_ > opt_.max_iterations) {
            throw SolverFailure("simplex iteration cap of " + std::to_string(opt_.max_iterations) + " exceeded");
        }
    }

    void remove_column(std::size_t s) {
        const std::size_t last = k_ - 1;
        if (s != last) {
            for (std::size_t i = 0; i <= m_; ++i) cell(i, s) = cell(i, last);
            nonbasic_[s] = nonbasic_[last];
        }
        nonbasic_.pop_back();
        --k_;
    }

    void remove_row(std::size_t r) {
        // keep the objective row last: move the final constraint row into r, then the objective row up
        const std::size_t last = m_ - 1;
        if (r != last) {
            std::copy_n(&T_[last * stride_], stride_, &T_[r * stride_]);
            basic_[r] = basic_[last];
        }
        std::copy_n(&T_[m_ * stride_], stride_, &T_[last * stride_]);
        basic_.pop_back();
        --m_;
    }

    // Leaving row for entering column s: minimum ratio, ties to the smallest basic label (Bland).
    std::size_t ratio_test(std::size_t s) {
        double colmax = 0.0;
        for (std::size_t i = 0; i < m_; ++i) colmax = std::max(colmax, cell(i, s));
        const double min_pivot = std::max(opt_.pivot_tolerance, kRelativePivot * colmax);
        std::size_t r = m_;
        double best = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = cell(i, s);
            if (a < min_pivot) continue;
            const double ratio = std::max(0.0, rhs(i)) / a;
            const double slack = 1e-12 * (1.0 + best);
            if (r == m_ || ratio < best - slack) {
                r = i;
                best = ratio;
            } else if (ratio <= best + slack && basic_[i] < basic_[r]) {
                r = i;
                best = std::min(best, ratio);
            }
        }
        return r;
    }

    Status iterate() {
        for (;;) {
            // Bland: smallest label among improving columns
            std::size_t s = k_;
            for (std::size_t j = 0; j < k_; ++j) {
                if (cell(m_, j) < -opt_.optimality_tolerance && (s == k_ || nonbasic_[j] < nonbasic_[s])) s = j;
            }
            if (s == k_) return Status::Optimal;
            const std::size_t r = ratio_test(s);
            if (r == m_) return Status::Unbounded;
            const bool leaving_artificial = is_artificial(basic_[r]);
            pivot(r, s);
            if (leaving_artificial) remove_column(s);
        }
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_;) {
            if (!is_artificial(basic_[i])) {
                ++i;
                continue;
            }
            std::size_t s = k_;
            for (std::size_t j = 0; j < k_; ++j) {
                if (std::abs(cell(i, j)) > opt_.pivot_tolerance && (s == k_ || nonbasic_[j] < nonbasic_[s])) s = j;
            }
            if (s == k_) {
                remove_row(i);  // redundant equality
                continue;
            }
            pivot(i, s);
            remove_column(s);
            ++i;
        }
    }

    void restrict_to_optimal_face() {
        for (std::size_t j = 0; j < k_;) {
            if (cell(m_, j) > opt_.optimality_tolerance) {
                remove_column(j);
            } else {
                ++j;
            }
        }
    }

    // Basic structural values recomputed from the original rows that are tight at the current basis
    // (nonbasic slack, or equality), free of the roundoff accumulated over the pivots.
    std::vector<double> structural_values() {
        std::vector<double> y(sf_.structural, 0.0);
        std::vector<std::size_t> cols;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basic_[i] < sf_.structural) {
                y[basic_[i]] = rhs(i);
                cols.push_back(basic_[i]);
            }
        }
        if (cols.empty()) return y;
        std::vector<bool> slack_basic(n_std_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basic_[i] >= sf_.structural && basic_[i] < n_std_) slack_basic[basic_[i]] = true;
        }
        std::vector<std::size_t> tight;
        for (std::size_t r = 0; r < sf_.rows; ++r) {
            if (sf_.slack_sign[r] == 0 || !slack_basic[slack_label_[r]]) tight.push_back(r);
        }
        if (tight.size() < cols.size()) return y;
        const auto rows = static_cast<Eigen::Index>(tight.size());
        const auto ncols = static_cast<Eigen::Index>(cols.size());
        Eigen::MatrixXd B(rows, ncols);
        Eigen::VectorXd b(rows);
        for (Eigen::Index a = 0; a < rows; ++a) {
            const std::size_t r = tight[static_cast<std::size_t>(a)];
            for (Eigen::Index c = 0; c < ncols; ++c) B(a, c) = sf_.at(r, cols[static_cast<std::size_t>(c)]);
            b(a) = sf_.b[r];
        }
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
        if (qr.rank() < ncols) return y;
        const Eigen::VectorXd x = qr.solve(b);
        if ((B * x - b).cwiseAbs().maxCoeff() > opt_.feasibility_tolerance) return y;
        for (Eigen::Index c = 0; c < ncols; ++c) y[cols[static_cast<std::size_t>(c)]] = x(c);
        return y;
    }

    // Replaces the rhs column by exact basic values at the true right-hand side.
    void load_exact_rhs() {
        const std::vector<double> y = structural_values();
        std::vector<std::size_t> row_of_slack(n_std_, sf_.rows);
        for (std::size_t r = 0; r < sf_.rows; ++r) {
            if (sf_.slack_sign[r] != 0) row_of_slack[slack_label_[r]] = r;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t label = basic_[i];
            if (label < sf_.structural) {
                rhs(i) = y[label];
            } else {
                const std::size_t r = row_of_slack[label];
                double ay = 0.0;
                for (std::size_t j = 0; j < sf_.structural; ++j) ay += sf_.at(r, j) * y[j];
                rhs(i) = (sf_.b[r] - ay) / sf_.slack_sign[r];
            }
        }
    }

    // Auxiliary problem with one extra column z: x_B = rhs + z on the negative rows. Pivoting z in at the most
    // negative row makes the basis feasible; minimizing z then returns a feasible basis of the true program.
    // Returns false when the basis was already feasible.
    bool restore_feasibility() {
        std::size_t worst = m_;
        for (std::size_t i = 0; i < m_; ++i) {
            if (rhs(i) < -kCleanTolerance && (worst == m_ || rhs(i) < rhs(worst))) worst = i;
        }
        if (worst == m_) return false;
        const std::size_t z = k_++;
        const std::size_t z_label = n_std_ + sf_.rows + 1;  // after every artificial label
        nonbasic_.push_back(z_label);
        for (std::size_t i = 0; i <= m_; ++i) cell(i, z) = (i < m_ && rhs(i) < -kCleanTolerance) ? -1.0 : 0.0;
        pivot(worst, z);
        for (std::size_t i = 0; i < m_; ++i) rhs(i) = std::max(rhs(i), 0.0);
        // maximize -z
        for (std::size_t j = 0; j < k_; ++j) cell(m_, j) = 0.0;
        rhs(m_) = 0.0;
        const double *zrow = &T_[worst * stride_];
        for (std::size_t j = 0; j < k_; ++j) cell(m_, j) = -zrow[j];
        rhs(m_) = -rhs(worst);
        for (;;) {
            std::size_t s = k_;
            for (std::size_t j = 0; j < k_; ++j) {
                if (cell(m_, j) < -opt_.optimality_tolerance && (s == k_ || nonbasic_[j] < nonbasic_[s])) s = j;
            }
            std::size_t zrow_now = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] == z_label) zrow_now = i;
            }
            if (zrow_now == m_) break;  // z left the basis
            if (s == k_) {
                // z stays basic at (near) zero: pivot it out on any usable entry
                std::size_t col = k_;
                for (std::size_t j = 0; j < k_; ++j) {
                    if (std::abs(cell(zrow_now, j)) > opt_.pivot_tolerance && (col == k_ || nonbasic_[j] < nonbasic_[col])) {
                        col = j;
                    }
                }
                if (col == k_) break;
                pivot(zrow_now, col);
                break;
            }
            const std::size_t r = ratio_test(s);
            if (r == m_) break;
            pivot(r, s);
        }
        for (std::size_t j = 0; j < k_; ++j) {
            if (nonbasic_[j] == z_label) {
                remove_column(j);
                break;
            }
        }
        return true;
    }
};

}  // namespace

SimplexSolution solve(const LinearProgram &lp, const SimplexOptions &options) {
    const StandardForm sf = to_standard_form(lp);
    Tableau tableau(sf, options);
    SimplexSolution sol = tableau.run();
    if (sol.status == Status::Optimal) sol.objective_value = evaluate_objective(lp, sol.primal);
    return sol;
}

double evaluate_objective(const LinearProgram &lp, const std::vector<double> &point) {
    if (point.size() != lp.num_variables()) throw std::invalid_argument("point dimension mismatch");
    double v = 0.0;
    for (std::size_t j = 0; j < point.size(); ++j) v += lp.objective[j] * point[j];
    return v;
}

bool SlackReport::feasible() const {
    return std::none_of(entries.begin(), entries.end(), [](const SlackEntry &e) { return e.violated; });
}

double SlackReport::worst() const {
    double w = kInf;
    for (const auto &e : entries) w = std::min(w, e.slack);
    return w;
}

SlackReport audit(const LinearProgram &lp, const std::vector<double> &point, double tolerance) {
    if (point.size() != lp.num_variables()) throw std::invalid_argument("point dimension mismatch");
    SlackReport rep;
    for (const auto &row : lp.constraints) {
        double ax = 0.0;
        for (std::size_t j = 0; j < point.size(); ++j) ax += row.coefficients[j] * point[j];
        double slack = 0.0;
        switch (row.relation) {
            case Relation::LessEqual: slack = row.rhs - ax; break;
            case Relation::GreaterEqual: slack = ax - row.rhs; break;
            case Relation::Equal: slack = -std::abs(ax - row.rhs); break;
        }
        rep.entries.push_back({row.name, false, slack, slack < -tolerance});
    }
    for (std::size_t j = 0; j < point.size(); ++j) {
        const Bound &b = lp.bounds.empty() ? Bound{} : lp.bounds[j];
        const std::string name = lp.names.empty() ? "x" + std::to_string(j) : lp.names[j];
        if (std::isfinite(b.lower)) {
            const double s = point[j] - b.lower;
            rep.entries.push_back({name + ">=lb", true, s, s < -tolerance});
        }
        if (std::isfinite(b.upper)) {
            const double s = b.upper - point[j];
            rep.entries.push_back({name + "<=ub", true, s, s < -tolerance});
        }
    }
    return rep;
}

std::string dump(const LinearProgram &lp) {
    std::ostringstream os;
    os.precision(12);
    const auto term_list = [&](const std::vector<double> &coef) {
        bool first = true;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            if (coef[j] == 0.0) continue;
            os << (first ? "" : " ") << (coef[j] < 0 ? "- " : first ? "" : "+ ") << std::abs(coef[j]) << " "
               << lp.names[j];
            first = false;
        }
        if (first) os << "0";
    };
    os << "maximize: ";
    term_list(lp.objective);
    os << "\n";
    if (!lp.secondary.empty()) {
        os << "then maximize: ";
        term_list(lp.secondary);
        os << "\n";
    }
    os << "subject to:\n";
    for (const auto &row : lp.constraints) {
        os << "  " << row.name << ": ";
        term_list(row.coefficients);
        os << (row.relation == Relation::LessEqual ? " <= " : row.relation == Relation::GreaterEqual ? " >= " : " = ")
           << row.rhs << "\n";
    }
    os << "bounds:\n";
    for (std::size_t j = 0; j < lp.num_variables(); ++j) {
        os << "  " << lp.bounds[j].lower << " <= " << lp.names[j] << " <= " << lp.bounds[j].upper << "\n";
    }
    return os.str();
}

}  // namespace broker::lp
