#include "broker/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace broker {

namespace {

void require_asymmetric(const MarketParams &params, const char *what) {
    params.validate();
    if (params.variant != Variant::Asymmetric) {
        throw UnsupportedScenario(std::string(what) + " is defined for the asymmetric market only");
    }
}

SignalDistribution pure(Signal s) {
    SignalDistribution d{0.0, 0.0, 0.0, 0.0};
    at(d, s) = 1.0;
    return d;
}

SignalDistribution split(double y) {
    SignalDistribution d{0.0, 0.0, 0.0, 0.0};
    at(d, Signal::LL) = y;
    at(d, Signal::HL) = 1.0 - y;
    return d;
}

// Fees and seller fees for a fixed scheme. Seller fees take all of U_i.
Mechanism complete_mechanism(std::vector<SignalDistribution> scheme, const Population &pop,
                             const MarketParams &params, bool consumer_ic) {
    Mechanism mech;
    mech.scheme = std::move(scheme);
    auto fees = max_extractable_fees(mech.scheme, pop, params, consumer_ic, true);
    if (!fees) throw InputError("scheme admits no nonnegative IC/IR fee vector");
    mech.consumer_fees = std::move(*fees);
    mech.seller_fees = {seller_expected_revenue(Seller::S1, mech, pop, params),
                        seller_expected_revenue(Seller::S2, mech, pop, params)};
    return mech;
}

double objective(const Mechanism &mech, const Population &pop) {
    double r = mech.seller_fees[0] + mech.seller_fees[1];
    for (std::size_t i = 0; i < pop.size(); ++i) r += pop.types()[i].mass * mech.consumer_fees[i];
    return r;
}

}  // namespace

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (breaks_.size() < 2 || values_.size() + 1 != breaks_.size()) {
        throw InputError("step function needs k+1 breaks for k values");
    }
    for (std::size_t k = 1; k < breaks_.size(); ++k) {
        if (breaks_[k] < breaks_[k - 1]) throw InputError("step function breaks must be nondecreasing");
    }
}

StepFunction StepFunction::constant(double lo, double hi, double v) { return StepFunction({lo, hi}, {v}); }

double StepFunction::operator()(double x) const {
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (x <= breaks_[k + 1]) return values_[k];
    }
    return values_.back();
}

double StepFunction::integral(double a, double b) const {
    a = std::max(a, lo());
    b = std::min(b, hi());
    double s = 0.0;
    for (std::size_t k = 0; k < values_.size() && a < b; ++k) {
        const double l = std::max(a, breaks_[k]);
        const double r = std::min(b, breaks_[k + 1]);
        if (r > l) s += (r - l) * values_[k];
    }
    return s;
}

bool StepFunction::continuous_at(double x, double eps) const {
    for (std::size_t k = 1; k + 1 < breaks_.size(); ++k) {
        if (std::abs(x - breaks_[k]) <= eps && values_[k - 1] != values_[k]) return false;
    }
    return true;
}

EnvelopeFees::EnvelopeFees(StepFunction y, const MarketParams &params) : y_(std::move(y)), params_(params) {
    for (double v : y_.values()) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("y must take values in [0, 1]");
    }
}

double EnvelopeFees::utility(double x) const {
    const auto &p = params_;
    const double y = y_(x);
    return y * (p.V1 - x * p.t - p.L) + (1.0 - y) * (p.V2 - (1.0 - x) * p.t - p.L);
}

double EnvelopeFees::payoff(double x) const {
    // integral over [x, hi] of (2y - 1)t
    const double hi = y_.hi();
    return (2.0 * y_.integral(x, hi) - (hi - x)) * params_.t;
}

double EnvelopeFees::fee_integral(double a, double b) const {
    // fee is linear on each piece, so the midpoint rule is exact piecewise
    double s = 0.0;
    const auto &br = y_.breaks();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double l = std::max(a, br[k]);
        const double r = std::min(b, br[k + 1]);
        if (r <= l) continue;
        const double mid = 0.5 * (l + r);
        const double y = y_.values()[k];
        const auto &p = params_;
        const double u = y * (p.V1 - mid * p.t - p.L) + (1.0 - y) * (p.V2 - (1.0 - mid) * p.t - p.L);
        s += (r - l) * (u - payoff(mid));
    }
    return s;
}

double EnvelopeFees::payoff_integral(double a, double b) const {
    double s = 0.0;
    const auto &br = y_.breaks();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double l = std::max(a, br[k]);
        const double r = std::min(b, br[k + 1]);
        if (r > l) s += (r - l) * payoff(0.5 * (l + r));
    }
    return s;
}

EnvelopeFees payments_from_envelope(const StepFunction &y, const MarketParams &params) {
    return EnvelopeFees(y, params);
}

double ThresholdMechanism::y(double x) const { return fees.y()(x); }

SignalDistribution ThresholdMechanism::signal(double x) const {
    return x <= x_lower ? pure(Signal::HH) : split(y(x));
}

double ThresholdMechanism::fee(double x) const { return x <= x_lower ? fee_low_segment : fees.fee(x); }

double ThresholdMechanism::payoff(double x) const {
    if (x <= x_lower) return params.V1 - x * params.t - params.H - fee_low_segment;
    return fees.payoff(x);
}

std::array<double, 2> ThresholdMechanism::seller_revenues() const {
    const double ll = fees.y().integral(x_lower, 1.0);
    const double hl = (1.0 - x_lower) - ll;
    return {x_lower * params.H + ll * params.L, hl * params.L};
}

double ThresholdMechanism::revenue() const {
    return x_lower * fee_low_segment + fees.fee_integral(x_lower, 1.0) + seller_fees[0] + seller_fees[1];
}

double ThresholdMechanism::consumer_surplus() const {
    const auto &p = params;
    const double low = x_lower * (p.V1 - p.H - fee_low_segment) - 0.5 * x_lower * x_lower * p.t;
    return low + fees.payoff_integral(x_lower, 1.0);
}

double ThresholdMechanism::efficiency_loss() const {
    // (H,L) sends x above x_lower to seller 2: extra cost V1 - V2 + (1-x)t - xt = 2(1-x)t
    double s = 0.0;
    const auto &y = fees.y();
    const auto &br = y.breaks();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double l = br[k];
        const double r = br[k + 1];
        const double w = 1.0 - y.values()[k];
        s += w * params.t * ((1.0 - l) * (1.0 - l) - (1.0 - r) * (1.0 - r));
    }
    return s;
}

double ThresholdMechanism::transport_cost() const {
    const double t = params.t;
    double s = 0.5 * t;  // everyone travelling to seller 1
    const auto &y = fees.y();
    const auto &br = y.breaks();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double l = br[k];
        const double r = br[k + 1];
        const double w = 1.0 - y.values()[k];
        // (1-x)t - xt over the piece
        s += w * t * ((r - l) - (r * r - l * l));
    }
    return s;
}

double optimal_threshold_x_star(const MarketParams &params, double lambda1) {
    require_asymmetric(params, "x*");
    const double xl = x_lower(params);
    const double bound = 1.0 - 2.0 * lambda1 * (params.H - params.L) / params.L;
    return std::clamp(std::max({xl, 0.5, bound}), xl, 1.0);
}

double optimal_threshold_x_star(const MarketParams &params) {
    return optimal_threshold_x_star(params, x_lower(params));
}

double single_mass_threshold_x_star(const MarketParams &params) {
    require_asymmetric(params, "x*");
    const double xl = x_lower(params);
    const double bound = 1.0 - xl * (params.H - params.L) / params.L;
    return std::clamp(std::max({xl, 0.5, bound}), xl, 1.0);
}

double x_double_star(const MarketParams &params) {
    require_asymmetric(params, "x**");
    return std::max(x_lower(params), 0.5);
}

ThresholdMechanism make_threshold_mechanism(const MarketParams &params, double threshold) {
    require_asymmetric(params, "threshold mechanism");
    const double xl = x_lower(params);
    if (!(threshold >= xl - 1e-12 && threshold <= 1.0 + 1e-12)) {
        throw InputError("threshold must lie in [x_lower, 1]");
    }
    threshold = std::clamp(threshold, xl, 1.0);
    ThresholdMechanism m;
    m.params = params;
    m.x_lower = xl;
    m.x_star = threshold;
    m.fees = payments_from_envelope(StepFunction({xl, threshold, 1.0}, {1.0, 0.5}), params);
    // x -> x_lower IC binds: m_low = m(x_lower) - y(x_lower)(H - L)
    m.fee_low_segment = m.fees.fee(xl) - m.fees.y()(xl) * (params.H - params.L);
    m.seller_fees = m.seller_revenues();
    return m;
}

ThresholdMechanism solve_privacy_duopoly(const MarketParams &params) {
    return make_threshold_mechanism(params, optimal_threshold_x_star(params));
}

ThresholdMechanism solve_no_obedience(const MarketParams &params) {
    return make_threshold_mechanism(params, x_double_star(params));
}

FiniteSolution solve_no_privacy(const MarketParams &params, const Population &pop) {
    require_asymmetric(params, "the no-privacy solution");
    FiniteSolution out;
    out.population = finite_population(pop);
    const auto &types = out.population.types();
    auto &mech = out.mechanism;
    mech.scheme.resize(types.size());
    mech.consumer_fees.resize(types.size());
    for (std::size_t i = 0; i < types.size(); ++i) {
        const bool first = in_first_segment(types[i].x, params);
        mech.scheme[i] = pure(first ? Signal::HH : Signal::LL);
        mech.consumer_fees[i] = params.V1 - types[i].x * params.t - (first ? params.H : params.L);
    }
    mech.seller_fees = {seller_expected_revenue(Seller::S1, mech, out.population, params), 0.0};
    out.revenue = pop.is_uniform() ? params.V1 - 0.5 * params.t : objective(mech, out.population);
    return out;
}

FiniteSolution threshold_on_grid_at(const MarketParams &params, std::size_t n, double threshold) {
    require_asymmetric(params, "threshold mechanism");
    const auto tm = make_threshold_mechanism(params, threshold);
    FiniteSolution out;
    out.population = discretize_uniform(n);
    const double w = 1.0 / static_cast<double>(n);
    std::vector<SignalDistribution> scheme;
    for (const auto &tp : out.population.types()) {
        if (in_first_segment(tp.x, params)) {
            scheme.push_back(pure(Signal::HH));
            continue;
        }
        // cell average; y is 1 below the threshold, including any part of the cell under x_lower
        const double a = tp.x - 0.5 * w;
        const double b = tp.x + 0.5 * w;
        const double below = std::clamp(tm.x_star, a, b) - a;
        const double y = (below + 0.5 * (b - a - below)) / (b - a);
        scheme.push_back(split(y));
    }
    out.mechanism = complete_mechanism(std::move(scheme), out.population, params, true);
    out.revenue = objective(out.mechanism, out.population);
    out.threshold = tm.x_star;
    return out;
}

double grid_rule_threshold(const MarketParams &params, std::size_t n, bool obedience) {
    require_asymmetric(params, "threshold mechanism");
    if (!obedience) return x_double_star(params);
    const auto pop = discretize_uniform(n);
    double lambda1 = 0.0;
    for (const auto &tp : pop.types()) {
        if (in_first_segment(tp.x, params)) lambda1 += tp.mass;
    }
    return optimal_threshold_x_star(params, lambda1);
}

FiniteSolution threshold_on_grid(const MarketParams &params, std::size_t n, bool obedience) {
    const double floor = grid_rule_threshold(params, n, obedience);
    auto best = threshold_on_grid_at(params, n, floor);
    // a cell boundary just above the continuum threshold can do better on a coarse grid
    for (std::size_t k = 1; k <= n; ++k) {
        const double b = static_cast<double>(k) / static_cast<double>(n);
        if (b <= floor + 1e-12) continue;
        auto cand = threshold_on_grid_at(params, n, b);
        if (cand.revenue > best.revenue + 1e-12) best = std::move(cand);
    }
    return best;
}

namespace {

// Branch conditions are read loosely: a condition holds when it holds within eps, so boundary
// instances fall into every adjacent branch and the best audited candidate wins.
constexpr double kBranchEps = 1e-9;

struct Cond {
    double lhs;
    double rhs;
    bool strict;  // lhs > rhs instead of lhs >= rhs

    [[nodiscard]] bool loose() const { return lhs >= rhs - kBranchEps; }
    [[nodiscard]] bool tight() const { return strict ? lhs > rhs + kBranchEps : lhs >= rhs + kBranchEps; }
    [[nodiscard]] Cond negated() const { return {rhs, lhs, !strict}; }
};

Cond ge(double a, double b) { return {a, b, false}; }
Cond gt(double a, double b) { return {a, b, true}; }
Cond le(double a, double b) { return {b, a, false}; }
Cond lt(double a, double b) { return {b, a, true}; }

bool all_loose(std::initializer_list<Cond> cs) {
    return std::all_of(cs.begin(), cs.end(), [](const Cond &c) { return c.loose(); });
}

struct Branch {
    std::string name;
    double y2;
    double y3;
};

std::vector<Branch> prop_a1_branches(const MarketParams &p, std::array<double, 3> x, std::array<double, 3> l) {
    const double D = p.H - p.L;
    const double L = p.L;
    const double t = p.t;
    const double r = l[0] * D / L;
    const double P = std::max(0.5, 1.0 - l[0] * D / (L * (l[1] + l[2])));
    const double Q = (L - p.H + (2.0 - x[0] - x[1]) * t) / (L - p.H + (2.0 - 2.0 * x[1]) * t);
    const double pool_cut = l[2] + x[1] * (1.0 - l[2]);
    const double far_cut = 1.0 - l[0] * D / (2.0 * t);
    std::vector<Branch> out;
    const auto add = [&](bool holds, const std::string &name, double y2, double y3) {
        if (holds) out.push_back({name, std::clamp(y2, 0.0, 1.0), std::clamp(y3, 0.0, 1.0)});
    };

    const Cond case_a = lt(r, 0.5 * l[2]);
    if (case_a.loose()) {
        const Cond a1 = ge(1.0 - l[0] * D / ((l[0] + l[1]) * 2.0 * t), x[1]);
        if (a1.loose()) {
            const Cond c = ge(l[2] * (1.0 - x[2]), (x[2] - x[1]) * (l[0] + l[1]));
            add(c.loose(), "A.1.i", 1.0, 1.0);
            add(c.negated().loose(), "A.1.ii", 1.0, std::max(0.5, 1.0 - l[0] * D / (l[2] * L)));
        }
        if (a1.negated().loose()) {
            const Cond k = le(x[2], pool_cut);
            if (k.loose()) {
                const Cond c = lt(x[2], far_cut);
                add(c.loose(), "A.2.i.a", 1.0, 1.0);
                add(c.negated().loose(), "A.2.i.b", P, P);
            }
            if (k.negated().loose()) {
                const Cond c = lt(l[0] * D, 2.0 * (l[0] + l[1]) * (1.0 - 2.0 * x[1] + x[2]) * t -
                                                  2.0 * l[2] * (1.0 - x[2]) * t);
                add(c.loose(), "A.2.ii.a", 1.0, 1.0 - l[0] * D / (l[2] * L));
                add(c.negated().loose(), "A.2.ii.b", P, P);
            }
        }
    }
    if (case_a.negated().loose()) {
        const Cond b1 = ge(1.0 - l[0] / (1.0 - l[2]) * D / (2.0 * t), x[1]);
        if (b1.loose()) {
            const Cond c = ge((l[0] + l[1]) * (2.0 * x[1] - 2.0 * x[2]) * t + 2.0 * l[2] * (1.0 - x[2]) * t, 0.0);
            add(c.loose(), "B.1.i", 1.0, 1.0);
            add(c.negated().loose(), "B.1.ii", 1.0, 0.5);
        }
        if (b1.negated().loose()) {
            const double upper = 1.0 + l[0] * D / (2.0 * t) - 2.0 * (l[0] + l[1]) * (1.0 - x[1]);
            const Cond b2a = le(x[1], far_cut);
            if (b2a.loose()) {
                const Cond c1 = lt(x[2], far_cut);
                const Cond c2a = ge(pool_cut, x[2]);
                const Cond c2b = ge(x[2], far_cut);
                const Cond c3a = ge(upper, x[2]);
                const Cond c3b = gt(x[2], pool_cut);
                add(c1.loose(), "B.2.i.a", 1.0, 1.0);
                add(all_loose({c2a, c2b}), "B.2.i.b", P, P);
                add(all_loose({c3a, c3b}), "B.2.i.c", P, P);
                const bool other = !c1.tight() && !(c2a.tight() && c2b.tight()) && !(c3a.tight() && c3b.tight());
                add(other, "B.2.i.d", std::max(0.5, 1.0 - (l[0] * D / (L * l[1]) - l[2] / (2.0 * l[1]))), 0.5);
            }
            if (b2a.negated().loose()) {
                const double mixed = std::max(Q, 1.0 - l[0] * D / (L * (l[1] + l[2])));
                const Cond high = ge(r, 1.0 - l[0]);
                const Cond mid_hi = ge(1.0 - l[0], r);
                const Cond half = gt(r, 0.5 * (l[1] + l[2]));
                const Cond half_ge = ge(r, 0.5 * (l[1] + l[2]));
                const bool inner = all_loose({le(x[2], pool_cut), ge(x[2], far_cut)});
                const bool middle = all_loose({ge(upper, x[2]), gt(x[2], pool_cut)});
                for (const auto &[holds, tag] : {std::pair{inner, "B.2.ii.1"}, std::pair{middle, "B.2.ii.2"}}) {
                    if (!holds) continue;
                    add(high.loose(), std::string(tag) + ".a", std::max(0.0, Q), std::max(0.0, Q));
                    add(half.negated().loose(), std::string(tag) + ".b", P, P);
                    add(all_loose({mid_hi, half}), std::string(tag) + ".c", mixed, mixed);
                }
                if (gt(x[2], upper).loose()) {
                    add(high.loose(), "B.2.ii.3.a", std::max(0.0, Q), std::max(0.0, Q));
                    add(all_loose({mid_hi, half_ge}), "B.2.ii.3.b", mixed, mixed);
                    add(half_ge.negated().loose(), "B.2.ii.3.c",
                        1.0 - (l[0] * D / (l[1] * L) - l[2] / (2.0 * l[1])), 0.5);
                }
            }
        }
    }
    return out;
}

}  // namespace

ThreeConsumerSolution solve_three_consumers(const MarketParams &params, std::array<double, 3> x,
                                            std::array<double, 3> masses) {
    require_asymmetric(params, "the three-consumer solution");
    const double xl = x_lower(params);
    if (!(x[0] > 0.0 && x[0] < xl)) throw InputError("x1 must lie in (0, x_lower)");
    if (!(x[1] > xl && x[1] < 1.0 && x[2] > xl && x[2] < 1.0)) throw InputError("x2 and x3 must lie in (x_lower, 1)");
    if (!(x[1] < x[2])) throw InputError("x2 must be below x3");
    const auto pop = Population::discrete({{x[0], masses[0]}, {x[1], masses[1]}, {x[2], masses[2]}});

    ThreeConsumerSolution best;
    best.population = pop;
    double best_rev = -std::numeric_limits<double>::infinity();
    for (const auto &br : prop_a1_branches(params, x, masses)) {
        std::vector<SignalDistribution> scheme{pure(Signal::HH), split(br.y2), split(br.y3)};
        double rev = -std::numeric_limits<double>::infinity();
        Mechanism mech;
        bool ok = false;
        try {
            mech = complete_mechanism(scheme, pop, params, true);
            ok = audit_mechanism(mech, pop, params, {true, true, true}).feasible();
            rev = objective(mech, pop);
        } catch (const InputError &) {
            ok = false;
        }
        best.candidates.emplace_back(br.name, ok ? rev : std::numeric_limits<double>::quiet_NaN());
        if (ok && rev > best_rev + 1e-12) {
            best_rev = rev;
            best.y2 = br.y2;
            best.y3 = br.y3;
            best.binding_case = br.name;
            best.mechanism = mech;
            best.revenue = rev;
            best.feasible = true;
        }
    }
    if (!best.feasible) {
        best.binding_case = best.candidates.empty() ? "none" : "infeasible";
        return best;
    }
    const auto &m = best.mechanism.consumer_fees;
    best.fees = {m[0], m[1], m[2]};
    best.residual_9 = (m[1] - m[2]) - (best.y2 - best.y3) * (2.0 - 2.0 * x[1]) * params.t;
    best.residual_10 = (m[1] - m[0]) - best.y2 * (params.H - params.L);
    return best;
}

FiniteSolution solve_symmetric_two_consumer_no_obedience(const MarketParams &params, double x1, double x2,
                                                         std::array<double, 2> masses) {
    params.validate();
    if (params.variant != Variant::Symmetric) {
        throw UnsupportedScenario("the two-consumer symmetric solution needs the symmetric market");
    }
    const auto cuts = segment_boundaries(params);
    if (!(x1 >= cuts[0] && x1 < 0.5)) throw InputError("x1 must lie in the second segment");
    if (!(x2 > 0.5 && x2 <= cuts[2])) throw InputError("x2 must lie in the third segment");
    if (!(x1 <= 1.0 - x2 + 1e-12)) throw InputError("x1 must not exceed 1 - x2");

    // smallest shares that keep each consumer from mimicking the other when both IRs bind
    const double hl = std::max(0.0, (1.0 - x1 - x2) / (1.0 - 2.0 * x1));
    const double lh = std::max(0.0, (x1 + x2 - 1.0) / (2.0 * x2 - 1.0));

    FiniteSolution out;
    out.population = Population::discrete({{x1, masses[0]}, {x2, masses[1]}});
    auto &mech = out.mechanism;
    SignalDistribution d1{0.0, 0.0, lh, 1.0 - lh};
    SignalDistribution d2{0.0, hl, 0.0, 1.0 - hl};
    mech.scheme = {d1, d2};
    const double t = params.t;
    mech.consumer_fees = {params.V1 - t * x1 - params.L, params.V2 - t * (1.0 - x2) - params.L};
    mech.seller_fees = {seller_expected_revenue(Seller::S1, mech, out.population, params),
                        seller_expected_revenue(Seller::S2, mech, out.population, params)};
    out.revenue = objective(mech, out.population);
    return out;
}

bool StructureReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const StructureCheck &c) { return c.passed || !c.required; });
}

const StructureCheck *StructureReport::find(const std::string &name) const {
    for (const auto &c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

StructureReport check_structure(const Mechanism &mech, const Population &pop, const MarketParams &params,
                                bool uniform_grid, double tol) {
    require_asymmetric(params, "structure checks");
    const auto &types = pop.types();
    mech.validate(types.size(), 1e-6);
    std::vector<std::size_t> seg1;
    std::vector<std::size_t> seg2;
    for (std::size_t i = 0; i < types.size(); ++i) (in_first_segment(types[i].x, params) ? seg1 : seg2).push_back(i);
    const auto y = [&](std::size_t i) { return at(mech.scheme[i], Signal::LL); };
    const auto &m = mech.consumer_fees;
    const double t = params.t;
    const auto label = [&](std::size_t i) { return "x" + std::to_string(i + 1); };

    StructureReport rep;

    StructureCheck a{"first-segment-HH-only", true, true, 0.0, ""};
    for (auto i : seg1) {
        const double gap = 1.0 - at(mech.scheme[i], Signal::HH);
        if (gap > a.worst) a.worst = gap;
        if (gap > tol && a.passed) {
            a.passed = false;
            a.detail = label(i) + " puts " + std::to_string(gap) + " off (H,H)";
        }
    }
    rep.checks.push_back(a);

    StructureCheck b{"monotone-y-and-fees", true, true, 0.0, ""};
    for (std::size_t k = 1; k < seg2.size(); ++k) {
        const auto i = seg2[k - 1];
        const auto j = seg2[k];
        const double dy = y(j) - y(i);
        const double dm = (m[j] - m[i]) / std::max(1.0, std::abs(m[i]));
        b.worst = std::max({b.worst, dy, dm});
        if ((dy > tol || dm > tol) && b.passed) {
            b.passed = false;
            b.detail = label(i) + " -> " + label(j) + (dy > tol ? " y rises" : " fee rises");
        }
    }
    rep.checks.push_back(b);

    StructureCheck c{"sandwich", true, true, 0.0, ""};
    for (std::size_t p = 0; p < seg2.size(); ++p) {
        for (std::size_t q = p + 1; q < seg2.size(); ++q) {
            const auto i = seg2[p];
            const auto j = seg2[q];
            const double d = m[i] - m[j];
            const double hi = 2.0 * (y(i) - y(j)) * (1.0 - types[i].x) * t;
            const double lo = 2.0 * (y(i) - y(j)) * (1.0 - types[j].x) * t;
            const double v = std::max(d - hi, lo - d);
            c.worst = std::max(c.worst, v);
            if (v > tol && c.passed) {
                c.passed = false;
                c.detail = label(i) + ", " + label(j);
            }
        }
    }
    rep.checks.push_back(c);

    StructureCheck d{"y-at-least-half", true, uniform_grid, 0.0, ""};
    for (auto i : seg2) {
        const double v = 0.5 - y(i);
        d.worst = std::max(d.worst, v);
        if (v > tol && d.passed) {
            d.passed = false;
            d.detail = label(i) + " has y = " + std::to_string(y(i));
        }
    }
    rep.checks.push_back(d);

    StructureCheck e{"low-to-boundary-IC-binds", true, true, 0.0, ""};
    if (!seg1.empty() && !seg2.empty()) {
        const auto i = seg1.back();
        const auto j = seg2.front();
        const double own = utility_under(types[i].x, mech.scheme[i], params) - m[i];
        const double mimic = utility_under(types[i].x, mech.scheme[j], params) - m[j];
        e.worst = std::abs(own - mimic);
        if (e.worst > tol * std::max(1.0, std::abs(own))) {
            e.passed = false;
            e.detail = label(i) + " -> " + label(j) + " slack " + std::to_string(own - mimic);
        }
    } else {
        e.detail = "vacuous";
    }
    rep.checks.push_back(e);
    return rep;
}

StructureReport check_structure(const SolveResult &result, const ScenarioSpec &scenario, double tol) {
    return check_structure(result.mechanism, result.population, scenario.params, scenario.population.is_uniform(),
                           tol);
}

}  // namespace broker
