#include "broker/lp_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

namespace broker {

namespace {

std::string type_label(std::size_t i) { return "x" + std::to_string(i + 1); }

std::string seller_label(Seller s) { return "S" + std::to_string(static_cast<int>(s)); }

bool dropped(const BuildOptions &opt, const std::string &name) {
    return std::find(opt.drop_rows.begin(), opt.drop_rows.end(), name) != opt.drop_rows.end();
}

double mechanism_revenue(const Mechanism &mech, const Population &pop) {
    double r = mech.seller_fees[0] + mech.seller_fees[1];
    for (std::size_t i = 0; i < pop.size(); ++i) r += pop.types()[i].mass * mech.consumer_fees[i];
    return r;
}

}  // namespace

void ScenarioSpec::validate() const {
    params.validate();
    if (population.is_uniform() && population.grid() < 2) throw InputError("uniform grid size must be at least 2");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw InputError("tolerance must be positive");
}

std::vector<double> Program::encode(const Mechanism &mech) const {
    const std::size_t n = population.size();
    mech.validate(n, 1e-6);
    std::vector<double> x(lp.num_variables(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (Signal s : kSignals) x[pi_index(i, s)] = at(mech.scheme[i], s);
        x[fee_index(i)] = mech.consumer_fees[i];
    }
    x[seller_fee_index(Seller::S1)] = mech.seller_fees[0];
    x[seller_fee_index(Seller::S2)] = mech.seller_fees[1];
    return x;
}

Mechanism Program::decode(const std::vector<double> &x) const {
    const std::size_t n = population.size();
    Mechanism mech;
    mech.scheme.resize(n);
    mech.consumer_fees.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (Signal s : kSignals) at(mech.scheme[i], s) = x[pi_index(i, s)];
        mech.consumer_fees[i] = x[fee_index(i)];
    }
    mech.seller_fees = {x[seller_fee_index(Seller::S1)], x[seller_fee_index(Seller::S2)]};
    return mech;
}

Program build_program(const ScenarioSpec &scenario, const BuildOptions &options) {
    scenario.validate();
    Program prog;
    prog.population = finite_population(scenario.population);
    const auto &types = prog.population.types();
    const auto &params = scenario.params;
    const std::size_t n = types.size();
    if (n == 0) throw InputError("population is empty");

    auto &lp = prog.lp;
    const std::size_t nv = 5 * n + 2;
    lp.objective.assign(nv, 0.0);
    lp.bounds.assign(nv, lp::Bound{});
    lp.names.resize(nv);
    for (std::size_t i = 0; i < n; ++i) {
        for (Signal s : kSignals) {
            lp.names[prog.pi_index(i, s)] = "pi[" + std::string(to_string(s)) + "|" + type_label(i) + "]";
        }
        lp.names[prog.fee_index(i)] = "m[" + type_label(i) + "]";
        lp.objective[prog.fee_index(i)] = types[i].mass;
        if (!scenario.fee_nonneg) lp.bounds[prog.fee_index(i)].lower = -lp::kInf;
    }
    for (Seller s : {Seller::S1, Seller::S2}) {
        lp.names[prog.seller_fee_index(s)] = "m" + std::to_string(static_cast<int>(s));
        lp.objective[prog.seller_fee_index(s)] = 1.0;
    }
    if (options.tie_break && params.variant == Variant::Asymmetric) {
        lp.secondary.assign(nv, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Signal pref = in_first_segment(types[i].x, params) ? Signal::HH : Signal::LL;
            lp.secondary[prog.pi_index(i, pref)] = types[i].mass;
        }
    }

    // Utilities enter relative to V1; rows that mix types rely on each simplex row summing to one.
    const double shift = params.V1;
    std::vector<std::array<double, 4>> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (Signal s : kSignals) u[i][static_cast<std::size_t>(s)] = purchase(types[i].x, s, params).net_utility - shift;
    }

    std::size_t n_dropped = 0;
    const auto add_row = [&](std::vector<double> coef, lp::Relation rel, double rhs, std::string name, RowInfo info) {
        if (dropped(options, name)) {
            ++n_dropped;
            return;
        }
        lp.constraints.push_back({std::move(coef), rel, rhs, std::move(name)});
        prog.rows.push_back(info);
    };

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> c(nv, 0.0);
        for (Signal s : kSignals) c[prog.pi_index(i, s)] = 1.0;
        add_row(std::move(c), lp::Relation::Equal, 1.0, "SUM[" + type_label(i) + "]",
                {ConstraintFamily::SimplexInternal, static_cast<int>(i), -1, 1.0});
    }
    if (scenario.consumer_ic) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                // U(x_i, x_j) - m_j <= U(x_i) - m_i
                std::vector<double> c(nv, 0.0);
                for (Signal s : kSignals) {
                    const double us = u[i][static_cast<std::size_t>(s)];
                    c[prog.pi_index(j, s)] += us;
                    c[prog.pi_index(i, s)] -= us;
                }
                c[prog.fee_index(j)] -= 1.0;
                c[prog.fee_index(i)] += 1.0;
                add_row(std::move(c), lp::Relation::LessEqual, 0.0, "IC[" + type_label(i) + "->" + type_label(j) + "]",
                        {ConstraintFamily::IC, static_cast<int>(i), static_cast<int>(j), 0.0});
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> c(nv, 0.0);
        for (Signal s : kSignals) c[prog.pi_index(i, s)] = -u[i][static_cast<std::size_t>(s)];
        c[prog.fee_index(i)] = 1.0;
        add_row(std::move(c), lp::Relation::LessEqual, shift, "IR[" + type_label(i) + "]",
                {ConstraintFamily::ConsumerIR, static_cast<int>(i), -1, 0.0});
    }
    if (scenario.obedience) {
        for (Seller k : {Seller::S1, Seller::S2}) {
            for (Price p : {Price::H, Price::L}) {
                const Price q = p == Price::H ? Price::L : Price::H;
                std::vector<double> c(nv, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    for (Signal s : kSignals) {
                        if (price_of(s, k) != p) continue;
                        const double obey = purchase(types[i].x, s, params).seller == k ? params.value(p) : 0.0;
                        const double dev =
                            purchase(types[i].x, with_price(s, k, q), params).seller == k ? params.value(q) : 0.0;
                        c[prog.pi_index(i, s)] = types[i].mass * (dev - obey);
                    }
                }
                add_row(std::move(c), lp::Relation::LessEqual, 0.0,
                        "OB[" + seller_label(k) + ":" + std::string(to_string(p)) + "->" + std::string(to_string(q)) + "]",
                        {ConstraintFamily::Obedience, static_cast<int>(k) - 1, static_cast<int>(p), 0.0});
            }
        }
    }
    for (Seller k : {Seller::S1, Seller::S2}) {
        std::vector<double> c(nv, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (Signal s : kSignals) {
                const auto out = purchase(types[i].x, s, params);
                if (out.seller == k) c[prog.pi_index(i, s)] = -types[i].mass * out.price;
            }
        }
        c[prog.seller_fee_index(k)] = 1.0;
        add_row(std::move(c), lp::Relation::LessEqual, 0.0, "SIR[" + seller_label(k) + "]",
                {ConstraintFamily::SellerIR, static_cast<int>(k) - 1, -1, 0.0});
    }
    lp.validate();
    if (n_dropped != options.drop_rows.size()) throw InputError("drop_rows names a row the program does not have");
    return prog;
}

const ConstraintRecord *ConstraintReport::find(const std::string &name) const {
    for (const auto &r : records) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

std::vector<ConstraintRecord> ConstraintReport::binding() const {
    std::vector<ConstraintRecord> out;
    for (auto family : {ConstraintFamily::IC, ConstraintFamily::ConsumerIR, ConstraintFamily::Obedience,
                        ConstraintFamily::SellerIR, ConstraintFamily::SimplexInternal}) {
        for (const auto &r : records) {
            if (r.family == family && r.binding) out.push_back(r);
        }
    }
    return out;
}

SolveResult solve(const ScenarioSpec &scenario, const SolveOptions &options) {
    const auto start = std::chrono::steady_clock::now();
    const Program prog = build_program(scenario, options.build);
    if (options.lp_dump != nullptr) *options.lp_dump = lp::dump(prog.lp);
    const auto sol = lp::solve(prog.lp, options.simplex);
    if (sol.status != lp::Status::Optimal) {
        throw lp::SolverFailure(std::string("broker program reported ") + lp::to_string(sol.status) +
                                "; the null mechanism is always feasible, so the program is malformed");
    }

    SolveResult res;
    res.population = prog.population;
    res.mechanism = prog.decode(sol.primal);
    // roundoff-level cleanup: rows are stated relative to V1, so each distribution must sum to one exactly
    for (auto &d : res.mechanism.scheme) {
        double sum = 0.0;
        for (double &p : d) {
            p = std::max(p, 0.0);
            sum += p;
        }
        for (double &p : d) p /= sum;
    }
    res.revenue = sol.objective_value;
    const auto &params = scenario.params;
    const std::size_t n = prog.population.size();
    res.consumer_payoffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        res.consumer_payoffs[i] = truthful_utility(i, res.mechanism, prog.population, params) - res.mechanism.consumer_fees[i];
    }
    for (Seller k : {Seller::S1, Seller::S2}) {
        const auto idx = static_cast<std::size_t>(k) - 1;
        res.seller_payoffs[idx] =
            seller_expected_revenue(k, res.mechanism, prog.population, params) - res.mechanism.seller_fees[idx];
    }

    const auto slacks = lp::audit(prog.lp, sol.primal, scenario.tolerance);
    for (std::size_t r = 0; r < prog.lp.constraints.size(); ++r) {
        const auto &info = prog.rows[r];
        const double slack = slacks.entries[r].slack;
        res.binding.records.push_back({info.family, prog.lp.constraints[r].name, info.i, info.j, slack,
                                       std::abs(slack) <= kBindingTolerance * std::max(1.0, std::abs(info.rhs))});
    }
    res.audit = audit_mechanism(res.mechanism, prog.population, params, scenario.toggles(), scenario.tolerance);

    res.stats.rows = sol.rows;
    res.stats.columns = sol.columns;
    res.stats.iterations = sol.iterations;
    res.stats.phase1_iterations = sol.phase1_iterations;
    res.stats.secondary_iterations = sol.secondary_iterations;
    res.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::vector<ConstraintRecord> binding_report(const SolveResult &result, const ScenarioSpec &) {
    return result.binding.binding();
}

BruteForceReport brute_force_verify(const ScenarioSpec &scenario, std::size_t grid_steps,
                                    const BuildOptions &lp_options) {
    scenario.validate();
    if (grid_steps < 2 || grid_steps > 21) throw InputError("grid_steps must lie in [2, 21]");
    const Population pop = finite_population(scenario.population);
    const auto &types = pop.types();
    const auto &params = scenario.params;
    const std::size_t n = types.size();
    const bool asym = params.variant == Variant::Asymmetric;

    std::vector<std::size_t> free_types;
    for (std::size_t i = 0; i < n; ++i) {
        if (!asym || !in_first_segment(types[i].x, params)) free_types.push_back(i);
    }
    if (asym && (free_types.size() > 2 || n > 4)) {
        throw InputError("brute force supports at most 2 second-segment types and 4 types in total");
    }
    if (!asym && n > 2) throw InputError("brute force supports at most 2 types in the symmetric variant");

    BruteForceReport rep;
    SolveOptions so;
    so.build = lp_options;
    rep.lp_revenue = solve(scenario, so).revenue;

    const double step = 1.0 / static_cast<double>(grid_steps - 1);
    // Candidate distributions for one free type.
    std::vector<SignalDistribution> choices;
    if (asym) {
        for (std::size_t k = 0; k < grid_steps; ++k) {
            const double y = static_cast<double>(k) * step;
            choices.push_back({0.0, 1.0 - y, 0.0, y});
        }
    } else {
        const std::size_t total = grid_steps - 1;
        for (std::size_t a = 0; a <= total; ++a) {
            for (std::size_t b = 0; a + b <= total; ++b) {
                for (std::size_t c = 0; a + b + c <= total; ++c) {
                    const std::size_t d = total - a - b - c;
                    choices.push_back({a * step, b * step, c * step, static_cast<double>(d) * step});
                }
            }
        }
    }

    Mechanism mech;
    mech.scheme.assign(n, SignalDistribution{1.0, 0.0, 0.0, 0.0});
    mech.consumer_fees.assign(n, 0.0);
    rep.grid_revenue = -std::numeric_limits<double>::infinity();
    std::optional<Mechanism> best;

    std::vector<std::size_t> idx(free_types.size(), 0);
    for (;;) {
        for (std::size_t f = 0; f < free_types.size(); ++f) mech.scheme[free_types[f]] = choices[idx[f]];
        ++rep.points;
        bool ok = true;
        if (scenario.obedience) {
            for (Seller k : {Seller::S1, Seller::S2}) {
                for (Price p : {Price::H, Price::L}) {
                    const Price q = p == Price::H ? Price::L : Price::H;
                    if (obedience_slack(k, p, q, mech, pop, params) < -scenario.tolerance) ok = false;
                }
            }
        }
        if (ok) {
            auto fees = max_extractable_fees(mech.scheme, pop, params, scenario.consumer_ic, scenario.fee_nonneg);
            if (fees) {
                ++rep.feasible_points;
                mech.consumer_fees = *fees;
                mech.seller_fees = {seller_expected_revenue(Seller::S1, mech, pop, params),
                                    seller_expected_revenue(Seller::S2, mech, pop, params)};
                const double r = mechanism_revenue(mech, pop);
                if (r > rep.grid_revenue) {
                    rep.grid_revenue = r;
                    best = mech;
                }
            }
        }
        std::size_t f = 0;
        while (f < idx.size() && ++idx[f] == choices.size()) idx[f++] = 0;
        if (f == idx.size()) break;
    }

    // Rounding each free y up to the grid keeps obedience and implementability; each fee moves by at most
    // n * step * (H - L) along a shortest path.
    rep.resolution_bound = asym ? static_cast<double>(free_types.size()) * static_cast<double>(n) * step *
                                      (params.H - params.L)
                                : std::numeric_limits<double>::infinity();
    const double tol = 1e-6 * std::max(1.0, std::abs(rep.lp_revenue));
    if (best && rep.grid_revenue > rep.lp_revenue + tol) {
        rep.counterexample = Counterexample{best->scheme, best->consumer_fees, rep.grid_revenue, rep.lp_revenue,
                                            "a gridded mechanism beats the LP optimum"};
    } else if (best && rep.lp_revenue > rep.grid_revenue + rep.resolution_bound + tol) {
        rep.counterexample = Counterexample{best->scheme, best->consumer_fees, rep.grid_revenue, rep.lp_revenue,
                                            "the LP optimum exceeds every gridded mechanism by more than the bound"};
    }
    return rep;
}

}  // namespace broker
