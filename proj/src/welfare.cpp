#include "broker/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace broker {

double WelfareReport::identity_residual() const {
    return total_welfare - (broker_revenue + consumer_surplus_total + seller_profits[0] + seller_profits[1]);
}

double first_best_surplus(const MarketParams &params, const Population &pop) {
    params.validate();
    const bool sym = params.variant == Variant::Symmetric;
    if (pop.is_uniform()) return sym ? params.V1 - 0.25 * params.t : params.V1 - 0.5 * params.t;
    double s = 0.0;
    for (const auto &tp : pop.types()) {
        const double v1 = params.V1 - tp.x * params.t;
        const double v2 = params.V2 - (1.0 - tp.x) * params.t;
        s += tp.mass * (sym ? std::max(v1, v2) : v1);
    }
    return s;
}

WelfareReport report(const Mechanism &mech, const ScenarioSpec &scenario) {
    scenario.validate();
    const auto &params = scenario.params;
    const auto pop = finite_population(scenario.population);
    const auto &types = pop.types();
    mech.validate(types.size(), scenario.tolerance);
    const auto aud = audit_mechanism(mech, pop, params, scenario.toggles(), scenario.tolerance);
    if (!aud.feasible()) {
        const auto v = aud.violations().front();
        throw InputError("mechanism is infeasible: " + v.label + " has slack " + std::to_string(v.slack));
    }

    WelfareReport r;
    r.params = params;
    r.information_rent_by_type.resize(types.size());
    for (std::size_t i = 0; i < types.size(); ++i) {
        const double x = types[i].x;
        const double w = types[i].mass;
        double u = 0.0;
        for (Signal s : kSignals) {
            const double p = at(mech.scheme[i], s);
            if (p == 0.0) continue;
            const auto out = purchase(x, s, params);
            const bool one = out.seller == Seller::S1;
            const double travel = (one ? x : 1.0 - x) * params.t;
            const double value = one ? params.V1 : params.V2;
            u += p * out.net_utility;
            r.transport_cost += w * p * travel;
            r.total_welfare += w * p * (value - travel);
        }
        r.information_rent_by_type[i] = u - mech.consumer_fees[i];
        r.consumer_surplus_total += w * r.information_rent_by_type[i];
        r.broker_revenue += w * mech.consumer_fees[i];
    }
    r.broker_revenue += mech.seller_fees[0] + mech.seller_fees[1];
    r.seller_profits = {seller_expected_revenue(Seller::S1, mech, pop, params) - mech.seller_fees[0],
                        seller_expected_revenue(Seller::S2, mech, pop, params) - mech.seller_fees[1]};
    r.first_best = first_best_surplus(params, pop);
    r.efficiency_loss = std::max(0.0, r.first_best - r.total_welfare);
    return r;
}

WelfareReport report(const ThresholdMechanism &mech) {
    WelfareReport r;
    r.params = mech.params;
    r.broker_revenue = mech.revenue();
    r.consumer_surplus_total = mech.consumer_surplus();
    const auto u = mech.seller_revenues();
    r.seller_profits = {u[0] - mech.seller_fees[0], u[1] - mech.seller_fees[1]};
    r.transport_cost = mech.transport_cost();
    r.first_best = first_best_surplus(mech.params, Population::uniform());
    r.efficiency_loss = mech.efficiency_loss();
    r.total_welfare = r.first_best - r.efficiency_loss;
    return r;
}

Comparison compare(const std::vector<std::string> &names, const std::vector<WelfareReport> &reports, double tol) {
    if (names.size() != reports.size()) throw InputError("scenario names and reports are misaligned");
    for (const auto &r : reports) {
        const auto &a = reports.front().params;
        const auto &b = r.params;
        if (a.V1 != b.V1 || a.V2 != b.V2 || a.t != b.t || a.H != b.H || a.L != b.L || a.variant != b.variant) {
            throw InputError("compared reports use different market parameters");
        }
    }
    Comparison c;
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto &r = reports[i];
        c.rows.push_back({names[i], r.broker_revenue, r.consumer_surplus_total, r.efficiency_loss, r.total_welfare});
        idx.emplace(names[i], i);
    }
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
        for (std::size_t j = i + 1; j < c.rows.size(); ++j) {
            const auto &a = c.rows[i];
            const auto &b = c.rows[j];
            c.deltas.push_back({a.name, b.name, b.revenue - a.revenue, b.rent_total - a.rent_total,
                                b.efficiency_loss - a.efficiency_loss});
        }
    }
    const auto row = [&](const char *n) -> const ComparisonRow * {
        const auto it = idx.find(n);
        return it == idx.end() ? nullptr : &c.rows[it->second];
    };
    const auto expect = [&](bool ok, const std::string &what) {
        if (!ok) c.violations.push_back(what);
    };
    const auto *np = row("no_privacy");
    const auto *du = row("duopoly");
    const auto *no = row("no_obedience");
    if (np && du) {
        expect(np->efficiency_loss <= du->efficiency_loss + tol, "efficiency_loss(no_privacy) <= efficiency_loss(duopoly)");
        expect(du->revenue <= np->revenue + tol, "revenue(duopoly) <= revenue(no_privacy)");
    }
    if (du && no) {
        expect(du->efficiency_loss <= no->efficiency_loss + tol, "efficiency_loss(duopoly) <= efficiency_loss(no_obedience)");
        expect(du->rent_total >= no->rent_total - tol, "rent(duopoly) >= rent(no_obedience)");
        expect(du->revenue <= no->revenue + tol, "revenue(duopoly) <= revenue(no_obedience)");
    }
    if (np && no) expect(no->revenue <= np->revenue + tol, "revenue(no_obedience) <= revenue(no_privacy)");
    return c;
}

}  // namespace broker
