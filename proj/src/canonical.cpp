#include "broker/canonical.hpp"

#include <algorithm>
#include <cmath>

namespace broker::canonical {

ScenarioSpec three_consumers() {
    ScenarioSpec s;
    s.params = MarketParams::asymmetric(1000.0, 1.0, 10.0, 9.0);
    s.population = Population::discrete({{3.0 / 8.0, 0.9}, {4.0 / 6.0, 0.05}, {5.0 / 6.0, 0.05}});
    return s;
}

ScenarioSpec symmetric_pair(bool obedience) {
    ScenarioSpec s;
    s.params = MarketParams::symmetric(10000.0, 18.0, 10.0, 1.0);
    s.population = Population::discrete({{3.0 / 8.0, 0.95}, {9.0 / 16.0, 0.05}});
    s.obedience = obedience;
    return s;
}

ScenarioSpec uniform_market(std::size_t grid, bool obedience) {
    ScenarioSpec s;
    s.params = MarketParams::asymmetric(1000.0, 1.0, 10.0, 9.0);
    s.population = Population::uniform(grid);
    s.obedience = obedience;
    return s;
}

ReferenceMassCheck evaluate_reference_masses() {
    const auto sc = symmetric_pair(true);
    ReferenceMassCheck out;
    out.lp = solve(sc);
    out.lp_objective = out.lp.revenue;
    const auto &pop = out.lp.population;
    const auto &params = sc.params;

    auto &m = out.point;
    m.scheme.resize(2);
    for (std::size_t i = 0; i < 2; ++i) {
        double row = 0.0;
        for (double v : kReferenceMasses[i]) row += v;
        for (std::size_t k = 0; k < 4; ++k) m.scheme[i][k] = kReferenceMasses[i][k] / row;
        for (std::size_t k = 0; k < 4; ++k) {
            const double joint = out.lp.mechanism.scheme[i][k] * pop.types()[i].mass;
            out.pointwise_gap = std::max(out.pointwise_gap, std::abs(joint - kReferenceMasses[i][k]));
        }
    }
    auto fees = max_extractable_fees(m.scheme, pop, params, true, true);
    if (fees) {
        m.consumer_fees = *fees;
    } else {
        m.consumer_fees.assign(2, 0.0);
    }
    m.seller_fees = {seller_expected_revenue(Seller::S1, m, pop, params),
                     seller_expected_revenue(Seller::S2, m, pop, params)};
    out.point_objective = m.seller_fees[0] + m.seller_fees[1];
    for (std::size_t i = 0; i < 2; ++i) out.point_objective += pop.types()[i].mass * m.consumer_fees[i];

    const auto aud = audit_mechanism(m, pop, params, sc.toggles(), 0.0);
    out.worst_slack = 0.0;
    for (const auto &e : aud.entries) {
        if (e.slack < out.worst_slack) {
            out.worst_slack = e.slack;
            out.worst_label = e.label;
        }
    }

    // same program with every joint mass boxed to the reference value +- rounding
    auto prog = build_program(sc);
    for (std::size_t i = 0; i < 2; ++i) {
        const double w = pop.types()[i].mass;
        for (Signal s : kSignals) {
            const auto k = static_cast<std::size_t>(s);
            auto &b = prog.lp.bounds[prog.pi_index(i, s)];
            b.lower = std::max(0.0, (kReferenceMasses[i][k] - kReferenceRounding) / w);
            b.upper = (kReferenceMasses[i][k] + kReferenceRounding) / w;
        }
    }
    prog.lp.secondary.clear();
    const auto sol = lp::solve(prog.lp);
    out.box_feasible = sol.status == lp::Status::Optimal;
    if (out.box_feasible) out.box_objective = sol.objective_value;
    return out;
}

}  // namespace broker::canonical
