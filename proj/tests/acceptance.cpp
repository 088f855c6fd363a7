// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "broker/analytic.hpp"
#include "broker/canonical.hpp"
#include "broker/welfare.hpp"
#include "canonical_lps.hpp"

using namespace broker;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool ok, const std::string &what, const std::string &detail) {
    std::printf("criterion %d: %s  %s  [%s]\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char *f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Asymmetric market with x_lower strictly inside (0, 1).
MarketParams random_params(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t = 0.5 + 4.5 * u(rng);
    const double L = 1.0 + 9.0 * u(rng);
    const double H = L + (0.1 + 1.8 * u(rng)) * t;
    const double V = H + t + 1.0 + 100.0 * u(rng);
    return MarketParams::asymmetric(V, t, H, L);
}

Population random_population(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TypePoint> types(n);
    double total = 0.0;
    for (auto &tp : types) {
        tp.x = u(rng);
        tp.mass = 0.05 + u(rng);
        total += tp.mass;
    }
    for (auto &tp : types) tp.mass /= total;
    std::sort(types.begin(), types.end(), [](const TypePoint &a, const TypePoint &b) { return a.x < b.x; });
    for (std::size_t i = 1; i < n; ++i) {
        if (types[i].x - types[i - 1].x < 1e-3) types[i].x = std::min(1.0, types[i - 1].x + 1e-3);
    }
    return Population::discrete(types);
}

void criterion1() {
    const auto t0 = Clock::now();
    const auto c = canonical::evaluate_reference_masses();
    const double secs = since(t0);
    const double gap = std::abs(c.lp_objective - c.point_objective);
    const bool ok = gap <= 1e-3 && c.worst_slack >= -1e-6 && secs < 1.0;
    std::string detail = fmt("oracle %.9f, reference point %.9f, |diff| %.3g, worst slack %.3g", c.lp_objective,
                             c.point_objective, gap, c.worst_slack);
    detail += " at " + c.worst_label;
    detail += fmt(", pointwise gap %.3g", c.pointwise_gap);
    detail += c.box_feasible ? fmt(", a feasible point within +-5e-6 of the reference reaches %.9f", c.box_objective)
                             : std::string(", no feasible point within the reference rounding");
    detail += fmt(", %.3f s", secs);
    verdict(1, ok, "reference masses: objective and feasibility audit", detail);
}

void criterion2() {
    const auto t0 = Clock::now();
    const auto sc = canonical::three_consumers();
    const auto r = solve(sc);
    const auto &ty = r.population.types();
    const auto br = solve_three_consumers(sc.params, {ty[0].x, ty[1].x, ty[2].x}, {ty[0].mass, ty[1].mass, ty[2].mass});
    const double secs = since(t0);
    const double y2 = at(r.mechanism.scheme[1], Signal::LL);
    const double y3 = at(r.mechanism.scheme[2], Signal::LL);
    const double ir2 = r.binding.find("IR[x2]")->slack;
    const double ir3 = r.binding.find("IR[x3]")->slack;
    const bool agree = std::abs(br.y2 - y2) <= 1e-6 && std::abs(br.y3 - y3) <= 1e-6;
    const bool ok = std::abs(y2 - y3) <= 1e-6 && ir2 <= 1e-7 && ir3 > 1e-4 && secs < 1.0;
    std::string detail = fmt("oracle y2 %.9g y3 %.9g, x2-IR slack %.3g, x3-IR slack %.9g", y2, y3, ir2, ir3);
    detail += fmt(", branch tree y2 %.9g y3 %.9g", br.y2, br.y3);
    detail += agree ? ", agree" : ", discrepancy (oracle is ground truth)";
    detail += fmt(", reference 0.234 for comparison, %.3f s", secs);
    verdict(2, ok, "three-consumer structure", detail);
}

void criterion3() {
    const auto t0 = Clock::now();
    const auto params = canonical::uniform_market().params;
    bool ok = true;
    double prev = INFINITY;
    std::string detail;
    for (std::size_t n : {10u, 25u, 50u}) {
        const auto sc = canonical::uniform_market(n);
        const auto r = solve(sc);
        const auto g = threshold_on_grid(params, n, true);
        const double gap = std::abs(r.revenue - g.revenue);
        const auto st = check_structure(r, sc, 1e-6);
        ok = ok && st.passed() && gap <= prev + 1e-9;
        if (n == 50) ok = ok && gap <= 1e-3 * params.t;
        prev = gap;
        detail += fmt("N=%.0f gap %.3g; ", static_cast<double>(n), gap);
        if (!st.passed()) detail += "structure failed; ";
    }
    const double secs = since(t0);
    ok = ok && secs < 10.0;
    detail += fmt("%.3f s", secs);
    verdict(3, ok, "uniform grid convergence and structure", detail);
}

void criterion4_and_5() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> size(1, 5);
    bool order_ok = true;
    bool extract_ok = true;
    double worst_order = INFINITY;
    double worst_payoff = 0.0;
    double worst_fb = 0.0;
    std::size_t open_instances = 0;

    const auto check_open = [&](const ScenarioSpec &open, const SolveResult &r) {
        ++open_instances;
        for (double v : r.consumer_payoffs) worst_payoff = std::max(worst_payoff, std::abs(v));
        worst_payoff = std::max({worst_payoff, std::abs(r.seller_payoffs[0]), std::abs(r.seller_payoffs[1])});
        worst_fb = std::max(worst_fb, std::abs(r.revenue - first_best_surplus(open.params, r.population)));
    };

    for (int k = 0; k < 100; ++k) {
        ScenarioSpec sc;
        sc.params = random_params(rng);
        sc.population = random_population(rng, size(rng));
        auto open = sc;
        open.consumer_ic = false;
        auto ic = sc;
        ic.obedience = false;
        const auto r_open = solve(open);
        const double a = r_open.revenue;
        const double b = solve(ic).revenue;
        const double c = solve(sc).revenue;
        worst_order = std::min({worst_order, a - b, b - c});
        check_open(open, r_open);
    }
    order_ok = worst_order >= -1e-9;

    // uniform instances: threshold ordering, and the orderings on a grid
    double worst_threshold = INFINITY;
    for (int k = 0; k < 20; ++k) {
        const auto p = random_params(rng);
        const double xl = x_lower(p);
        const double xs = x_double_star(p);
        const double xo = optimal_threshold_x_star(p);
        worst_threshold = std::min({worst_threshold, xs - xl, xo - xs});
        if (k < 5) {
            ScenarioSpec sc;
            sc.params = p;
            sc.population = Population::uniform(10);
            auto open = sc;
            open.consumer_ic = false;
            auto ic = sc;
            ic.obedience = false;
            const auto r_open = solve(open);
            const double b = solve(ic).revenue;
            worst_order = std::min({worst_order, r_open.revenue - b, b - solve(sc).revenue});
            check_open(open, r_open);
        }
    }
    order_ok = worst_order >= -1e-9 && worst_threshold >= -1e-12;
    const double secs = since(t0);
    verdict(4, order_ok && secs < 30.0, "scenario ordering on random instances",
            fmt("100 discrete + 5 uniform-grid instances, worst ordering slack %.3g; 20 uniform, worst threshold "
                "slack %.3g; %.3f s",
                worst_order, worst_threshold, secs));

    for (const auto &base : {canonical::three_consumers(), canonical::uniform_market(20), canonical::uniform_market(50)}) {
        auto open = base;
        open.consumer_ic = false;
        check_open(open, solve(open));
    }
    extract_ok = worst_payoff <= 1e-9 && worst_fb <= 1e-9;
    verdict(5, extract_ok, "no-privacy full extraction",
            fmt("%.0f IC-off instances, largest |payoff| %.3g, largest |revenue - first best| %.3g",
                static_cast<double>(open_instances), worst_payoff, worst_fb));
}

void criterion6() {
    const auto m = solve_privacy_duopoly(canonical::uniform_market().params);
    const double h = 1e-4;
    const double t = m.params.t;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(h, 1.0 - h);
    double worst = 0.0;
    int points = 0;
    while (points < 100) {
        const double x = u(rng);
        if (std::abs(x - m.x_lower) <= 2 * h || std::abs(x - m.x_star) <= 2 * h) continue;
        const double fd = (m.payoff(x + h) - m.payoff(x - h)) / (2 * h);
        // the first segment buys from seller 1 for sure, so y = 1 there
        const double y = x <= m.x_lower ? 1.0 : m.y(x);
        worst = std::max(worst, std::abs(fd - (1.0 - 2.0 * y) * t));
        ++points;
    }
    verdict(6, worst <= 1e-6, "envelope derivative", fmt("100 points, step 1e-4, largest error %.3g", worst));
}

void criterion7() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int agree = 0;
    double worst_excess = -INFINITY;
    std::string first_bad;
    for (int k = 0; k < 20; ++k) {
        ScenarioSpec sc;
        sc.params = random_params(rng);
        const double xl = x_lower(sc.params);
        // up to two types in each segment
        std::vector<TypePoint> types;
        const int n1 = static_cast<int>(u(rng) * 3);
        const int n2 = 1 + static_cast<int>(u(rng) * 2);
        for (int i = 0; i < n1; ++i) types.push_back({xl * (0.05 + 0.9 * u(rng)), 0.1 + u(rng)});
        for (int i = 0; i < n2; ++i) types.push_back({xl + (1.0 - xl) * (0.05 + 0.9 * u(rng)), 0.1 + u(rng)});
        double total = 0.0;
        for (const auto &tp : types) total += tp.mass;
        for (auto &tp : types) tp.mass /= total;
        std::sort(types.begin(), types.end(), [](const TypePoint &a, const TypePoint &b) { return a.x < b.x; });
        sc.population = Population::discrete(types);
        sc.obedience = k % 2 == 0;
        const auto rep = brute_force_verify(sc);
        worst_excess = std::max(worst_excess, rep.lp_revenue - rep.grid_revenue - rep.resolution_bound);
        if (!rep.counterexample) ++agree;
        else if (first_bad.empty()) first_bad = ", first disagreement: " + rep.counterexample->reason;
    }

    ScenarioSpec neg;
    neg.params = MarketParams::asymmetric(100, 5, 10, 5);
    neg.population = Population::discrete({{0.2, 0.8}, {0.7, 0.2}});
    BuildOptions loose;
    loose.drop_rows = {"IC[x1->x2]"};
    const auto ctl = brute_force_verify(neg, 21, loose);
    const bool detected = ctl.counterexample.has_value();
    const double secs = since(t0);
    std::string detail = fmt("%d/20 agree, largest (LP - grid - bound) %.3g", agree, worst_excess);
    detail += first_bad;
    detail += fmt("; control without IC[x1->x2]: LP %.9g vs grid %.9g, ", ctl.lp_revenue, ctl.grid_revenue);
    detail += detected ? "counterexample detected" : "NOT detected";
    detail += fmt(", %.3f s", secs);
    verdict(7, agree == 20 && detected, "brute-force agreement and negative control", detail);
}

void criterion8() {
    const auto off = canonical::symmetric_pair(false);
    const auto on = canonical::symmetric_pair(true);
    const auto &ty = off.population.types();
    const auto r = solve(off);
    const auto r_on = solve(on);
    const double t = off.params.t;
    const double V = off.params.V1;
    const double formula = ty[0].mass * (V - t * ty[0].x) + ty[1].mass * (V - t * (1.0 - ty[1].x));
    const bool ir1 = r.binding.find("IR[x1]")->binding;
    const bool ir2 = r.binding.find("IR[x2]")->binding;
    const bool ok = std::abs(r.revenue - formula) <= 1e-6 && ir1 && ir2 && r_on.revenue < r.revenue;
    std::string detail = fmt("oracle %.9f, formula %.9f, with obedience %.9f", r.revenue, formula, r_on.revenue);
    detail += std::string(", IRs binding: ") + (ir1 ? "x1 " : "") + (ir2 ? "x2" : "");
    verdict(8, ok, "symmetric two-consumer extraction", detail);
}

void criterion9() {
    int passed = 0;
    std::string bad;
    const auto cases = testlps::canonical_cases();
    for (const auto &c : cases) {
        const auto s = lp::solve(c.lp);
        bool ok = s.status == c.status;
        if (ok && c.status == lp::Status::Optimal) {
            ok = std::abs(s.objective_value - c.objective) <= 1e-9;
            for (std::size_t j = 0; j < c.point.size(); ++j) ok = ok && std::abs(s.primal[j] - c.point[j]) <= 1e-9;
        }
        if (ok) ++passed;
        else bad += " " + c.name;
    }
    verdict(9, passed == static_cast<int>(cases.size()), "simplex canonical LPs",
            fmt("%d/%zu", passed, cases.size()) + (bad.empty() ? "" : ", failed:" + bad));
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4_and_5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    return failures;
}
