#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace brokerctl {

using namespace broker;

namespace {

void write_output(const json &j, const std::string &out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw InputError(out + ": cannot write");
    f << text;
}

double objective(const Mechanism &m, const Population &pop) {
    double r = m.seller_fees[0] + m.seller_fees[1];
    for (std::size_t i = 0; i < pop.size(); ++i) r += pop.types()[i].mass * m.consumer_fees[i];
    return r;
}

json lp_to_json(const SolveResult &r, const ScenarioSpec &spec) {
    json j;
    j["revenue"] = metric(r.revenue);
    j["mechanism"] = mechanism_to_json(r.mechanism, r.population);
    json pay = json::array();
    for (double v : r.consumer_payoffs) pay.push_back(metric(v));
    j["consumer_payoffs"] = pay;
    j["seller_payoffs"] = {metric(r.seller_payoffs[0]), metric(r.seller_payoffs[1])};
    json binding = json::array();
    for (const auto &b : binding_report(r, spec)) binding.push_back(b.name);
    j["binding"] = binding;
    json rows = json::array();
    for (const auto &c : r.binding.records) {
        rows.push_back({{"constraint", c.name},
                        {"family", std::string(to_string(c.family))},
                        {"slack", metric(c.slack)},
                        {"binding", c.binding}});
    }
    j["constraints"] = rows;
    j["audit"] = audit_to_json(r.audit);
    j["stats"] = {{"rows", r.stats.rows},
                  {"columns", r.stats.columns},
                  {"iterations", r.stats.iterations},
                  {"phase1_iterations", r.stats.phase1_iterations},
                  {"secondary_iterations", r.stats.secondary_iterations}};
    j["welfare"] = welfare_to_json(report(r.mechanism, spec));
    if (spec.params.variant == Variant::Asymmetric && spec.consumer_ic) {
        j["structure"] = structure_to_json(check_structure(r, spec));
    }
    return j;
}

json analytic_to_json(const AnalyticOutcome &a, const ScenarioSpec &spec) {
    json j;
    j["method"] = a.method;
    j["revenue"] = metric(a.revenue);
    if (a.closed_form_revenue) j["revenue_closed_form"] = metric(*a.closed_form_revenue);
    for (auto it = a.extra.begin(); it != a.extra.end(); ++it) j[it.key()] = it.value();
    j["mechanism"] = mechanism_to_json(a.mechanism, a.population);
    const auto aud = audit_mechanism(a.mechanism, a.population, spec.params, spec.toggles(), spec.tolerance);
    j["audit"] = audit_to_json(aud);
    if (aud.feasible()) j["welfare"] = welfare_to_json(report(a.mechanism, spec));
    if (a.closed_form_welfare) j["welfare_closed_form"] = welfare_to_json(*a.closed_form_welfare);
    if (spec.params.variant == Variant::Asymmetric && spec.consumer_ic) {
        j["structure"] = structure_to_json(
            check_structure(a.mechanism, a.population, spec.params, spec.population.is_uniform()));
    }
    return j;
}

bool three_type_shape(const ScenarioSpec &spec) {
    if (spec.population.is_uniform() || spec.population.size() != 3) return false;
    const auto &ty = spec.population.types();
    const double xl = x_lower(spec.params);
    return ty[0].x > 0.0 && ty[0].x < xl && ty[1].x > xl && ty[2].x < 1.0;
}

}  // namespace

void apply(const Overrides &o, ScenarioFile &s) {
    if (o.grid) {
        if (*o.grid < 2) throw InputError("--grid: must be at least 2");
        s.spec.population = Population::uniform(*o.grid);
    }
    if (o.tolerance) {
        if (!(*o.tolerance > 0.0)) throw InputError("--tol: must be positive");
        s.spec.tolerance = *o.tolerance;
    }
}

double gap_tolerance(const ScenarioSpec &spec) {
    return spec.population.is_uniform() ? 1e-3 * spec.params.t : 1e-6;
}

AnalyticOutcome analytic(const ScenarioSpec &spec) {
    const auto &p = spec.params;
    AnalyticOutcome a;
    if (p.variant == Variant::Asymmetric) {
        if (!spec.consumer_ic) {
            auto np = solve_no_privacy(p, spec.population);
            a.method = "no_privacy";
            a.population = np.population;
            a.mechanism = np.mechanism;
            a.revenue = objective(np.mechanism, np.population);
            if (spec.population.is_uniform()) a.closed_form_revenue = np.revenue;
            return a;
        }
        if (spec.population.is_uniform()) {
            const auto n = spec.population.grid();
            const auto cont = spec.obedience ? solve_privacy_duopoly(p) : solve_no_obedience(p);
            auto grid = threshold_on_grid(p, n, spec.obedience);
            a.method = spec.obedience ? "threshold_duopoly" : "threshold_no_obedience";
            a.population = grid.population;
            a.mechanism = grid.mechanism;
            a.revenue = grid.revenue;
            a.closed_form_revenue = cont.revenue();
            a.closed_form_welfare = report(cont);
            a.extra["x_lower"] = cont.x_lower;
            a.extra["threshold"] = cont.x_star;
            if (spec.obedience) a.extra["threshold_single_mass_rule"] = single_mass_threshold_x_star(p);
            return a;
        }
        if (spec.obedience && three_type_shape(spec)) {
            const auto &ty = spec.population.types();
            auto s = solve_three_consumers(p, {ty[0].x, ty[1].x, ty[2].x}, {ty[0].mass, ty[1].mass, ty[2].mass});
            if (!s.feasible) throw UnsupportedScenario("no branch of the three-consumer characterization audits feasible");
            a.method = "three_consumers";
            a.population = s.population;
            a.mechanism = s.mechanism;
            a.revenue = s.revenue;
            a.extra["y2"] = s.y2;
            a.extra["y3"] = s.y3;
            a.extra["branch"] = s.binding_case;
            a.extra["residual_fee_x2_x3"] = metric(s.residual_9);
            a.extra["residual_fee_x2_x1"] = metric(s.residual_10);
            return a;
        }
        throw UnsupportedScenario("no closed form for this asymmetric scenario; use --engine lp");
    }
    if (spec.consumer_ic && !spec.obedience && !spec.population.is_uniform() && spec.population.size() == 2) {
        const auto &ty = spec.population.types();
        auto s = solve_symmetric_two_consumer_no_obedience(p, ty[0].x, ty[1].x, {ty[0].mass, ty[1].mass});
        a.method = "symmetric_two_consumer_no_obedience";
        a.population = s.population;
        a.mechanism = s.mechanism;
        a.revenue = s.revenue;
        return a;
    }
    throw UnsupportedScenario("no closed form for this symmetric scenario; use --engine lp");
}

int cmd_solve(const ScenarioFile &s, const std::string &engine, const std::string &out, bool debug_lp) {
    if (engine != "analytic" && engine != "lp" && engine != "both") {
        throw InputError("--engine: expected analytic, lp or both");
    }
    const auto &spec = s.spec;
    json res;
    res["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    const auto sj = scenario_to_json(s);
    res["scenario_hash"] = scenario_hash(sj);
    res["scenario"] = sj;
    res["engine"] = engine;

    std::optional<SolveResult> lp_res;
    std::optional<AnalyticOutcome> an;
    if (engine != "analytic") {
        SolveOptions opts;
        std::string dumped;
        if (debug_lp) opts.lp_dump = &dumped;
        lp_res = solve(spec, opts);
        if (debug_lp) std::cerr << dumped;
        res["lp"] = lp_to_json(*lp_res, spec);
    }
    if (engine != "lp") {
        try {
            an = analytic(spec);
            res["analytic"] = analytic_to_json(*an, spec);
        } catch (const UnsupportedScenario &e) {
            if (engine == "analytic") throw;
            res["analytic"] = {{"unsupported", e.what()}};
        }
    }
    int code = kOk;
    if (lp_res && an) {
        const double gap = lp_res->revenue - an->revenue;
        const double tol = gap_tolerance(spec);
        const bool ok = std::abs(gap) <= tol;
        res["comparison"] = {{"gap", metric(gap)}, {"tolerance", metric(tol)}, {"within_tolerance", ok}};
        if (!ok) code = kVerifyFailure;
    }
    write_output(res, out);
    return code;
}

namespace {

struct CheckList {
    std::ostream &os;
    int failed = 0;

    void add(const std::string &name, bool ok, const std::string &detail = "") {
        os << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) os << "  " << detail;
        os << "\n";
        if (!ok) ++failed;
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void audit_lines(CheckList &cl, const std::string &what, const FeasibilityAudit &a) {
    cl.add(what + " audit", a.feasible(), "worst slack " + num(a.worst_slack()));
    for (const auto &v : a.violations()) {
        cl.os << "  violated " << v.label << " (" << to_string(v.family) << ") slack " << num(v.slack) << "\n";
    }
}

int verify_result(const json &j, CheckList &cl) {
    const auto s = parse_scenario(j.at("scenario"));
    const auto pop = finite_population(s.spec.population);
    cl.add("scenario hash", scenario_hash(scenario_to_json(s)) == j.value("scenario_hash", ""));
    for (const char *part : {"lp", "analytic"}) {
        if (!j.contains(part) || !j[part].contains("mechanism")) continue;
        const auto &mj = j[part]["mechanism"];
        const auto mech = mechanism_from_json(mj);
        Population mpop = pop;
        if (mj.contains("types")) {
            std::vector<TypePoint> ty;
            for (const auto &t : mj["types"]) ty.push_back({t.at("x").get<double>(), t.at("mass").get<double>()});
            mpop = Population::discrete(ty);
        }
        mech.validate(mpop.size(), s.spec.tolerance);
        const auto a = audit_mechanism(mech, mpop, s.spec.params, s.spec.toggles(), s.spec.tolerance);
        audit_lines(cl, std::string(part) + " mechanism", a);
        if (j[part].contains("revenue")) {
            const double rev = objective(mech, mpop);
            const double stored = j[part]["revenue"].get<double>();
            cl.add(std::string(part) + " revenue", std::abs(rev - stored) <= 1e-8 * std::max(1.0, std::abs(rev)),
                   "recomputed " + num(rev));
        }
    }
    return cl.failed ? kVerifyFailure : kOk;
}

}  // namespace

int cmd_verify(const std::string &path, const Overrides &o, std::ostream &os) {
    CheckList cl{os};
    const auto j = load_json(path);
    if (j.is_object() && j.contains("scenario") && (j.contains("lp") || j.contains("analytic"))) {
        return verify_result(j, cl);
    }
    auto s = parse_scenario(j);
    apply(o, s);
    const auto &spec = s.spec;
    const auto &p = spec.params;

    if (s.threshold) {
        if (p.variant != Variant::Asymmetric || !spec.population.is_uniform()) {
            throw InputError("mechanism.threshold: needs an asymmetric uniform scenario");
        }
        const auto g = threshold_on_grid_at(p, spec.population.grid(), *s.threshold);
        audit_lines(cl, "threshold mechanism at " + num(*s.threshold),
                    audit_mechanism(g.mechanism, g.population, p, spec.toggles(), spec.tolerance));
        return cl.failed ? kVerifyFailure : kOk;
    }

    const auto r = solve(spec);
    audit_lines(cl, "lp optimum", r.audit);
    double obj = objective(r.mechanism, r.population);
    cl.add("revenue identity", std::abs(obj - r.revenue) <= 1e-9 * std::max(1.0, std::abs(obj)));
    cl.add("seller payoffs nonnegative",
           r.seller_payoffs[0] >= -spec.tolerance && r.seller_payoffs[1] >= -spec.tolerance);
    const auto w = report(r.mechanism, spec);
    cl.add("welfare accounting identity", std::abs(w.identity_residual()) <= 1e-9 * std::max(1.0, w.total_welfare));

    if (p.variant == Variant::Asymmetric) {
        if (spec.consumer_ic) {
            const auto st = check_structure(r, spec);
            for (const auto &c : st.checks) {
                if (c.required) cl.add("structure " + c.name, c.passed, c.detail);
            }
        } else {
            double worst = 0.0;
            for (double v : r.consumer_payoffs) worst = std::max(worst, std::abs(v));
            worst = std::max({worst, std::abs(r.seller_payoffs[0]), std::abs(r.seller_payoffs[1])});
            cl.add("full extraction payoffs", worst <= 1e-9, "largest |payoff| " + num(worst));
            const double fb = first_best_surplus(p, r.population);
            cl.add("full extraction revenue", std::abs(r.revenue - fb) <= 1e-9 * std::max(1.0, fb),
                   "first best " + num(fb));
        }
        if (spec.population.is_uniform()) {
            const double xl = x_lower(p);
            const double xs = x_double_star(p);
            const double xo = optimal_threshold_x_star(p);
            cl.add("threshold ordering", xl <= xs + 1e-12 && xs <= xo + 1e-12,
                   "x_lower " + num(xl) + ", x** " + num(xs) + ", x* " + num(xo));
        }
    }

    auto open = spec;
    open.consumer_ic = false;
    auto ic_only = spec;
    ic_only.consumer_ic = true;
    ic_only.obedience = false;
    auto both = spec;
    both.consumer_ic = true;
    both.obedience = true;
    const double r_open = solve(open).revenue;
    const double r_ic = solve(ic_only).revenue;
    const double r_both = solve(both).revenue;
    cl.add("revenue ordering", r_open >= r_ic - 1e-9 && r_ic >= r_both - 1e-9,
           num(r_open) + " >= " + num(r_ic) + " >= " + num(r_both));

    try {
        const auto a = analytic(spec);
        audit_lines(cl, "analytic " + a.method, audit_mechanism(a.mechanism, a.population, p, spec.toggles(),
                                                               spec.tolerance));
        const double gap = r.revenue - a.revenue;
        cl.add("lp vs analytic gap", std::abs(gap) <= gap_tolerance(spec), "gap " + num(gap));
    } catch (const UnsupportedScenario &e) {
        os << "SKIP analytic  " << e.what() << "\n";
    }
    return cl.failed ? kVerifyFailure : kOk;
}

namespace {

struct SweepRow {
    bool ok = false;
    std::string reason;
    double values[11]{};
};

SweepRow sweep_row(const ScenarioSpec &base, const std::string &param, double v) {
    SweepRow row;
    try {
        MarketParams p = base.params;
        std::size_t n = base.population.is_uniform() ? base.population.grid() : 50;
        if (param == "H") p.H = v;
        else if (param == "L") p.L = v;
        else if (param == "t") p.t = v;
        else if (param == "V") p.V1 = v;
        else if (param == "N") {
            if (v < 2.0 || std::floor(v) != v) throw InputError("N must be an integer >= 2");
            n = static_cast<std::size_t>(v);
        }
        p = MarketParams::asymmetric(p.V1, p.t, p.H, p.L);
        const double xl = x_lower(p);
        if (param == "N") {
            const auto pop = discretize_uniform(n);
            double l1 = 0.0;
            for (const auto &tp : pop.types()) {
                if (in_first_segment(tp.x, p)) l1 += tp.mass;
            }
            ScenarioSpec sc{p, Population::uniform(n)};
            const auto np = solve_no_privacy(p, pop);
            const auto du = threshold_on_grid(p, n, true);
            const auto no = threshold_on_grid(p, n, false);
            const auto wd = report(du.mechanism, sc);
            const auto wn = report(no.mechanism, sc);
            const double vals[11] = {v,  xl, optimal_threshold_x_star(p, l1), x_double_star(p),
                                     objective(np.mechanism, np.population), du.revenue, no.revenue,
                                     wd.consumer_surplus_total, wn.consumer_surplus_total, wd.efficiency_loss,
                                     wn.efficiency_loss};
            std::copy(vals, vals + 11, row.values);
        } else {
            const auto du = solve_privacy_duopoly(p);
            const auto no = solve_no_obedience(p);
            const double vals[11] = {v,
                                     xl,
                                     du.x_star,
                                     no.x_star,
                                     solve_no_privacy(p, Population::uniform()).revenue,
                                     du.revenue(),
                                     no.revenue(),
                                     du.consumer_surplus(),
                                     no.consumer_surplus(),
                                     du.efficiency_loss(),
                                     no.efficiency_loss()};
            std::copy(vals, vals + 11, row.values);
        }
        row.ok = true;
    } catch (const std::exception &e) {
        row.reason = e.what();
    }
    return row;
}

}  // namespace

int cmd_sweep(const ScenarioFile &s, const std::string &param, double from, double to, double step,
              const std::string &out) {
    if (param != "H" && param != "L" && param != "t" && param != "V" && param != "N") {
        throw InputError("--param: expected one of H, L, t, V, N");
    }
    if (s.spec.params.variant != Variant::Asymmetric) throw UnsupportedScenario("sweeps cover the asymmetric market");
    if (!(step > 0.0) || !(to >= from) || !std::isfinite(from) || !std::isfinite(to)) {
        throw InputError("--from/--to/--step: need from <= to and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    if (count > 100000) throw InputError("--step: too many sweep rows");
    std::vector<SweepRow> rows(count);
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
        rows[static_cast<std::size_t>(i)] = sweep_row(s.spec, param, from + static_cast<double>(i) * step);
    }

    std::ostringstream csv;
    csv << "param,value,x_lower,x_star,x_double_star,rev_no_privacy,rev_duopoly,rev_no_obedience,"
           "rent_total_duopoly,rent_total_no_obedience,eff_loss_duopoly,eff_loss_no_obedience\n";
    std::size_t kept = 0;
    std::vector<std::string> skipped;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = from + static_cast<double>(i) * step;
        if (!rows[i].ok) {
            skipped.push_back(param + "=" + num(v) + ": " + rows[i].reason);
            continue;
        }
        ++kept;
        csv << param;
        for (double x : rows[i].values) csv << "," << num(x);
        csv << "\n";
    }
    for (const auto &sk : skipped) csv << "# skipped " << sk << "\n";
    if (out.empty() || out == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        if (!f) throw InputError(out + ": cannot write");
        f << csv.str();
    }
    return kept == 0 ? kInvalidInput : kOk;
}

}  // namespace brokerctl
