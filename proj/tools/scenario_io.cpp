#include "scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace brokerctl {

using broker::InputError;

namespace {

double number(const json &j, const std::string &field) {
    if (!j.is_number()) throw InputError(field + ": expected a number");
    return j.get<double>();
}

bool flag(const json &j, const std::string &field) {
    if (!j.is_boolean()) throw InputError(field + ": expected true or false");
    return j.get<bool>();
}

void reject_unknown(const json &j, const std::set<std::string> &known, const std::string &where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw InputError(where + it.key() + ": unknown key");
    }
}

}  // namespace

json load_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw InputError(path + ": " + e.what());
    }
}

ScenarioFile parse_scenario(const json &j) {
    if (!j.is_object()) throw InputError("scenario: expected an object");
    reject_unknown(j, {"variant", "V", "V1", "V2", "t", "H", "L", "population", "toggles", "tolerance", "mechanism"},
                   "");
    ScenarioFile out;
    auto &spec = out.spec;

    std::string variant = "asymmetric";
    if (j.contains("variant")) {
        if (!j["variant"].is_string()) throw InputError("variant: expected \"asymmetric\" or \"symmetric\"");
        variant = j["variant"].get<std::string>();
        if (variant != "asymmetric" && variant != "symmetric") {
            throw InputError("variant: expected \"asymmetric\" or \"symmetric\", got \"" + variant + "\"");
        }
    }
    for (const char *k : {"t", "H", "L"}) {
        if (!j.contains(k)) throw InputError(std::string(k) + ": missing");
    }
    const double t = number(j["t"], "t");
    const double H = number(j["H"], "H");
    const double L = number(j["L"], "L");
    double V1 = 0.0;
    double V2 = 0.0;
    if (j.contains("V")) {
        if (j.contains("V1") || j.contains("V2")) throw InputError("V: give either V or V1/V2, not both");
        V1 = number(j["V"], "V");
        V2 = variant == "asymmetric" ? V1 - t : V1;
    } else if (j.contains("V1") && j.contains("V2")) {
        V1 = number(j["V1"], "V1");
        V2 = number(j["V2"], "V2");
        const double expect = variant == "asymmetric" ? V1 - t : V1;
        if (std::abs(V2 - expect) > 1e-12 * std::max(1.0, std::abs(V1))) {
            throw InputError(variant == "asymmetric" ? "V2: must equal V1 - t" : "V2: must equal V1");
        }
    } else {
        throw InputError("V: missing (or V1 and V2)");
    }
    spec.params = {V1, V2, t, H, L,
                   variant == "asymmetric" ? broker::Variant::Asymmetric : broker::Variant::Symmetric};
    spec.params.validate();

    if (j.contains("population")) {
        const auto &p = j["population"];
        if (p.is_object()) {
            reject_unknown(p, {"uniform"}, "population.");
            if (!p.contains("uniform") || !p["uniform"].is_number_integer() || p["uniform"].get<long long>() < 2) {
                throw InputError("population.uniform: expected an integer grid size >= 2");
            }
            spec.population = broker::Population::uniform(p["uniform"].get<std::size_t>());
        } else if (p.is_array()) {
            std::vector<broker::TypePoint> types;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const std::string at = "population[" + std::to_string(i) + "]";
                if (!p[i].is_object()) throw InputError(at + ": expected {\"x\": ..., \"mass\": ...}");
                reject_unknown(p[i], {"x", "mass"}, at + ".");
                if (!p[i].contains("x") || !p[i].contains("mass")) throw InputError(at + ": needs x and mass");
                types.push_back({number(p[i]["x"], at + ".x"), number(p[i]["mass"], at + ".mass")});
            }
            try {
                spec.population = broker::Population::discrete(std::move(types));
            } catch (const InputError &e) {
                throw InputError(std::string("population: ") + e.what());
            }
        } else {
            throw InputError("population: expected a list of types or {\"uniform\": N}");
        }
    }
    if (j.contains("toggles")) {
        const auto &tg = j["toggles"];
        if (!tg.is_object()) throw InputError("toggles: expected an object");
        reject_unknown(tg, {"consumer_ic", "obedience", "fee_nonneg"}, "toggles.");
        if (tg.contains("consumer_ic")) spec.consumer_ic = flag(tg["consumer_ic"], "toggles.consumer_ic");
        if (tg.contains("obedience")) spec.obedience = flag(tg["obedience"], "toggles.obedience");
        if (tg.contains("fee_nonneg")) spec.fee_nonneg = flag(tg["fee_nonneg"], "toggles.fee_nonneg");
    }
    if (j.contains("tolerance")) {
        spec.tolerance = number(j["tolerance"], "tolerance");
        if (!(spec.tolerance > 0.0)) throw InputError("tolerance: must be positive");
    }
    if (j.contains("mechanism")) {
        const auto &m = j["mechanism"];
        if (!m.is_object()) throw InputError("mechanism: expected {\"threshold\": x}");
        reject_unknown(m, {"threshold"}, "mechanism.");
        if (!m.contains("threshold")) throw InputError("mechanism.threshold: missing");
        out.threshold = number(m["threshold"], "mechanism.threshold");
    }
    spec.validate();
    return out;
}

ScenarioFile load_scenario(const std::string &path) {
    const auto j = load_json(path);
    try {
        return parse_scenario(j);
    } catch (const InputError &e) {
        throw InputError(path + ": " + e.what());
    }
}

json scenario_to_json(const ScenarioFile &s) {
    const auto &p = s.spec.params;
    json j;
    j["variant"] = std::string(broker::to_string(p.variant));
    j["V1"] = p.V1;
    j["V2"] = p.V2;
    j["t"] = p.t;
    j["H"] = p.H;
    j["L"] = p.L;
    if (s.spec.population.is_uniform()) {
        j["population"] = {{"uniform", s.spec.population.grid()}};
    } else {
        json arr = json::array();
        for (const auto &tp : s.spec.population.types()) arr.push_back({{"x", tp.x}, {"mass", tp.mass}});
        j["population"] = arr;
    }
    j["toggles"] = {{"consumer_ic", s.spec.consumer_ic},
                    {"obedience", s.spec.obedience},
                    {"fee_nonneg", s.spec.fee_nonneg}};
    j["tolerance"] = s.spec.tolerance;
    if (s.threshold) j["mechanism"] = {{"threshold", *s.threshold}};
    return j;
}

std::string scenario_hash(const json &scenario) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : scenario.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double metric(double v) {
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::strtod(buf, nullptr);
}

json mechanism_to_json(const broker::Mechanism &m, const broker::Population &pop) {
    json j;
    j["signals"] = {"HH", "HL", "LH", "LL"};
    json types = json::array();
    for (const auto &tp : pop.types()) types.push_back({{"x", tp.x}, {"mass", tp.mass}});
    j["types"] = types;
    json scheme = json::array();
    for (const auto &d : m.scheme) scheme.push_back({d[0], d[1], d[2], d[3]});
    j["scheme"] = scheme;
    j["consumer_fees"] = m.consumer_fees;
    j["seller_fees"] = {m.seller_fees[0], m.seller_fees[1]};
    return j;
}

broker::Mechanism mechanism_from_json(const json &j) {
    broker::Mechanism m;
    try {
        for (const auto &row : j.at("scheme")) {
            if (row.size() != 4) throw InputError("mechanism.scheme: each row needs 4 entries");
            m.scheme.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(), row[3].get<double>()});
        }
        m.consumer_fees = j.at("consumer_fees").get<std::vector<double>>();
        const auto sf = j.at("seller_fees");
        m.seller_fees = {sf.at(0).get<double>(), sf.at(1).get<double>()};
    } catch (const json::exception &e) {
        throw InputError(std::string("mechanism: ") + e.what());
    }
    return m;
}

json audit_to_json(const broker::FeasibilityAudit &a) {
    json j;
    j["feasible"] = a.feasible();
    j["worst_slack"] = metric(a.worst_slack());
    json v = json::array();
    for (const auto &e : a.violations()) {
        v.push_back({{"constraint", e.label}, {"family", std::string(broker::to_string(e.family))},
                     {"slack", metric(e.slack)}});
    }
    j["violations"] = v;
    return j;
}

json welfare_to_json(const broker::WelfareReport &w) {
    json j;
    j["broker_revenue"] = metric(w.broker_revenue);
    j["consumer_surplus_total"] = metric(w.consumer_surplus_total);
    j["seller_profits"] = {metric(w.seller_profits[0]), metric(w.seller_profits[1])};
    j["transport_cost"] = metric(w.transport_cost);
    j["total_welfare"] = metric(w.total_welfare);
    j["first_best"] = metric(w.first_best);
    j["efficiency_loss"] = metric(w.efficiency_loss);
    if (!w.information_rent_by_type.empty()) {
        json r = json::array();
        for (double v : w.information_rent_by_type) r.push_back(metric(v));
        j["information_rent_by_type"] = r;
    }
    return j;
}

json structure_to_json(const broker::StructureReport &r) {
    json j;
    j["passed"] = r.passed();
    json checks = json::array();
    for (const auto &c : r.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"required", c.required},
                          {"worst", metric(c.worst)},
                          {"detail", c.detail}});
    }
    j["checks"] = checks;
    return j;
}

}  // namespace brokerctl
