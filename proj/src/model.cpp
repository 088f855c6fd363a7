#include "broker/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace broker {

namespace {

std::string type_label(std::size_t i) { return "x" + std::to_string(i + 1); }

const std::vector<TypePoint> &finite_types(const Population &pop) {
    if (pop.is_uniform()) {
        throw InputError("uniform population must be discretized before evaluating a mechanism");
    }
    return pop.types();
}

void check_scheme_size(const Mechanism &mech, const Population &pop) {
    if (mech.scheme.size() != pop.size() || mech.consumer_fees.size() != pop.size()) {
        throw InputError("mechanism size does not match the population");
    }
}

}  // namespace

std::string_view to_string(Signal s) {
    switch (s) {
        case Signal::HH: return "HH";
        case Signal::HL: return "HL";
        case Signal::LH: return "LH";
        case Signal::LL: return "LL";
    }
    return "?";
}

std::string_view to_string(Variant v) { return v == Variant::Asymmetric ? "asymmetric" : "symmetric"; }

std::string_view to_string(Price p) { return p == Price::H ? "H" : "L"; }

Signal make_signal(Price p1, Price p2) {
    if (p1 == Price::H) {
        return p2 == Price::H ? Signal::HH : Signal::HL;
    }
    return p2 == Price::H ? Signal::LH : Signal::LL;
}

Price price_of(Signal s, Seller i) {
    const bool first = (s == Signal::HH || s == Signal::HL);
    const bool second = (s == Signal::HH || s == Signal::LH);
    return (i == Seller::S1 ? first : second) ? Price::H : Price::L;
}

Signal with_price(Signal s, Seller i, Price p) {
    return i == Seller::S1 ? make_signal(p, price_of(s, Seller::S2)) : make_signal(price_of(s, Seller::S1), p);
}

MarketParams MarketParams::asymmetric(double V, double t, double H, double L) {
    MarketParams p{V, V - t, t, H, L, Variant::Asymmetric};
    p.validate();
    return p;
}

MarketParams MarketParams::symmetric(double V, double t, double H, double L) {
    MarketParams p{V, V, t, H, L, Variant::Symmetric};
    p.validate();
    return p;
}

void MarketParams::validate() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(V1) || !finite(V2) || !finite(t) || !finite(H) || !finite(L)) {
        throw InputError("market parameters must be finite");
    }
    if (!(L > 0.0)) throw InputError("L must be positive");
    if (!(L < H)) throw InputError("L must be below H");
    if (!(t > 0.0)) throw InputError("t must be positive");
    if (variant == Variant::Asymmetric) {
        if (std::abs(V2 - (V1 - t)) > 1e-9 * std::max(1.0, std::abs(V1))) {
            throw InputError("asymmetric variant requires V2 = V1 - t");
        }
    } else if (std::abs(V1 - V2) > 1e-9 * std::max(1.0, std::abs(V1))) {
        throw InputError("symmetric variant requires V1 = V2");
    }
    if (!(V1 - t - H > 0.0)) throw InputError("V - t - H must be positive");
}

Population Population::discrete(std::vector<TypePoint> types) {
    if (types.empty()) throw InputError("population is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < types.size(); ++i) {
        const auto &tp = types[i];
        if (!std::isfinite(tp.x) || tp.x < 0.0 || tp.x > 1.0) {
            throw InputError("population[" + std::to_string(i) + "].x must lie in [0, 1]");
        }
        if (!std::isfinite(tp.mass) || !(tp.mass > 0.0)) {
            throw InputError("population[" + std::to_string(i) + "].mass must be positive");
        }
        if (i > 0 && !(tp.x > types[i - 1].x)) {
            throw InputError("population locations must be strictly increasing (index " + std::to_string(i) + ")");
        }
        total += tp.mass;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(12);
        os << "population masses sum to " << total << ", expected 1";
        throw InputError(os.str());
    }
    Population p;
    p.types_ = std::move(types);
    return p;
}

Population Population::uniform(std::size_t grid) {
    if (grid < 2) throw InputError("uniform grid size must be at least 2");
    Population p;
    p.uniform_ = true;
    p.grid_ = grid;
    return p;
}

std::optional<std::size_t> Population::find(double x) const {
    for (std::size_t i = 0; i < types_.size(); ++i) {
        if (std::abs(types_[i].x - x) <= 1e-12) return i;
    }
    return std::nullopt;
}

Population discretize_uniform(std::size_t n) {
    if (n < 1) throw InputError("grid size must be positive");
    std::vector<TypePoint> types(n);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        types[i] = {(static_cast<double>(i) + 0.5) * w, w};
    }
    return Population::discrete(std::move(types));
}

Population finite_population(const Population &pop) {
    return pop.is_uniform() ? discretize_uniform(pop.grid()) : pop;
}

void Mechanism::validate(std::size_t n_types, double tol) const {
    if (scheme.size() != n_types || consumer_fees.size() != n_types) {
        throw InputError("mechanism size does not match the population");
    }
    for (std::size_t i = 0; i < n_types; ++i) {
        double sum = 0.0;
        for (double p : scheme[i]) {
            if (!std::isfinite(p) || p < -tol || p > 1.0 + tol) {
                throw InputError("signal probability outside [0, 1] for type " + type_label(i));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol) throw InputError("signal probabilities of type " + type_label(i) + " do not sum to 1");
        if (!std::isfinite(consumer_fees[i])) throw InputError("fee of type " + type_label(i) + " is not finite");
    }
    for (double m : seller_fees) {
        if (!std::isfinite(m)) throw InputError("seller fee is not finite");
    }
}

std::vector<double> segment_boundaries(const MarketParams &params) {
    const double d = (params.H - params.L) / (2.0 * params.t);
    const auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    if (params.variant == Variant::Asymmetric) return {clamp01(1.0 - d)};
    return {clamp01(0.5 - d), 0.5, clamp01(0.5 + d)};
}

double x_lower(const MarketParams &params) {
    return std::clamp(1.0 - (params.H - params.L) / (2.0 * params.t), 0.0, 1.0);
}

bool in_first_segment(double x, const MarketParams &params) { return x <= x_lower(params) + 1e-12; }

PurchaseOutcome purchase(double x, Price p1, Price p2, const MarketParams &params) {
    const double price1 = params.value(p1);
    const double price2 = params.value(p2);
    const double u1 = params.V1 - x * params.t - price1;
    const double u2 = params.V2 - (1.0 - x) * params.t - price2;
    if (u1 >= u2 - kTieTolerance) return {Seller::S1, price1, u1};
    return {Seller::S2, price2, u2};
}

PurchaseOutcome purchase(double x, Signal s, const MarketParams &params) {
    return purchase(x, price_of(s, Seller::S1), price_of(s, Seller::S2), params);
}

double utility_under(double x, const SignalDistribution &dist, const MarketParams &params) {
    double u = 0.0;
    for (Signal s : kSignals) {
        const double p = at(dist, s);
        if (p != 0.0) u += p * purchase(x, s, params).net_utility;
    }
    return u;
}

double misreport_utility(double x, double x_reported, const Mechanism &mech, const Population &pop,
                         const MarketParams &params) {
    finite_types(pop);
    check_scheme_size(mech, pop);
    if (x < 0.0 || x > 1.0) throw InputError("location outside [0, 1]");
    const auto j = pop.find(x_reported);
    if (!j) throw InputError("reported location is not a population type");
    return utility_under(x, mech.scheme[*j], params);
}

double truthful_utility(std::size_t i, const Mechanism &mech, const Population &pop, const MarketParams &params) {
    const auto &types = finite_types(pop);
    check_scheme_size(mech, pop);
    return utility_under(types.at(i).x, mech.scheme.at(i), params);
}

double seller_expected_revenue(Seller i, const Mechanism &mech, const Population &pop, const MarketParams &params) {
    const auto &types = finite_types(pop);
    check_scheme_size(mech, pop);
    double total = 0.0;
    for (std::size_t k = 0; k < types.size(); ++k) {
        for (Signal s : kSignals) {
            const double p = at(mech.scheme[k], s);
            if (p == 0.0) continue;
            const auto out = purchase(types[k].x, s, params);
            if (out.seller == i) total += types[k].mass * p * out.price;
        }
    }
    return total;
}

double obedience_slack(Seller i, Price recommended, Price deviation, const Mechanism &mech, const Population &pop,
                       const MarketParams &params) {
    if (recommended == deviation) throw InputError("deviation must differ from the recommended price");
    const auto &types = finite_types(pop);
    check_scheme_size(mech, pop);
    double obey = 0.0;
    double deviate = 0.0;
    for (std::size_t k = 0; k < types.size(); ++k) {
        for (Signal s : kSignals) {
            if (price_of(s, i) != recommended) continue;
            const double p = at(mech.scheme[k], s);
            if (p == 0.0) continue;
            const double w = types[k].mass * p;
            if (purchase(types[k].x, s, params).seller == i) obey += w * params.value(recommended);
            if (purchase(types[k].x, with_price(s, i, deviation), params).seller == i) {
                deviate += w * params.value(deviation);
            }
        }
    }
    return obey - deviate;
}

std::optional<std::vector<double>> max_extractable_fees(const std::vector<SignalDistribution> &scheme,
                                                        const Population &pop, const MarketParams &params,
                                                        bool consumer_ic, bool fee_nonneg) {
    const auto &types = finite_types(pop);
    const std::size_t n = types.size();
    if (scheme.size() != n) throw InputError("scheme size does not match the population");

    std::vector<double> own(n);
    for (std::size_t i = 0; i < n; ++i) own[i] = utility_under(types[i].x, scheme[i], params);
    std::vector<double> dist = own;  // source edges: m_i <= U_i

    if (consumer_ic && n > 1) {
        // w[j][i] = U_i - U(i, j): edge j -> i
        std::vector<double> w(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) w[j * n + i] = own[i] - utility_under(types[i].x, scheme[j], params);
            }
        }
        for (std::size_t round = 0; round < n; ++round) {
            bool changed = false;
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == j) continue;
                    const double cand = dist[j] + w[j * n + i];
                    if (cand < dist[i] - 1e-13) {
                        dist[i] = cand;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i != j && dist[j] + w[j * n + i] < dist[i] - 1e-9) return std::nullopt;
            }
        }
    }
    if (fee_nonneg) {
        for (double &m : dist) {
            if (m < -kTolerance) return std::nullopt;
            m = std::max(m, 0.0);
        }
    }
    return dist;
}

std::string_view to_string(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::IC: return "IC";
        case ConstraintFamily::ConsumerIR: return "consumerIR";
        case ConstraintFamily::Obedience: return "obedience";
        case ConstraintFamily::SellerIR: return "sellerIR";
        case ConstraintFamily::SimplexInternal: return "simplex-internal";
        case ConstraintFamily::FeeNonneg: return "fee-nonneg";
    }
    return "?";
}

bool FeasibilityAudit::feasible() const {
    return std::all_of(entries.begin(), entries.end(), [&](const AuditEntry &e) { return e.slack >= -tolerance; });
}

std::vector<AuditEntry> FeasibilityAudit::violations() const {
    std::vector<AuditEntry> out;
    for (const auto &e : entries) {
        if (e.slack < -tolerance) out.push_back(e);
    }
    return out;
}

double FeasibilityAudit::worst_slack() const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto &e : entries) worst = std::min(worst, e.slack);
    return worst;
}

FeasibilityAudit audit_mechanism(const Mechanism &mech, const Population &pop, const MarketParams &params,
                                 const AuditToggles &toggles, double tol) {
    const auto &types = finite_types(pop);
    check_scheme_size(mech, pop);
    const std::size_t n = types.size();
    FeasibilityAudit audit;
    audit.tolerance = tol;
    auto &e = audit.entries;

    std::vector<double> own(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &d = mech.scheme[i];
        double sum = 0.0;
        double lowest = d[0];
        for (double p : d) {
            sum += p;
            lowest = std::min(lowest, p);
        }
        e.push_back({ConstraintFamily::SimplexInternal, "SUM[" + type_label(i) + "]", -std::abs(sum - 1.0)});
        e.push_back({ConstraintFamily::SimplexInternal, "PI>=0[" + type_label(i) + "]", lowest});
        own[i] = utility_under(types[i].x, d, params);
    }
    if (toggles.consumer_ic) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double dev = utility_under(types[i].x, mech.scheme[j], params) - mech.consumer_fees[j];
                e.push_back({ConstraintFamily::IC, "IC[" + type_label(i) + "->" + type_label(j) + "]",
                             (own[i] - mech.consumer_fees[i]) - dev});
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        e.push_back({ConstraintFamily::ConsumerIR, "IR[" + type_label(i) + "]", own[i] - mech.consumer_fees[i]});
    }
    if (toggles.obedience) {
        for (Seller s : {Seller::S1, Seller::S2}) {
            for (Price p : {Price::H, Price::L}) {
                const Price q = p == Price::H ? Price::L : Price::H;
                std::string label = "OB[S" + std::to_string(static_cast<int>(s)) + ":" + std::string(to_string(p)) +
                                    "->" + std::string(to_string(q)) + "]";
                e.push_back({ConstraintFamily::Obedience, std::move(label), obedience_slack(s, p, q, mech, pop, params)});
            }
        }
    }
    for (Seller s : {Seller::S1, Seller::S2}) {
        const int k = static_cast<int>(s);
        const double u = seller_expected_revenue(s, mech, pop, params);
        e.push_back({ConstraintFamily::SellerIR, "SIR[S" + std::to_string(k) + "]", u - mech.seller_fees[k - 1]});
        e.push_back({ConstraintFamily::FeeNonneg, "FEE[S" + std::to_string(k) + "]", mech.seller_fees[k - 1]});
    }
    if (toggles.fee_nonneg) {
        for (std::size_t i = 0; i < n; ++i) {
            e.push_back({ConstraintFamily::FeeNonneg, "FEE[" + type_label(i) + "]", mech.consumer_fees[i]});
        }
    }
    return audit;
}

}  // namespace broker
