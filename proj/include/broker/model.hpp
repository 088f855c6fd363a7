#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace broker {

/// Default absolute tolerance for feasibility comparisons.
inline constexpr double kTolerance = 1e-9;

/// Purchase comparisons treat utilities this close as a tie (ties go to seller 1).
inline constexpr double kTieTolerance = 1e-9;

class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedScenario : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class Variant { Asymmetric, Symmetric };
enum class Seller : int { S1 = 1, S2 = 2 };
enum class Price { H, L };

/// Price pair recommended to (seller 1, seller 2). Order is fixed for serialization.
enum class Signal : std::uint8_t { HH = 0, HL = 1, LH = 2, LL = 3 };

inline constexpr std::array<Signal, 4> kSignals{Signal::HH, Signal::HL, Signal::LH, Signal::LL};

std::string_view to_string(Signal s);
std::string_view to_string(Variant v);
std::string_view to_string(Price p);
Signal make_signal(Price p1, Price p2);
Price price_of(Signal s, Seller i);
Signal with_price(Signal s, Seller i, Price p);

struct MarketParams {
    double V1 = 0.0;
    double V2 = 0.0;
    double t = 0.0;
    double H = 0.0;
    double L = 0.0;
    Variant variant = Variant::Asymmetric;

    static MarketParams asymmetric(double V, double t, double H, double L);
    static MarketParams symmetric(double V, double t, double H, double L);

    /// Throws InputError when an invariant fails.
    void validate() const;

    [[nodiscard]] double value(Price p) const { return p == Price::H ? H : L; }
};

struct TypePoint {
    double x = 0.0;
    double mass = 0.0;
};

class Population {
  public:
    static Population discrete(std::vector<TypePoint> types);
    static Population uniform(std::size_t grid = 50);

    [[nodiscard]] bool is_uniform() const { return uniform_; }
    /// Grid size used when a uniform population is discretized.
    [[nodiscard]] std::size_t grid() const { return grid_; }
    /// Types of a discrete population. Empty for uniform ones.
    [[nodiscard]] const std::vector<TypePoint> &types() const { return types_; }
    [[nodiscard]] std::size_t size() const { return types_.size(); }
    /// Index of the type at location x, if any.
    [[nodiscard]] std::optional<std::size_t> find(double x) const;

  private:
    bool uniform_ = false;
    std::size_t grid_ = 0;
    std::vector<TypePoint> types_;
};

/// N midpoints of equal cells, each carrying mass 1/N.
Population discretize_uniform(std::size_t n);

/// Uniform populations are discretized, discrete ones pass through.
Population finite_population(const Population &pop);

using SignalDistribution = std::array<double, 4>;

inline double &at(SignalDistribution &d, Signal s) { return d[static_cast<std::size_t>(s)]; }
inline double at(const SignalDistribution &d, Signal s) { return d[static_cast<std::size_t>(s)]; }

struct Mechanism {
    std::vector<SignalDistribution> scheme;
    std::vector<double> consumer_fees;
    std::array<double, 2> seller_fees{0.0, 0.0};

    /// Checks shapes, probability simplices and fee signs.
    void validate(std::size_t n_types, double tol = kTolerance) const;
};

struct PurchaseOutcome {
    Seller seller = Seller::S1;
    double price = 0.0;
    double net_utility = 0.0;
};

/// Asymmetric: [x_lower]. Symmetric: the three cut points. All clamped to [0, 1].
std::vector<double> segment_boundaries(const MarketParams &params);

/// Location indifferent between seller 1 at H and seller 2 at L (asymmetric), clamped to [0, 1].
double x_lower(const MarketParams &params);

/// True when x lies in the first segment [0, x_lower]. Boundary points belong to the lower segment.
bool in_first_segment(double x, const MarketParams &params);

PurchaseOutcome purchase(double x, Price p1, Price p2, const MarketParams &params);
PurchaseOutcome purchase(double x, Signal s, const MarketParams &params);

/// Expected best-response utility of location x facing the given signal distribution, gross of fees.
double utility_under(double x, const SignalDistribution &dist, const MarketParams &params);

/// U(x, x') for a reported population type.
double misreport_utility(double x, double x_reported, const Mechanism &mech, const Population &pop,
                         const MarketParams &params);

/// U(x) for population type i.
double truthful_utility(std::size_t i, const Mechanism &mech, const Population &pop, const MarketParams &params);

double seller_expected_revenue(Seller i, const Mechanism &mech, const Population &pop, const MarketParams &params);

/// Obey revenue minus deviate revenue for seller i conditioned on being recommended `recommended`.
double obedience_slack(Seller i, Price recommended, Price deviation, const Mechanism &mech, const Population &pop,
                       const MarketParams &params);

/// Largest consumer fees implementable (IC + IR) for a given scheme, computed by shortest paths over the
/// difference constraints. nullopt when no fee vector exists, or when fee_nonneg is set and a fee would be negative.
std::optional<std::vector<double>> max_extractable_fees(const std::vector<SignalDistribution> &scheme,
                                                        const Population &pop, const MarketParams &params,
                                                        bool consumer_ic = true, bool fee_nonneg = true);

enum class ConstraintFamily { IC, ConsumerIR, Obedience, SellerIR, SimplexInternal, FeeNonneg };

std::string_view to_string(ConstraintFamily f);

struct AuditEntry {
    ConstraintFamily family = ConstraintFamily::IC;
    std::string label;
    double slack = 0.0;
};

struct AuditToggles {
    bool consumer_ic = true;
    bool obedience = true;
    bool fee_nonneg = true;
};

struct FeasibilityAudit {
    std::vector<AuditEntry> entries;
    double tolerance = kTolerance;

    [[nodiscard]] bool feasible() const;
    [[nodiscard]] std::vector<AuditEntry> violations() const;
    [[nodiscard]] double worst_slack() const;
};

/// Re-evaluates every constraint of the broker's program from the purchase rule.
FeasibilityAudit audit_mechanism(const Mechanism &mech, const Population &pop, const MarketParams &params,
                                 const AuditToggles &toggles, double tol = kTolerance);

}  // namespace broker
