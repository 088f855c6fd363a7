#pragma once

#include <array>
#include <string>

#include "broker/lp_oracle.hpp"

namespace broker::canonical {

/// Three consumers at 3/8, 4/6, 5/6 with masses 0.9, 0.05, 0.05; H=10, L=9, t=1, V=1000.
ScenarioSpec three_consumers();

/// Symmetric market, V=10000, H=10, L=1, t=18, consumers at 3/8 and 9/16 with masses 0.95 and 0.05.
ScenarioSpec symmetric_pair(bool obedience = true);

/// Uniform population, H=10, L=9, t=1, V=1000.
ScenarioSpec uniform_market(std::size_t grid = 50, bool obedience = true);

inline constexpr double kThreeConsumerReferenceY = 0.234;

/// Reference joint masses lambda(x) * pi(s|x), 5 decimals, rows x1 and x2, columns HH, HL, LH, LL.
inline constexpr std::array<std::array<double, 4>, 2> kReferenceMasses{{{0.00854, 0.07595, 0.05831, 0.80719},
                                                                {0.00095, 0.0125, 0.0, 0.03655}}};
/// Half a unit in the last digit of the reference masses.
inline constexpr double kReferenceRounding = 5e-6;

struct ReferenceMassCheck {
    double lp_objective = 0.0;
    double point_objective = 0.0;
    double worst_slack = 0.0;
    std::string worst_label;
    /// Largest |LP - table| over the joint masses.
    double pointwise_gap = 0.0;
    /// A feasible mechanism exists with every joint mass within rounding of the reference masses.
    bool box_feasible = false;
    double box_objective = 0.0;
    Mechanism point;
    SolveResult lp;
};

/// Solves the symmetric pair and evaluates the reference-mass point: conditional rows renormalized, maximal IC/IR fees,
/// seller fees equal to U_i.
ReferenceMassCheck evaluate_reference_masses();

}  // namespace broker::canonical
