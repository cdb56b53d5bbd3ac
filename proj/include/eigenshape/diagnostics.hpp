#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "eigenshape/grid.hpp"

namespace eigenshape {

struct LemmaViolation {
    std::int64_t cell;
    double r;
    double average;  // discrete spherical average over the annulus [r-h, r]
    double bound;    // C*r (growth) or C0*r (vanishing)
};

struct LemmaReport {
    std::vector<LemmaViolation> violations;
    std::int64_t premises_held = 0;  // how often the hypothesis side was triggered
};

/// Growth implication: whenever the annulus average of u around a cell x is
/// at least C*r, every mask cell within distance r of x must carry u > 0.
/// With C = 0 this is positivity propagation and holds on any connected
/// mask whose first eigenfunction u is. Radii must be >= 2h.
LemmaReport verify_growth_lemma(const ScalarField& u, const DomainMask& mask, double C,
                                const std::vector<double>& radii);

/// Vanishing implication: for cells x farther than r0 from D and dyadic
/// r < r0, an annulus average <= C0*r forces u = 0 on the ball of radius
/// r/2 around x. Requires r0 > 2h.
LemmaReport verify_vanishing_lemma(const ScalarField& u, const DomainMask& mask,
                                   const DomainMask& D, double C0, double r0);

/// Largest C in the (ascending) grid with zero growth violations; violations
/// only shrink as C grows, so this is the empirical growth constant of u.
std::optional<double> sweep_growth_constant(const ScalarField& u, const DomainMask& mask,
                                            const std::vector<double>& radii,
                                            const std::vector<double>& c_grid);

/// Largest C0 in the (ascending) grid with zero vanishing violations;
/// violations only grow with C0.
std::optional<double> sweep_vanishing_constant(const ScalarField& u, const DomainMask& mask,
                                               const DomainMask& D, double r0,
                                               const std::vector<double>& c_grid);

}  // namespace eigenshape
