#pragma once

#include <vector>

#include "eigenshape/grid.hpp"
#include "eigenshape/solver.hpp"

namespace eigenshape {

struct GammaDistanceReport {
    double value = 0.0;       // ||w_a - w_b||_{L2}
    double h = 0.0;
    double residual_a = 0.0;  // torsion solve residuals
    double residual_b = 0.0;
    bool converged = true;
};

/// L2 distance between the torsion functions of two masks on one grid.
/// An empty mask contributes the zero field.
GammaDistanceReport gamma_distance(const DomainMask& a, const DomainMask& b,
                                   const SolverConfig& cfg);

/// Torsion energy E = -∫ w. Throws on empty mask or a torsion solve that
/// exhausts its budget.
double energy(const DomainMask& mask, const SolverConfig& cfg);

struct CoareaPoint {
    double epsilon;
    double value;  // ∫ |∇u| over {0 < u <= eps} \ Dbar
    double ratio;  // value / epsilon
};

/// Low-level strip integrals of |∇u| (forward differences, zero extension)
/// over {0 < u <= eps} outside `dbar`. Each epsilon must lie in
/// (0, max(u)); violations throw.
std::vector<CoareaPoint> coarea_check(const ScalarField& u, const DomainMask& mask,
                                      const DomainMask& dbar,
                                      const std::vector<double>& epsilons);

/// D plus its one-cell face neighborhood (discrete closure used by the
/// perimeter and coarea checks).
DomainMask closed_neighborhood(const DomainMask& d);

}  // namespace eigenshape
