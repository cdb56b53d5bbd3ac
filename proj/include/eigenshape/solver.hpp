#pragma once

#include <cstdint>
#include <vector>

#include "eigenshape/grid.hpp"

namespace eigenshape {

struct SolverConfig {
    double tolerance = 1e-8;   // relative residual target
    int max_iterations = 0;    // per linear solve; 0 = auto (10 * sqrt(active cells))
    std::uint64_t seed = 1;    // random start vectors of the eigensolver

    void validate() const;
    int linear_iteration_budget(std::int64_t active_cells) const;
};

/// Discrete Dirichlet Laplacian: (2*dim+1)-point stencil on the cells of
/// `mask`, exterior values taken as zero. Requires field.support ⊆ mask;
/// the result is supported on `mask`.
ScalarField apply_laplacian(const ScalarField& field, const DomainMask& mask);

struct TorsionResult {
    ScalarField w;
    double residual = 0.0;    // relative L2 residual of  -Δw = 1
    int iterations = 0;
    bool converged = false;
};

/// Torsion function of the mask: conjugate-gradient solve of A w = 1 over
/// the true cells. Non-convergence is reported through the result, not
/// thrown. Optional warm start (any field on the same grid).
TorsionResult solve_torsion(const DomainMask& mask, const SolverConfig& cfg,
                            const ScalarField* warm_start = nullptr);

struct EigenResult {
    int k = 0;
    std::vector<double> eigenvalues;        // ascending
    std::vector<ScalarField> eigenfunctions;  // L2-normalized, sum-positive sign
    std::vector<double> residuals;          // relative: ||A u - λu|| / (λ ||u||)
    bool converged = false;
    int outer_iterations = 0;
};

/// Leading k eigenpairs of the Dirichlet Laplacian on `mask`, computed by
/// shift-invert subspace iteration (inner CG solves, Rayleigh-Ritz on a
/// k+2 block). Deterministic for a fixed seed. Optional warm start from a
/// previous result on the same grid (masks may differ).
EigenResult eigensolve(const DomainMask& mask, int k, const SolverConfig& cfg,
                       const EigenResult* warm_start = nullptr);

}  // namespace eigenshape
