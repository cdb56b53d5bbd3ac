#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eigenshape/grid.hpp"
#include "eigenshape/solver.hpp"

namespace eigenshape {

enum class ObjectiveKind { eigenvalue_k, energy };

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::eigenvalue_k;
    int k = 1;

    void validate() const;
};

struct ConstrainedProblem {
    DomainMask D;
    double m = 0.0;  // measure budget; the optimizer saturates it
    ObjectiveSpec objective;
};

struct PenalizedProblem {
    DomainMask D;
    double lambda = 1.0;  // measure multiplier
    ObjectiveSpec objective;
};

enum class OptimizeStatus { converged, budget_exhausted };

struct OptimizationTrace {
    struct Entry {
        int iteration;
        double objective;
        double measure;
        std::int64_t flips;   // cells changed against the previous accepted iterate
        double residual;      // solver residual behind the objective value
        bool touches_boundary;
    };
    std::vector<Entry> entries;
    OptimizeStatus status = OptimizeStatus::budget_exhausted;
    int best_iteration = 0;
};

struct ConstrainedResult {
    DomainMask mask;
    OptimizationTrace trace;
    double objective = 0.0;
    EigenResult eigen;  // populated for eigenvalue objectives (on the returned mask)
};

/// Superlevel-set descent for min λ_k(Ω) (or the torsion energy) over masks
/// with D ⊆ Ω and measure(Ω) = m saturated to one cell. Each step computes
/// the mode density on a small Euclidean collar around the iterate and
/// rethresholds it to the target cell count, always unioned with D.
/// Deterministic for a fixed seed. Throws if the returned mask touches the
/// grid boundary (the bounding box is too small for the problem).
ConstrainedResult optimize_constrained(const ConstrainedProblem& p, const SolverConfig& cfg,
                                       int max_outer, const DomainMask* init = nullptr);

struct PenalizedProbe {
    double m;
    double objective_value;
    double penalized_value;
    bool feasible;
};

struct PenalizedResult {
    DomainMask mask;
    OptimizationTrace trace;  // trace of the winning constrained run
    EigenResult eigen;        // eigen data of the winning run (eigenvalue objective)
    double objective_value = 0.0;
    double penalized_value = 0.0;
    double m_star = 0.0;
    std::vector<PenalizedProbe> probes;
    bool budget_binding = false;  // optimum sits at m_max
};

/// Penalized problem min λ₁(Ω) + Λ|Ω| reduced to a one-dimensional search
/// over the measure budget: coarse bracket scan, golden-section refinement
/// down to the grid quantum, constrained solve per probe. Probes whose
/// optimum hits the grid boundary count as infeasible.
PenalizedResult optimize_penalized(const PenalizedProblem& p, const SolverConfig& cfg,
                                   double m_max, int max_outer = 60);

enum class CaseLabel { A, B, mixed };

struct CaseReport {
    CaseLabel label = CaseLabel::mixed;
    double added_measure = 0.0;
    double added_to_ball = 0.0;  // measure of Ω∖D in components attached to the ball-like part
    double added_to_rect = 0.0;
    double added_elsewhere = 0.0;  // detached from both, or bridging them
};

/// Classifies where the free measure of Ω∖D attached, for a two-component
/// constraint D (ball-like and rectangle-like parts told apart by the
/// aspect ratio of their bounding boxes). Zero added measure reports
/// `mixed` by convention.
CaseReport detect_case(const ConstraintPair& pair);

const char* to_string(CaseLabel label);

}  // namespace eigenshape
