#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eigenshape/grid.hpp"
#include "eigenshape/optimizer.hpp"
#include "eigenshape/solver.hpp"

namespace eigenshape {

/// Geometric primitive of a constraint builder; rasterized by cell-center
/// membership. Degenerate thin shapes (extent under one cell) rasterize to
/// a one-cell strip with a warning instead of vanishing.
struct Primitive {
    enum class Kind { ball, rectangle, single_cell };
    Kind kind = Kind::ball;
    std::array<double, 3> center = {0.0, 0.0, 0.0};
    double radius = 0.0;                          // ball
    std::array<double, 3> half_widths = {0, 0, 0};  // rectangle
    std::array<int, 3> index = {0, 0, 0};         // single_cell
};

DomainMask rasterize(const std::vector<Primitive>& primitives, const GridSpec& grid,
                     std::vector<std::string>* warnings = nullptr);

struct CheckSpec {
    std::string name;
    std::map<std::string, double> params;
    std::string label;  // string-valued parameter (e.g. the expected case)
};

struct CheckOutcome {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

struct Scenario {
    std::string name;
    GridSpec grid;
    std::vector<Primitive> constraint;
    bool penalized = false;
    double m = 0.0;       // constrained budget
    double lambda = 0.0;  // penalized multiplier
    double m_max = 0.0;   // penalized search range
    ObjectiveSpec objective;
    SolverConfig solver;
    int max_outer = 60;
    std::vector<CheckSpec> checks;
};

struct RunReport {
    std::string scenario;
    double objective = 0.0;
    double measure_value = 0.0;
    std::vector<CheckOutcome> outcomes;
    std::vector<std::string> artifacts;
    double wall_seconds = 0.0;
    std::string error;  // nonempty when the run aborted

    bool passed() const;
};

struct SuiteConfig {
    std::uint64_t seed = 1;
    std::vector<Scenario> scenarios;
    std::string provenance;
};

/// Parses the flat JSON config; throws std::runtime_error with a line
/// number on malformed input, duplicate scenario names, or infeasible
/// problems (m below the constraint measure).
SuiteConfig load_suite_config(const std::string& path);

/// Runs one scenario, writing mask.pgm, trace.csv, eigen.csv, field files
/// and report.csv under `output_dir` (created if missing). Deterministic
/// for a fixed seed; wall time goes to a separate timing file so report
/// files are bit-for-bit reproducible.
RunReport run_scenario(const Scenario& s, const std::string& output_dir);

struct SuiteSummary {
    std::vector<RunReport> reports;  // sorted by scenario name
    bool all_passed = true;
};

/// Runs every scenario of the config (optionally on `jobs` threads), writes
/// per-scenario artifacts plus an aggregate summary.csv, and prints a table.
/// A scenario that throws is reported as failed; the summary is still
/// written.
SuiteSummary run_suite(const std::string& config_path, const std::string& output_dir, int jobs = 1,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace eigenshape
