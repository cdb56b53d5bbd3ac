#pragma once

#include <string>

#include "eigenshape/grid.hpp"
#include "eigenshape/optimizer.hpp"
#include "eigenshape/solver.hpp"

namespace eigenshape {

/// Masks serialize to plain PGM (P2, maxval 1), one raster per mask, with a
/// header comment line "# h=<spacing> origin=<x> <y>" carrying the grid
/// placement. Rows are written top line = highest y index. 2-D only.
void write_mask_pgm(const DomainMask& mask, const std::string& path);
DomainMask read_mask_pgm(const std::string& path);

/// Fields serialize two ways: a rescaled 16-bit PGM for inspection (the
/// comment line records min/max) and a lossless CSV of (cell index, value)
/// rows for exact round-trips.
void write_field_pgm(const ScalarField& field, const std::string& path);
void write_field_csv(const ScalarField& field, const std::string& path);
ScalarField read_field_csv(const std::string& path, const DomainMask& support);

void write_eigen_csv(const EigenResult& result, const std::string& path);
void write_trace_csv(const OptimizationTrace& trace, const std::string& path);

/// Shortest-round-trip decimal formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace eigenshape
