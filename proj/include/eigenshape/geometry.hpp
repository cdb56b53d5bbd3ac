#pragma once

#include <optional>
#include <vector>

#include "eigenshape/grid.hpp"

namespace eigenshape {

/// Exact measure: (true-cell count) * h^dim.
double measure(const DomainMask& mask);

/// Face-count perimeter: h^(dim-1) times the number of faces separating a
/// true cell from a false cell (or from outside the grid). Faces whose
/// true-side cell lies in `exclude` are skipped. Note the face count of a
/// rasterized smooth set converges to the anisotropic (l1) perimeter, e.g.
/// 8R for a circle of radius R, not 2*pi*R.
double perimeter(const DomainMask& mask, const DomainMask* exclude = nullptr);

/// Rearranges every 1-D column of cells along `axis` into a contiguous run
/// of equal length centered on the grid midline; an odd parity gap puts the
/// extra cell on the negative-index side. Preserves the cell count exactly.
DomainMask steiner_symmetrize(const DomainMask& mask, int axis);

/// (hull area - measure) / measure, clamped at 0, where the hull is the
/// convex hull of the true-cell centers. 2-D only; throws on empty masks.
double convexity_defect(const DomainMask& mask);

/// Maximum over true cells of Omega of the Euclidean distance (cell centers)
/// to the nearest true cell of D. Throws if D is empty.
double excess_distance(const ConstraintPair& pair);

/// Discrete form of "Omega ⊂ D + B_L": excess_distance <= L + h*sqrt(dim).
bool satisfies_dilation_bound(const ConstraintPair& pair, double dilation_radius);

/// Face-adjacency connected components, sorted by decreasing measure
/// (ties by smallest contained cell index).
std::vector<DomainMask> connected_components(const DomainMask& mask);

/// Squared Euclidean distance transform (in cell units) from the true cells
/// of `sites`; exact, separable per axis. Cells of `sites` get 0.
std::vector<double> squared_distance_transform(const DomainMask& sites);

/// Cells whose center lies within Euclidean distance `radius` (length
/// units) of a true cell center. Unlike face dilation this adds no lattice
/// anisotropy.
DomainMask dilate_euclidean(const DomainMask& mask, double radius);

/// Diameter of the ball of measure a in the grid dimension (0 if a <= 0).
double ball_diameter_for_measure(double a, int dim);

/// Area of the convex hull of the true-cell centers (shoelace on the hull
/// polygon); 0 for fewer than 3 non-collinear points. 2-D only.
double hull_area_of_centers(const DomainMask& mask);

}  // namespace eigenshape
