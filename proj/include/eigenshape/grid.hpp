#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace eigenshape {

/// Uniform Cartesian grid of square (dim=2) or cubic (dim=3) cells.
/// Cell (i,j[,k]) spans [origin + i*h, origin + (i+1)*h) per axis; its
/// center sits at origin + (i + 0.5)*h. Linear indices are lexicographic
/// with axis 0 fastest.
struct GridSpec {
    int dim = 2;
    std::array<int, 3> cells = {1, 1, 1};       // trailing entries are 1
    std::array<double, 3> origin = {0.0, 0.0, 0.0};
    double h = 1.0;

    GridSpec() = default;
    GridSpec(int dim_, std::array<int, 3> cells_, std::array<double, 3> origin_, double h_);

    std::int64_t total_cells() const {
        return std::int64_t(cells[0]) * cells[1] * cells[2];
    }

    std::int64_t index_of(int i, int j, int k = 0) const {
        return i + std::int64_t(cells[0]) * (j + std::int64_t(cells[1]) * k);
    }

    std::array<int, 3> coords_of(std::int64_t idx) const {
        std::array<int, 3> c;
        c[0] = int(idx % cells[0]);
        idx /= cells[0];
        c[1] = int(idx % cells[1]);
        c[2] = int(idx / cells[1]);
        return c;
    }

    double center(int coord, int axis) const {
        return origin[axis] + (coord + 0.5) * h;
    }

    std::array<double, 3> center_of(std::int64_t idx) const {
        auto c = coords_of(idx);
        return {center(c[0], 0), center(c[1], 1), dim == 3 ? center(c[2], 2) : 0.0};
    }

    bool contains(int i, int j, int k = 0) const {
        return i >= 0 && i < cells[0] && j >= 0 && j < cells[1] && k >= 0 && k < cells[2];
    }

    double cell_volume() const;      // h^dim
    double face_area() const;        // h^(dim-1)

    bool operator==(const GridSpec& o) const {
        return dim == o.dim && cells == o.cells && origin == o.origin && h == o.h;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Pixelated open set: indicator over the cells of a grid.
class DomainMask {
public:
    DomainMask() = default;
    explicit DomainMask(GridSpec grid)
        : grid_(grid), cells_(static_cast<std::size_t>(grid.total_cells()), 0) {}

    const GridSpec& grid() const { return grid_; }

    bool test(std::int64_t idx) const { return cells_[static_cast<std::size_t>(idx)] != 0; }

    void set(std::int64_t idx, bool value) {
        auto& c = cells_[static_cast<std::size_t>(idx)];
        count_ += (value ? 1 : 0) - (c ? 1 : 0);
        c = value ? 1 : 0;
    }

    std::int64_t count() const { return count_; }
    bool empty() const { return count_ == 0; }

    /// Exact Lebesgue measure: count * h^dim.
    double measure() const { return double(count_) * grid_.cell_volume(); }

    bool is_subset_of(const DomainMask& other) const;
    bool same_cells(const DomainMask& other) const;

    const std::vector<std::uint8_t>& raw() const { return cells_; }

private:
    GridSpec grid_;
    std::vector<std::uint8_t> cells_;
    std::int64_t count_ = 0;
};

/// Constraint pair D ⊆ Ω on one grid. Construction checks the inclusion.
struct ConstraintPair {
    DomainMask D;
    DomainMask omega;

    ConstraintPair(DomainMask d, DomainMask om);
};

/// Real values on grid cells, zero outside the support mask.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;
    DomainMask support;

    ScalarField() = default;
    explicit ScalarField(const DomainMask& support_mask)
        : grid(support_mask.grid()),
          values(static_cast<std::size_t>(support_mask.grid().total_cells()), 0.0),
          support(support_mask) {}

    double operator[](std::int64_t idx) const { return values[static_cast<std::size_t>(idx)]; }
    double& operator[](std::int64_t idx) { return values[static_cast<std::size_t>(idx)]; }

    double max_value() const;

    /// Throws if a value is non-finite or nonzero outside the support.
    void validate() const;
};

/// Face-dilation of a mask by `rounds` cells, clipped at the grid boundary.
DomainMask dilate(const DomainMask& mask, int rounds);

/// Cellwise boolean combinations (grids must match).
DomainMask mask_union(const DomainMask& a, const DomainMask& b);
DomainMask mask_intersection(const DomainMask& a, const DomainMask& b);
DomainMask mask_difference(const DomainMask& a, const DomainMask& b);

/// True if any true cell lies in the outermost cell layer of the grid.
bool touches_boundary(const DomainMask& mask);

}  // namespace eigenshape
