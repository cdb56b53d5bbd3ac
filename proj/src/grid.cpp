#include "eigenshape/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace eigenshape {

GridSpec::GridSpec(int dim_, std::array<int, 3> cells_, std::array<double, 3> origin_, double h_)
    : dim(dim_), cells(cells_), origin(origin_), h(h_) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("GridSpec: dim must be 2 or 3");
    if (dim == 2) {
        cells[2] = 1;
        origin[2] = 0.0;
    }
    for (int a = 0; a < dim; ++a)
        if (cells[a] < 1) throw std::invalid_argument("GridSpec: cells_per_axis must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("GridSpec: spacing h must be > 0");
}

double GridSpec::cell_volume() const {
    return dim == 2 ? h * h : h * h * h;
}

double GridSpec::face_area() const {
    return dim == 2 ? h : h * h;
}

bool DomainMask::is_subset_of(const DomainMask& other) const {
    if (grid_ != other.grid_) return false;
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i] && !other.cells_[i]) return false;
    return true;
}

bool DomainMask::same_cells(const DomainMask& other) const {
    return grid_ == other.grid_ && cells_ == other.cells_;
}

ConstraintPair::ConstraintPair(DomainMask d, DomainMask om) : D(std::move(d)), omega(std::move(om)) {
    if (D.grid() != omega.grid())
        throw std::invalid_argument("ConstraintPair: D and Omega live on different grids");
    if (!D.is_subset_of(omega))
        throw std::invalid_argument("ConstraintPair: D is not contained in Omega");
}

double ScalarField::max_value() const {
    double m = 0.0;
    for (std::int64_t idx = 0; idx < grid.total_cells(); ++idx)
        if (support.test(idx) && values[static_cast<std::size_t>(idx)] > m)
            m = values[static_cast<std::size_t>(idx)];
    return m;
}

void ScalarField::validate() const {
    if (grid != support.grid()) throw std::invalid_argument("ScalarField: grid/support mismatch");
    if (values.size() != static_cast<std::size_t>(grid.total_cells()))
        throw std::invalid_argument("ScalarField: value array size mismatch");
    for (std::int64_t idx = 0; idx < grid.total_cells(); ++idx) {
        double v = values[static_cast<std::size_t>(idx)];
        if (!std::isfinite(v)) throw std::invalid_argument("ScalarField: non-finite value");
        if (!support.test(idx) && v != 0.0)
            throw std::invalid_argument("ScalarField: nonzero value outside support");
    }
}

DomainMask dilate(const DomainMask& mask, int rounds) {
    DomainMask out = mask;
    const GridSpec& g = mask.grid();
    for (int round = 0; round < rounds; ++round) {
        DomainMask next = out;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            if (!out.test(idx)) continue;
            auto c = out.grid().coords_of(idx);
            for (int a = 0; a < g.dim; ++a) {
                for (int s = -1; s <= 1; s += 2) {
                    std::array<int, 3> n = c;
                    n[a] += s;
                    if (g.contains(n[0], n[1], n[2])) next.set(g.index_of(n[0], n[1], n[2]), true);
                }
            }
        }
        out = std::move(next);
    }
    return out;
}

static void require_same_grid(const DomainMask& a, const DomainMask& b, const char* op) {
    if (a.grid() != b.grid()) throw std::invalid_argument(std::string(op) + ": grid mismatch");
}

DomainMask mask_union(const DomainMask& a, const DomainMask& b) {
    require_same_grid(a, b, "mask_union");
    DomainMask out = a;
    for (std::int64_t idx = 0; idx < a.grid().total_cells(); ++idx)
        if (b.test(idx)) out.set(idx, true);
    return out;
}

DomainMask mask_intersection(const DomainMask& a, const DomainMask& b) {
    require_same_grid(a, b, "mask_intersection");
    DomainMask out(a.grid());
    for (std::int64_t idx = 0; idx < a.grid().total_cells(); ++idx)
        if (a.test(idx) && b.test(idx)) out.set(idx, true);
    return out;
}

DomainMask mask_difference(const DomainMask& a, const DomainMask& b) {
    require_same_grid(a, b, "mask_difference");
    DomainMask out(a.grid());
    for (std::int64_t idx = 0; idx < a.grid().total_cells(); ++idx)
        if (a.test(idx) && !b.test(idx)) out.set(idx, true);
    return out;
}

bool touches_boundary(const DomainMask& mask) {
    const GridSpec& g = mask.grid();
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
        if (!mask.test(idx)) continue;
        auto c = g.coords_of(idx);
        for (int a = 0; a < g.dim; ++a)
            if (c[a] == 0 || c[a] == g.cells[a] - 1) return true;
    }
    return false;
}

}  // namespace eigenshape
