#include "eigenshape/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eigenshape {

double measure(const DomainMask& mask) {
    return mask.measure();
}

double perimeter(const DomainMask& mask, const DomainMask* exclude) {
    const GridSpec& g = mask.grid();
    if (exclude && exclude->grid() != g)
        throw std::invalid_argument("perimeter: exclude mask lives on a different grid");
    std::int64_t faces = 0;
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
        if (!mask.test(idx)) continue;
        if (exclude && exclude->test(idx)) continue;
        auto c = g.coords_of(idx);
        for (int a = 0; a < g.dim; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                std::array<int, 3> n = c;
                n[a] += s;
                bool neighbor_true =
                    g.contains(n[0], n[1], n[2]) && mask.test(g.index_of(n[0], n[1], n[2]));
                if (!neighbor_true) ++faces;
            }
        }
    }
    return double(faces) * g.face_area();
}

DomainMask steiner_symmetrize(const DomainMask& mask, int axis) {
    const GridSpec& g = mask.grid();
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("steiner_symmetrize: bad axis");
    DomainMask out(g);
    const int n_axis = g.cells[axis];
    // Iterate over all columns: fix the coordinates of the other axes.
    std::array<int, 3> c = {0, 0, 0};
    const int a1 = (axis == 0) ? 1 : 0;
    const int a2 = (axis == 2) ? 1 : 2;
    for (c[a2] = 0; c[a2] < g.cells[a2]; ++c[a2]) {
        for (c[a1] = 0; c[a1] < g.cells[a1]; ++c[a1]) {
            int count = 0;
            for (c[axis] = 0; c[axis] < n_axis; ++c[axis])
                if (mask.test(g.index_of(c[0], c[1], c[2]))) ++count;
            if (count == 0) continue;
            const int lo = (n_axis - count) / 2;  // parity tie toward the negative side
            for (c[axis] = lo; c[axis] < lo + count; ++c[axis])
                out.set(g.index_of(c[0], c[1], c[2]), true);
        }
    }
    return out;
}

namespace {

struct Point2 {
    double x, y;
};

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew monotone chain; returns hull vertices in counterclockwise order.
std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Point2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(const std::vector<Point2>& poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % poly.size()];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * std::abs(twice);
}

}  // namespace

double hull_area_of_centers(const DomainMask& mask) {
    const GridSpec& g = mask.grid();
    if (g.dim != 2) throw std::invalid_argument("hull_area_of_centers: dim must be 2");
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(mask.count()));
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
        if (!mask.test(idx)) continue;
        auto c = g.coords_of(idx);
        pts.push_back({g.center(c[0], 0), g.center(c[1], 1)});
    }
    return polygon_area(convex_hull(std::move(pts)));
}

double convexity_defect(const DomainMask& mask) {
    if (mask.empty()) throw std::invalid_argument("convexity_defect: empty mask");
    if (mask.grid().dim != 2) throw std::invalid_argument("convexity_defect: dim must be 2");
    const double m = mask.measure();
    const double hull = hull_area_of_centers(mask);
    return std::max(0.0, (hull - m) / m);
}

std::vector<double> squared_distance_transform(const DomainMask& sites) {
    const GridSpec& g = sites.grid();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> d(static_cast<std::size_t>(g.total_cells()), inf);
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        if (sites.test(idx)) d[static_cast<std::size_t>(idx)] = 0.0;

    // Felzenszwalb-Huttenlocher 1-D lower envelope, swept along each axis.
    auto edt_1d = [&inf](std::vector<double>& f) {
        const int n = int(f.size());
        std::vector<int> v(n);
        std::vector<double> z(n + 1), out(n);
        int k = 0;
        v[0] = 0;
        z[0] = -inf;
        z[1] = inf;
        for (int q = 1; q < n; ++q) {
            if (f[q] == inf) continue;
            if (f[v[0]] == inf) {
                v[0] = q;
                z[1] = inf;
                continue;
            }
            double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
            while (s <= z[k]) {
                --k;
                s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = inf;
        }
        if (f[v[0]] == inf) return;  // fully empty line
        k = 0;
        for (int q = 0; q < n; ++q) {
            while (z[k + 1] < q) ++k;
            out[q] = double(q - v[k]) * (q - v[k]) + f[v[k]];
        }
        f = out;
    };

    std::vector<double> line;
    for (int axis = 0; axis < g.dim; ++axis) {
        const int n_axis = g.cells[axis];
        const int a1 = (axis == 0) ? 1 : 0;
        const int a2 = (axis == 2) ? 1 : 2;
        line.resize(static_cast<std::size_t>(n_axis));
        std::array<int, 3> c = {0, 0, 0};
        for (c[a2] = 0; c[a2] < g.cells[a2]; ++c[a2]) {
            for (c[a1] = 0; c[a1] < g.cells[a1]; ++c[a1]) {
                for (c[axis] = 0; c[axis] < n_axis; ++c[axis])
                    line[static_cast<std::size_t>(c[axis])] =
                        d[static_cast<std::size_t>(g.index_of(c[0], c[1], c[2]))];
                edt_1d(line);
                for (c[axis] = 0; c[axis] < n_axis; ++c[axis])
                    d[static_cast<std::size_t>(g.index_of(c[0], c[1], c[2]))] =
                        line[static_cast<std::size_t>(c[axis])];
            }
        }
    }
    return d;
}

DomainMask dilate_euclidean(const DomainMask& mask, double radius) {
    const GridSpec& g = mask.grid();
    const double r_cells2 = (radius / g.h) * (radius / g.h);
    std::vector<double> d2 = squared_distance_transform(mask);
    DomainMask out(g);
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        if (d2[static_cast<std::size_t>(idx)] <= r_cells2) out.set(idx, true);
    return out;
}

double excess_distance(const ConstraintPair& pair) {
    if (pair.D.empty()) throw std::invalid_argument("excess_distance: empty D");
    const GridSpec& g = pair.D.grid();
    std::vector<double> d2 = squared_distance_transform(pair.D);
    double worst = 0.0;
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        if (pair.omega.test(idx)) worst = std::max(worst, d2[static_cast<std::size_t>(idx)]);
    return std::sqrt(worst) * g.h;
}

bool satisfies_dilation_bound(const ConstraintPair& pair, double dilation_radius) {
    if (dilation_radius < 0.0) throw std::invalid_argument("satisfies_dilation_bound: L < 0");
    const GridSpec& g = pair.D.grid();
    return excess_distance(pair) <= dilation_radius + g.h * std::sqrt(double(g.dim));
}

std::vector<DomainMask> connected_components(const DomainMask& mask) {
    const GridSpec& g = mask.grid();
    std::vector<std::int8_t> seen(static_cast<std::size_t>(g.total_cells()), 0);
    std::vector<DomainMask> comps;
    std::vector<std::int64_t> stack;
    for (std::int64_t seed = 0; seed < g.total_cells(); ++seed) {
        if (!mask.test(seed) || seen[static_cast<std::size_t>(seed)]) continue;
        DomainMask comp(g);
        stack.clear();
        stack.push_back(seed);
        seen[static_cast<std::size_t>(seed)] = 1;
        while (!stack.empty()) {
            std::int64_t idx = stack.back();
            stack.pop_back();
            comp.set(idx, true);
            auto c = g.coords_of(idx);
            for (int a = 0; a < g.dim; ++a) {
                for (int s = -1; s <= 1; s += 2) {
                    std::array<int, 3> n = c;
                    n[a] += s;
                    if (!g.contains(n[0], n[1], n[2])) continue;
                    std::int64_t nidx = g.index_of(n[0], n[1], n[2]);
                    if (mask.test(nidx) && !seen[static_cast<std::size_t>(nidx)]) {
                        seen[static_cast<std::size_t>(nidx)] = 1;
                        stack.push_back(nidx);
                    }
                }
            }
        }
        comps.push_back(std::move(comp));
    }
    std::stable_sort(comps.begin(), comps.end(),
                     [](const DomainMask& a, const DomainMask& b) { return a.count() > b.count(); });
    return comps;
}

double ball_diameter_for_measure(double a, int dim) {
    if (a <= 0.0) return 0.0;
    if (dim == 2) return 2.0 * std::sqrt(a / M_PI);
    return 2.0 * std::cbrt(a * 3.0 / (4.0 * M_PI));
}

}  // namespace eigenshape
