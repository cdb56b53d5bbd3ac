#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eigenshape/geometry.hpp"
#include "eigenshape/grid.hpp"
#include "oracles.hpp"

using namespace eigenshape;

namespace {

GridSpec square_grid(int n, double h, double x0 = 0.0, double y0 = 0.0) {
    return GridSpec(2, {n, n, 1}, {x0, y0, 0.0}, h);
}

}  // namespace

TEST_CASE("grid invariants are enforced") {
    CHECK_THROWS_AS(GridSpec(4, {2, 2, 2}, {0, 0, 0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(2, {0, 2, 1}, {0, 0, 0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(2, {2, 2, 1}, {0, 0, 0}, 0.0), std::invalid_argument);
    GridSpec g(2, {3, 4, 7}, {0, 0, 0}, 0.5);
    CHECK(g.cells[2] == 1);  // trailing axis collapses in 2-D
    CHECK(g.total_cells() == 12);
}

TEST_CASE("measure: zero, one cell, block") {
    GridSpec g = square_grid(16, 0.1);
    DomainMask empty(g);
    CHECK(measure(empty) == 0.0);

    DomainMask one(g);
    one.set(g.index_of(3, 5), true);
    CHECK(measure(one) == doctest::Approx(0.01).epsilon(1e-15));

    DomainMask block = oracle::rectangle_mask(g, 2, 2, 10, 10);
    CHECK(measure(block) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("measure is modular over union and intersection") {
    GridSpec g = square_grid(24, 0.25);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        DomainMask a = oracle::random_blob(g, rng);
        DomainMask b = oracle::random_blob(g, rng);
        const double lhs = measure(mask_union(a, b)) + measure(mask_intersection(a, b));
        CHECK(lhs == doctest::Approx(measure(a) + measure(b)).epsilon(1e-14));
    }
}

TEST_CASE("perimeter: single cell and block") {
    GridSpec g1 = square_grid(5, 1.0);
    DomainMask one(g1);
    one.set(g1.index_of(2, 2), true);
    CHECK(perimeter(one) == doctest::Approx(4.0));

    GridSpec g2 = square_grid(8, 0.5);
    DomainMask block = oracle::rectangle_mask(g2, 1, 1, 3, 2);
    CHECK(perimeter(block) == doctest::Approx(5.0));  // 2*(3+2)*0.5
}

TEST_CASE("perimeter matches brute-force face enumeration") {
    std::mt19937_64 rng(11);
    GridSpec g = square_grid(32, 0.125);
    for (int trial = 0; trial < 25; ++trial) {
        DomainMask m = oracle::random_blob(g, rng, 4);
        CHECK(perimeter(m) ==
              doctest::Approx(double(oracle::brute_force_boundary_faces(m)) * g.h).epsilon(1e-14));
        DomainMask excl = dilate(oracle::random_blob(g, rng, 1), 1);
        CHECK(perimeter(m, &excl) ==
              doctest::Approx(double(oracle::brute_force_boundary_faces(m, &excl)) * g.h)
                  .epsilon(1e-14));
    }
}

TEST_CASE("perimeter of a rasterized disk approaches the l1 perimeter") {
    // Face counting converges to the anisotropic perimeter: for the unit
    // circle that is 8R (lattice factor 4/pi over the Euclidean 2*pi),
    // observed 7.97 at h = 1/128 when this value was frozen.
    GridSpec g(2, {512, 512, 1}, {-2.0, -2.0, 0.0}, 1.0 / 128.0);
    DomainMask disk = oracle::disk_mask(g, 0.0, 0.0, 1.0);
    CHECK(perimeter(disk) == doctest::Approx(8.0).epsilon(0.05));
}

TEST_CASE("perimeter rejects an exclude mask from another grid") {
    DomainMask a(square_grid(4, 1.0));
    DomainMask b(square_grid(5, 1.0));
    CHECK_THROWS_AS(perimeter(a, &b), std::invalid_argument);
}

TEST_CASE("perimeter in 3-D counts h^2 faces") {
    GridSpec g(3, {4, 4, 4}, {0, 0, 0}, 0.5);
    DomainMask one(g);
    one.set(g.index_of(1, 2, 2), true);
    CHECK(perimeter(one) == doctest::Approx(6 * 0.25));
}

TEST_CASE("steiner symmetrization: fixed point, pair, properties") {
    GridSpec g = square_grid(64, 1.0 / 32.0, -1.0, -1.0);
    DomainMask disk = oracle::disk_mask(g, 0.0, 0.0, 0.7);
    CHECK(steiner_symmetrize(disk, 0).same_cells(disk));
    CHECK(steiner_symmetrize(disk, 1).same_cells(disk));

    // Two separated cells in one column collapse to two adjacent centered cells.
    GridSpec g6 = square_grid(6, 1.0);
    DomainMask two(g6);
    two.set(g6.index_of(2, 0), true);
    two.set(g6.index_of(2, 5), true);
    DomainMask sym = steiner_symmetrize(two, 1);
    CHECK(sym.count() == 2);
    CHECK(sym.test(g6.index_of(2, 2)));
    CHECK(sym.test(g6.index_of(2, 3)));

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        DomainMask m = oracle::random_blob(g, rng, 4);
        for (int axis = 0; axis < 2; ++axis) {
            DomainMask s = steiner_symmetrize(m, axis);
            CHECK(s.count() == m.count());
            CHECK(steiner_symmetrize(s, axis).same_cells(s));  // idempotent
        }
    }
}

TEST_CASE("steiner parity tie goes to the negative side") {
    GridSpec g5 = square_grid(5, 1.0);
    DomainMask one(g5);
    one.set(g5.index_of(0, 4), true);
    DomainMask s = steiner_symmetrize(one, 1);
    CHECK(s.count() == 1);
    CHECK(s.test(g5.index_of(0, 2)));  // odd count on odd grid: exact center

    GridSpec g4 = square_grid(4, 1.0);
    DomainMask one4(g4);
    one4.set(g4.index_of(0, 3), true);
    DomainMask s4 = steiner_symmetrize(one4, 1);
    CHECK(s4.test(g4.index_of(0, 1)));  // tie between rows 1 and 2 -> negative side
}

TEST_CASE("convexity defect: rectangle, L-shape, disk") {
    GridSpec g = square_grid(64, 1.0 / 32.0);
    DomainMask rect = oracle::rectangle_mask(g, 8, 12, 30, 17);
    CHECK(convexity_defect(rect) == 0.0);

    // L of three unit blocks from a 2x2 arrangement. The hull of the cell
    // centers is the square clipped by the diagonal across the notch, so at
    // spacing h the defect is (hull - 3)/3 with hull -> 3.5 as h -> 0.
    GridSpec gl = square_grid(64, 1.0 / 32.0);
    DomainMask ell(gl);
    auto add_block = [&](int bx, int by) {
        for (int j = 0; j < 32; ++j)
            for (int i = 0; i < 32; ++i) ell.set(gl.index_of(bx * 32 + i, by * 32 + j), true);
    };
    add_block(0, 0);
    add_block(1, 0);
    add_block(0, 1);
    const double h = gl.h;
    const double expected_hull = (2.0 - h) * (2.0 - h) - 0.5;  // -> 3.5 as h -> 0
    CHECK(convexity_defect(ell) ==
          doctest::Approx((expected_hull - 3.0) / 3.0).epsilon(1e-12));

    GridSpec gd(2, {128, 128, 1}, {-1.0, -1.0, 0.0}, 1.0 / 64.0);
    DomainMask disk = oracle::disk_mask(gd, 0.0, 0.0, 0.9);
    CHECK(convexity_defect(disk) < 0.05);

    DomainMask empty(gd);
    CHECK_THROWS_AS(convexity_defect(empty), std::invalid_argument);
}

TEST_CASE("excess distance: identity, offset cell, bound predicate") {
    GridSpec g = square_grid(32, 0.1);
    DomainMask d(g);
    d.set(g.index_of(10, 10), true);

    CHECK(excess_distance(ConstraintPair(d, d)) == 0.0);

    DomainMask omega = d;
    omega.set(g.index_of(15, 10), true);  // 5h along x
    CHECK(excess_distance(ConstraintPair(d, omega)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(satisfies_dilation_bound(ConstraintPair(d, omega), 0.5));
    CHECK(!satisfies_dilation_bound(ConstraintPair(d, omega), 0.2));

    DomainMask empty(g);
    CHECK_THROWS_AS(excess_distance(ConstraintPair(empty, omega)), std::invalid_argument);
}

TEST_CASE("excess distance agrees with pairwise brute force") {
    GridSpec g = square_grid(20, 0.3);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        DomainMask d = oracle::random_blob(g, rng, 2);
        DomainMask omega = mask_union(d, oracle::random_blob(g, rng, 2));
        double brute = 0.0;
        for (std::int64_t i = 0; i < g.total_cells(); ++i) {
            if (!omega.test(i)) continue;
            auto ci = g.coords_of(i);
            double best = 1e300;
            for (std::int64_t j = 0; j < g.total_cells(); ++j) {
                if (!d.test(j)) continue;
                auto cj = g.coords_of(j);
                const double dx = double(ci[0] - cj[0]), dy = double(ci[1] - cj[1]);
                best = std::min(best, dx * dx + dy * dy);
            }
            brute = std::max(brute, best);
        }
        CHECK(excess_distance(ConstraintPair(d, omega)) ==
              doctest::Approx(std::sqrt(brute) * g.h).epsilon(1e-12));
    }
}

TEST_CASE("connected components: empty, diagonal, dumbbell") {
    GridSpec g = square_grid(16, 0.5);
    DomainMask empty(g);
    CHECK(connected_components(empty).empty());

    DomainMask diag(g);
    diag.set(g.index_of(4, 4), true);
    diag.set(g.index_of(5, 5), true);
    CHECK(connected_components(diag).size() == 2);  // face adjacency only

    // Dumbbell: ball plus a far rectangle stays two components.
    GridSpec gd(2, {200, 100, 1}, {-1.5, -2.5, 0.0}, 0.05);
    DomainMask ball = oracle::disk_mask(gd, 0.0, 0.0, 0.5);
    DomainMask dumbbell = ball;
    for (std::int64_t idx = 0; idx < gd.total_cells(); ++idx) {
        auto c = gd.coords_of(idx);
        const double x = gd.center(c[0], 0), y = gd.center(c[1], 1);
        if (x > 5.875 && x < 6.125 && y > -2.0 && y < 2.0) dumbbell.set(idx, true);
    }
    auto comps = connected_components(dumbbell);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].count() + comps[1].count() == dumbbell.count());
    CHECK(comps[0].count() >= comps[1].count());  // sorted by decreasing measure
}

TEST_CASE("dilate grows by face rings and clips at the border") {
    GridSpec g = square_grid(7, 1.0);
    DomainMask one(g);
    one.set(g.index_of(0, 3), true);
    DomainMask d1 = dilate(one, 1);
    CHECK(d1.count() == 4);  // west neighbor clipped away
    CHECK(touches_boundary(d1));
}

TEST_CASE("constraint pair rejects non-nested masks") {
    GridSpec g = square_grid(8, 1.0);
    DomainMask d(g), omega(g);
    d.set(g.index_of(1, 1), true);
    omega.set(g.index_of(2, 2), true);
    CHECK_THROWS_AS(ConstraintPair(d, omega), std::invalid_argument);
}

TEST_CASE("3-D measure and steiner smoke test") {
    GridSpec g(3, {8, 8, 8}, {0, 0, 0}, 0.25);
    DomainMask m(g);
    for (int k = 2; k < 5; ++k)
        for (int j = 1; j < 4; ++j)
            for (int i = 3; i < 7; ++i) m.set(g.index_of(i, j, k), true);
    CHECK(measure(m) == doctest::Approx(36 * 0.25 * 0.25 * 0.25));
    DomainMask s = steiner_symmetrize(m, 2);
    CHECK(s.count() == m.count());
    CHECK(steiner_symmetrize(s, 2).same_cells(s));
}
