#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eigenshape/geometry.hpp"
#include "eigenshape/solver.hpp"
#include "oracles.hpp"

using namespace eigenshape;

namespace {

GridSpec grid2(int nx, int ny, double h, double x0 = 0.0, double y0 = 0.0) {
    return GridSpec(2, {nx, ny, 1}, {x0, y0, 0.0}, h);
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.cell_volume());
}

}  // namespace

TEST_CASE("apply_laplacian: stencil on one interior cell") {
    GridSpec g = grid2(8, 8, 0.25);
    DomainMask mask = oracle::rectangle_mask(g, 1, 1, 6, 6);
    DomainMask support(g);
    support.set(g.index_of(4, 4), true);
    ScalarField f(support);
    f[g.index_of(4, 4)] = 1.0;

    ScalarField out = apply_laplacian(f, mask);
    const double inv_h2 = 16.0;
    CHECK(out[g.index_of(4, 4)] == doctest::Approx(4.0 * inv_h2));
    CHECK(out[g.index_of(3, 4)] == doctest::Approx(-inv_h2));
    CHECK(out[g.index_of(5, 4)] == doctest::Approx(-inv_h2));
    CHECK(out[g.index_of(4, 3)] == doctest::Approx(-inv_h2));
    CHECK(out[g.index_of(4, 5)] == doctest::Approx(-inv_h2));

    ScalarField zero(support);
    ScalarField z = apply_laplacian(zero, mask);
    for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("apply_laplacian: discrete sine modes satisfy the closed form") {
    GridSpec g = grid2(16, 12, 0.1);
    const int N = 12, M = 9;
    DomainMask mask = oracle::rectangle_mask(g, 2, 1, N, M);
    for (auto [p, q] : {std::pair{1, 1}, {2, 3}, {5, 1}}) {
        ScalarField u = oracle::rectangle_mode(mask, 2, 1, N, M, p, q);
        const double lambda = oracle::rectangle_eigenvalue(p, q, N, M, g.h);
        ScalarField au = apply_laplacian(u, mask);
        double worst = 0.0;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
            worst = std::max(worst, std::abs(au[idx] - lambda * u[idx]));
        CHECK(worst < 1e-12 * lambda);
    }
}

TEST_CASE("apply_laplacian contract violations throw") {
    GridSpec g = grid2(6, 6, 0.5);
    DomainMask mask = oracle::rectangle_mask(g, 1, 1, 3, 3);
    DomainMask wide = oracle::rectangle_mask(g, 0, 0, 6, 6);
    ScalarField f(wide);
    f[g.index_of(0, 0)] = 1.0;
    CHECK_THROWS_AS(apply_laplacian(f, mask), std::invalid_argument);
}

TEST_CASE("torsion: single cell solves in closed form") {
    GridSpec g = grid2(5, 5, 0.2);
    DomainMask one(g);
    one.set(g.index_of(2, 2), true);
    SolverConfig cfg;
    TorsionResult r = solve_torsion(one, cfg);
    CHECK(r.converged);
    CHECK(r.w[g.index_of(2, 2)] == doctest::Approx(0.04 / 4.0).epsilon(1e-10));
}

TEST_CASE("torsion matches the dense direct solve on small masks") {
    std::mt19937_64 rng(13);
    SolverConfig cfg;
    cfg.tolerance = 1e-12;
    cfg.max_iterations = 4000;
    for (int trial = 0; trial < 8; ++trial) {
        GridSpec g = grid2(16, 16, 1.0 / 16.0);
        DomainMask m = oracle::random_blob(g, rng, 3);
        TorsionResult r = solve_torsion(m, cfg);
        REQUIRE(r.converged);
        ScalarField dense = oracle::dense_torsion(m);
        double worst = 0.0, scale = 0.0;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            worst = std::max(worst, std::abs(r.w[idx] - dense[idx]));
            scale = std::max(scale, std::abs(dense[idx]));
        }
        CHECK(worst <= 1e-10 * scale);
    }
}

TEST_CASE("torsion: positivity, symmetry, and the ball profile") {
    SolverConfig cfg;
    cfg.tolerance = 1e-10;

    // Positivity and mirror symmetry on a symmetric mask.
    GridSpec g(2, {64, 64, 1}, {-1.0, -1.0, 0.0}, 1.0 / 32.0);
    DomainMask disk = oracle::disk_mask(g, 0.0, 0.0, 0.8);
    TorsionResult r = solve_torsion(disk, cfg);
    REQUIRE(r.converged);
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        if (disk.test(idx)) CHECK(r.w[idx] > 0.0);
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i) {
            const double a = r.w[g.index_of(i, j)];
            const double b = r.w[g.index_of(63 - i, j)];
            CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
        }

    // Center value of the unit-ball torsion tends to R^2/4 under refinement.
    double prev_err = 1e9;
    for (int n : {32, 64, 128}) {
        GridSpec gb(2, {2 * n, 2 * n, 1}, {-1.25, -1.25, 0.0}, 2.5 / (2 * n));
        DomainMask ball = oracle::disk_mask(gb, 0.0, 0.0, 1.0);
        TorsionResult rb = solve_torsion(ball, cfg);
        REQUIRE(rb.converged);
        const double center = rb.w.max_value();
        const double err = std::abs(center - 0.25);
        CHECK(err < prev_err + 1e-4);
        prev_err = err;
    }
    CHECK(prev_err < 0.25 * 0.02);
}

TEST_CASE("torsion reports an exhausted budget honestly") {
    GridSpec g(2, {96, 96, 1}, {-1.5, -1.5, 0.0}, 1.0 / 32.0);
    DomainMask disk = oracle::disk_mask(g, 0.0, 0.0, 1.2);
    SolverConfig cfg;
    cfg.tolerance = 1e-12;
    cfg.max_iterations = 3;
    TorsionResult r = solve_torsion(disk, cfg);
    CHECK(!r.converged);
    CHECK(r.residual > 1e-12);
    CHECK(r.iterations == 3);
}

TEST_CASE("torsion domain monotonicity on random nested pairs") {
    std::mt19937_64 rng(17);
    SolverConfig cfg;
    cfg.tolerance = 1e-11;
    cfg.max_iterations = 4000;
    GridSpec g = grid2(24, 24, 1.0 / 24.0);
    for (int trial = 0; trial < 10; ++trial) {
        auto [inner, outer] = oracle::random_nested_pair(g, rng);
        TorsionResult wi = solve_torsion(inner, cfg);
        TorsionResult wo = solve_torsion(outer, cfg);
        REQUIRE(wi.converged);
        REQUIRE(wo.converged);
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
            CHECK(wi.w[idx] <= wo.w[idx] + 10.0 * cfg.tolerance);
    }
}

TEST_CASE("eigensolve: single cell") {
    GridSpec g = grid2(4, 4, 0.5);
    DomainMask one(g);
    one.set(g.index_of(1, 2), true);
    SolverConfig cfg;
    EigenResult r = eigensolve(one, 1, cfg);
    REQUIRE(r.converged);
    CHECK(r.eigenvalues[0] == doctest::Approx(4.0 / 0.25).epsilon(1e-12));
}

TEST_CASE("eigensolve preconditions") {
    GridSpec g = grid2(4, 4, 0.5);
    DomainMask two(g);
    two.set(g.index_of(0, 0), true);
    two.set(g.index_of(1, 0), true);
    SolverConfig cfg;
    CHECK_THROWS_AS(eigensolve(DomainMask(g), 1, cfg), std::invalid_argument);
    CHECK_THROWS_AS(eigensolve(two, 0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(eigensolve(two, 3, cfg), std::invalid_argument);
}

TEST_CASE("eigensolve matches rectangle closed forms to 1e-10") {
    SolverConfig cfg;
    cfg.tolerance = 1e-12;
    cfg.max_iterations = 3000;
    GridSpec g = grid2(20, 20, 1.0 / 16.0);
    for (auto [N, M] : {std::pair{1, 1}, {4, 3}, {7, 7}, {16, 5}, {16, 16}}) {
        DomainMask mask = oracle::rectangle_mask(g, 1, 1, N, M);
        const int k = std::min(4, N * M);
        EigenResult r = eigensolve(mask, k, cfg);
        REQUIRE(r.converged);
        std::vector<double> exact = oracle::rectangle_spectrum(N, M, g.h, k);
        for (int j = 0; j < k; ++j)
            CHECK(std::abs(r.eigenvalues[j] - exact[j]) <= 1e-10 * exact[j]);
    }
}

TEST_CASE("eigensolve: unit square interior at h=1/64 is within 0.5% of 2*pi^2") {
    // The node-style unit square at spacing h has (1/h - 1)^2 interior
    // cells, so its effective Dirichlet box is exactly the unit square.
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    const int n = 63;
    GridSpec g = grid2(n + 2, n + 2, 1.0 / 64.0);
    DomainMask mask = oracle::rectangle_mask(g, 1, 1, n, n);
    EigenResult r = eigensolve(mask, 1, cfg);
    REQUIRE(r.converged);
    const double continuum = 2.0 * M_PI * M_PI;
    CHECK(std::abs(r.eigenvalues[0] - continuum) < 0.005 * continuum);
    CHECK(r.eigenvalues[0] ==
          doctest::Approx(oracle::rectangle_eigenvalue(1, 1, n, n, g.h)).epsilon(1e-10));
}

TEST_CASE("eigensolve: rasterized disk of area pi is within 2% of the Bessel value") {
    SolverConfig cfg;
    cfg.tolerance = 1e-9;
    GridSpec g(2, {160, 160, 1}, {-1.25, -1.25, 0.0}, 1.0 / 64.0);
    DomainMask disk = oracle::disk_mask(g, 0.0, 0.0, 1.0);
    EigenResult r = eigensolve(disk, 1, cfg);
    REQUIRE(r.converged);
    const double bessel = 5.783185962946785;  // j_{0,1}^2
    CHECK(std::abs(r.eigenvalues[0] - bessel) < 0.02 * bessel);

    // Ground state of a connected mask is strictly positive.
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        if (disk.test(idx)) CHECK(r.eigenfunctions[0][idx] > 0.0);
}

TEST_CASE("eigensolve: orthonormality, Rayleigh consistency, residual contract") {
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    cfg.max_iterations = 3000;
    GridSpec g = grid2(30, 24, 1.0 / 24.0);
    DomainMask mask = oracle::rectangle_mask(g, 2, 2, 26, 20);
    const int k = 5;
    EigenResult r = eigensolve(mask, k, cfg);
    REQUIRE(r.converged);
    for (int j = 0; j < k; ++j) {
        CHECK(r.residuals[j] <= cfg.tolerance);
        if (j > 0) CHECK(r.eigenvalues[j] >= r.eigenvalues[j - 1]);
        // L2 normalization
        CHECK(l2_norm(r.eigenfunctions[j]) == doctest::Approx(1.0).epsilon(1e-8));
        // Rayleigh quotient agrees with the reported eigenvalue
        ScalarField au = apply_laplacian(r.eigenfunctions[j], mask);
        double quad = 0.0;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
            quad += au[idx] * r.eigenfunctions[j][idx];
        quad *= g.cell_volume();
        CHECK(std::abs(quad - r.eigenvalues[j]) <= 10.0 * cfg.tolerance * r.eigenvalues[j]);
        for (int i = 0; i < j; ++i) {
            double ip = 0.0;
            for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
                ip += r.eigenfunctions[i][idx] * r.eigenfunctions[j][idx];
            ip *= g.cell_volume();
            CHECK(std::abs(ip) <= 10.0 * cfg.tolerance);
        }
    }
}

TEST_CASE("eigensolve on small masks agrees with a dense Jacobi oracle") {
    // Dense reference: assemble the operator brutally and diagonalize via
    // the torsion oracle's assembly plus power-style checks through the
    // closed-form-free path (random small masks, possibly disconnected).
    std::mt19937_64 rng(41);
    SolverConfig cfg;
    cfg.tolerance = 1e-11;
    cfg.max_iterations = 3000;
    GridSpec g = grid2(8, 8, 0.2);
    for (int trial = 0; trial < 6; ++trial) {
        DomainMask m = oracle::random_blob(g, rng, 2);
        const int k = int(std::min<std::int64_t>(3, m.count()));
        EigenResult r = eigensolve(m, k, cfg);
        REQUIRE(r.converged);
        // Reference eigenvalues by inverse-free dense assembly + Jacobi from
        // the library's dense helper applied to an independently built matrix.
        std::vector<std::int64_t> cells;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
            if (m.test(idx)) cells.push_back(idx);
        const int n = int(cells.size());
        std::vector<double> a(std::size_t(n) * n, 0.0);
        for (int rrow = 0; rrow < n; ++rrow) {
            auto c = g.coords_of(cells[rrow]);
            a[std::size_t(rrow) * n + rrow] = 4.0 / (g.h * g.h);
            for (int ax = 0; ax < 2; ++ax)
                for (int s = -1; s <= 1; s += 2) {
                    std::array<int, 3> nc = c;
                    nc[ax] += s;
                    if (!g.contains(nc[0], nc[1], nc[2])) continue;
                    auto it = std::find(cells.begin(), cells.end(), g.index_of(nc[0], nc[1], nc[2]));
                    if (it != cells.end())
                        a[std::size_t(rrow) * n + (it - cells.begin())] = -1.0 / (g.h * g.h);
                }
        }
        // power iteration on the inverse is overkill here; bisect via dense
        // characteristic scan is too; use plain cyclic Jacobi written inline.
        // (kept deliberately separate from eigenshape::jacobi_eigh)
        std::vector<double> evals;
        {
            auto A = a;
            for (int sweep = 0; sweep < 100; ++sweep) {
                double off = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) off += A[std::size_t(i) * n + j] * A[std::size_t(i) * n + j];
                if (off < 1e-22) break;
                for (int p = 0; p < n - 1; ++p)
                    for (int q = p + 1; q < n; ++q) {
                        const double apq = A[std::size_t(p) * n + q];
                        if (std::abs(apq) < 1e-300) continue;
                        const double theta =
                            (A[std::size_t(q) * n + q] - A[std::size_t(p) * n + p]) / (2 * apq);
                        const double t = (theta >= 0 ? 1.0 : -1.0) /
                                         (std::abs(theta) + std::sqrt(theta * theta + 1));
                        const double cc = 1.0 / std::sqrt(t * t + 1), ss = t * cc;
                        for (int i = 0; i < n; ++i) {
                            const double aip = A[std::size_t(i) * n + p], aiq = A[std::size_t(i) * n + q];
                            A[std::size_t(i) * n + p] = cc * aip - ss * aiq;
                            A[std::size_t(i) * n + q] = ss * aip + cc * aiq;
                        }
                        for (int j = 0; j < n; ++j) {
                            const double apj = A[std::size_t(p) * n + j], aqj = A[std::size_t(q) * n + j];
                            A[std::size_t(p) * n + j] = cc * apj - ss * aqj;
                            A[std::size_t(q) * n + j] = ss * apj + cc * aqj;
                        }
                    }
            }
            for (int i = 0; i < n; ++i) evals.push_back(A[std::size_t(i) * n + i]);
            std::sort(evals.begin(), evals.end());
        }
        for (int j = 0; j < k; ++j)
            CHECK(std::abs(r.eigenvalues[j] - evals[j]) <= 1e-8 * evals[j]);
    }
}

TEST_CASE("eigenvalue monotonicity under domain inclusion") {
    std::mt19937_64 rng(53);
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    cfg.max_iterations = 3000;
    GridSpec g = grid2(20, 20, 1.0 / 20.0);
    for (int trial = 0; trial < 8; ++trial) {
        auto [inner, outer] = oracle::random_nested_pair(g, rng);
        EigenResult ri = eigensolve(inner, 1, cfg);
        EigenResult ro = eigensolve(outer, 1, cfg);
        REQUIRE(ri.converged);
        REQUIRE(ro.converged);
        CHECK(ri.eigenvalues[0] >= ro.eigenvalues[0] - 10.0 * cfg.tolerance * ro.eigenvalues[0]);
    }
}

TEST_CASE("spectrum of a disjoint union merges the component spectra") {
    SolverConfig cfg;
    cfg.tolerance = 1e-11;
    cfg.max_iterations = 3000;
    GridSpec g = grid2(24, 12, 0.1);
    DomainMask a = oracle::rectangle_mask(g, 1, 2, 6, 5);
    DomainMask b = oracle::rectangle_mask(g, 12, 3, 9, 4);
    DomainMask uni = mask_union(a, b);
    const int k = 4;
    EigenResult r = eigensolve(uni, k, cfg);
    REQUIRE(r.converged);
    std::vector<double> merged;
    for (double v : oracle::rectangle_spectrum(6, 5, g.h, 4)) merged.push_back(v);
    for (double v : oracle::rectangle_spectrum(9, 4, g.h, 4)) merged.push_back(v);
    std::sort(merged.begin(), merged.end());
    for (int j = 0; j < k; ++j)
        CHECK(std::abs(r.eigenvalues[j] - merged[j]) <= 1e-9 * merged[j]);
}

TEST_CASE("refinement study: Richardson extrapolation hits the continuum value") {
    SolverConfig cfg;
    cfg.tolerance = 1e-11;
    cfg.max_iterations = 6000;
    // Unit rectangle (0,1)x(0,0.5), node convention at two spacings.
    auto lambda_at = [&](int inv_h) {
        const int N = inv_h - 1, M = inv_h / 2 - 1;
        GridSpec g = grid2(N + 2, M + 2, 1.0 / inv_h);
        DomainMask mask = oracle::rectangle_mask(g, 1, 1, N, M);
        EigenResult r = eigensolve(mask, 1, cfg);
        REQUIRE(r.converged);
        return r.eigenvalues[0];
    };
    const double l1 = lambda_at(32);
    const double l2 = lambda_at(64);
    const double continuum = M_PI * M_PI * 5.0;  // pi^2 (1 + 4)
    const double err1 = std::abs(l1 - continuum);
    const double err2 = std::abs(l2 - continuum);
    CHECK(err2 < err1 / 3.2);  // O(h^2)
    const double richardson = (4.0 * l2 - l1) / 3.0;
    CHECK(std::abs(richardson - continuum) < err2 / 50.0);  // O(h^4)
}

TEST_CASE("eigensolve is deterministic for a fixed seed") {
    SolverConfig cfg;
    cfg.tolerance = 1e-9;
    cfg.seed = 77;
    GridSpec g = grid2(20, 20, 0.05);
    DomainMask m = oracle::rectangle_mask(g, 3, 4, 13, 11);
    EigenResult r1 = eigensolve(m, 2, cfg);
    EigenResult r2 = eigensolve(m, 2, cfg);
    CHECK(r1.eigenvalues[0] == r2.eigenvalues[0]);
    CHECK(r1.eigenvalues[1] == r2.eigenvalues[1]);
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        CHECK(r1.eigenfunctions[0][idx] == r2.eigenfunctions[0][idx]);
}

TEST_CASE("eigensolve reports non-convergence with residuals") {
    GridSpec g(2, {96, 96, 1}, {-1.5, -1.5, 0.0}, 1.0 / 32.0);
    DomainMask disk = oracle::disk_mask(g, 0.0, 0.0, 1.2);
    SolverConfig cfg;
    cfg.tolerance = 1e-13;
    cfg.max_iterations = 2;  // strangle the inner solves
    EigenResult r = eigensolve(disk, 1, cfg);
    CHECK(!r.converged);
    CHECK(r.residuals[0] > cfg.tolerance);
}
