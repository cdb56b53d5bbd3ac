#include "eigenshape/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "eigenshape/dense.hpp"

namespace eigenshape {

void SolverConfig::validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be > 0");
    if (max_iterations < 0) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
}

int SolverConfig::linear_iteration_budget(std::int64_t active_cells) const {
    if (max_iterations > 0) return max_iterations;
    return std::max<int>(50, int(10.0 * std::sqrt(double(active_cells))));
}

namespace {

// Compact view of the true cells of a mask with precomputed in-mask
// neighbor links; the stencil only ever touches active cells.
struct ActiveSet {
    int dim;
    int n = 0;
    int n_dirs;
    double inv_h2;
    std::vector<std::int64_t> cells;       // compact -> grid index, ascending
    std::vector<std::int32_t> neighbors;   // n * 2dim, -1 where absent

    explicit ActiveSet(const DomainMask& mask) {
        const GridSpec& g = mask.grid();
        dim = g.dim;
        n_dirs = 2 * dim;
        inv_h2 = 1.0 / (g.h * g.h);
        cells.reserve(static_cast<std::size_t>(mask.count()));
        std::vector<std::int32_t> compact_of(static_cast<std::size_t>(g.total_cells()), -1);
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            if (!mask.test(idx)) continue;
            compact_of[static_cast<std::size_t>(idx)] = n++;
            cells.push_back(idx);
        }
        neighbors.assign(static_cast<std::size_t>(n) * n_dirs, -1);
        for (int i = 0; i < n; ++i) {
            auto c = g.coords_of(cells[static_cast<std::size_t>(i)]);
            int slot = 0;
            for (int a = 0; a < dim; ++a) {
                for (int s = -1; s <= 1; s += 2, ++slot) {
                    std::array<int, 3> nc = c;
                    nc[a] += s;
                    if (!g.contains(nc[0], nc[1], nc[2])) continue;
                    neighbors[static_cast<std::size_t>(i) * n_dirs + slot] =
                        compact_of[static_cast<std::size_t>(g.index_of(nc[0], nc[1], nc[2]))];
                }
            }
        }
    }

    // y = A x with A the Dirichlet stencil restricted to active cells.
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const double diag = double(n_dirs);
        for (int i = 0; i < n; ++i) {
            double acc = diag * x[static_cast<std::size_t>(i)];
            const std::int32_t* nb = &neighbors[static_cast<std::size_t>(i) * n_dirs];
            for (int s = 0; s < n_dirs; ++s)
                if (nb[s] >= 0) acc -= x[static_cast<std::size_t>(nb[s])];
            y[static_cast<std::size_t>(i)] = acc * inv_h2;
        }
    }

    std::vector<double> gather(const ScalarField& f) const {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            x[static_cast<std::size_t>(i)] = f[cells[static_cast<std::size_t>(i)]];
        return x;
    }

    ScalarField scatter(const std::vector<double>& x, const DomainMask& mask) const {
        ScalarField f(mask);
        for (int i = 0; i < n; ++i)
            f[cells[static_cast<std::size_t>(i)]] = x[static_cast<std::size_t>(i)];
        return f;
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

struct CgOutcome {
    int iterations = 0;
    double rel_residual = 0.0;
};

// Plain CG on the SPD stencil operator; y carries the start vector.
CgOutcome cg_solve(const ActiveSet& op, const std::vector<double>& b, std::vector<double>& y,
                   double rel_tol, int max_iter) {
    const std::size_t n = b.size();
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        std::fill(y.begin(), y.end(), 0.0);
        return {0, 0.0};
    }
    std::vector<double> r(n), p(n), ap(n);
    op.apply(y, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    p = r;
    double rr = dot(r, r);
    CgOutcome out;
    out.rel_residual = std::sqrt(rr) / bnorm;
    const double target = rel_tol * bnorm;
    for (int it = 0; it < max_iter && std::sqrt(rr) > target; ++it) {
        op.apply(p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0) break;  // loss of positive definiteness in floats
        const double alpha = rr / pap;
        axpy(alpha, p, y);
        axpy(-alpha, ap, r);
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        out.iterations = it + 1;
        out.rel_residual = std::sqrt(rr) / bnorm;
    }
    return out;
}

void fill_random(std::vector<double>& x, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : x) v = dist(rng);
}

// Two-pass modified Gram-Schmidt over the columns; degenerate columns are
// refreshed from the seeded stream so the block keeps full rank.
void orthonormalize(std::vector<std::vector<double>>& cols, std::uint64_t seed) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < j; ++i) axpy(-dot(cols[i], cols[j]), cols[i], cols[j]);
        double nj = norm(cols[j]);
        int refresh = 0;
        while (nj < 1e-12 && refresh < 8) {
            fill_random(cols[j], seed + 0x517cc1b727220a95ULL * (j + 1) + refresh);
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t i = 0; i < j; ++i) axpy(-dot(cols[i], cols[j]), cols[i], cols[j]);
            nj = norm(cols[j]);
            ++refresh;
        }
        const double inv = 1.0 / nj;
        for (double& v : cols[j]) v *= inv;
    }
}

}  // namespace

ScalarField apply_laplacian(const ScalarField& field, const DomainMask& mask) {
    if (field.grid != mask.grid()) throw std::invalid_argument("apply_laplacian: grid mismatch");
    if (!field.support.is_subset_of(mask))
        throw std::invalid_argument("apply_laplacian: field support exceeds mask");
    const GridSpec& g = mask.grid();
    ScalarField out(mask);
    const double inv_h2 = 1.0 / (g.h * g.h);
    const double diag = 2.0 * g.dim;
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
        if (!mask.test(idx)) continue;
        auto c = g.coords_of(idx);
        double acc = diag * field[idx];
        for (int a = 0; a < g.dim; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                std::array<int, 3> nc = c;
                nc[a] += s;
                if (!g.contains(nc[0], nc[1], nc[2])) continue;
                const std::int64_t nidx = g.index_of(nc[0], nc[1], nc[2]);
                if (mask.test(nidx)) acc -= field[nidx];
            }
        }
        out[idx] = acc * inv_h2;
    }
    return out;
}

TorsionResult solve_torsion(const DomainMask& mask, const SolverConfig& cfg,
                            const ScalarField* warm_start) {
    cfg.validate();
    if (mask.empty()) throw std::invalid_argument("solve_torsion: empty mask");
    ActiveSet op(mask);
    std::vector<double> b(static_cast<std::size_t>(op.n), 1.0);
    std::vector<double> y(static_cast<std::size_t>(op.n), 0.0);
    if (warm_start) {
        if (warm_start->grid != mask.grid())
            throw std::invalid_argument("solve_torsion: warm start grid mismatch");
        for (int i = 0; i < op.n; ++i)
            y[static_cast<std::size_t>(i)] = (*warm_start)[op.cells[static_cast<std::size_t>(i)]];
    }
    CgOutcome cg = cg_solve(op, b, y, cfg.tolerance, cfg.linear_iteration_budget(op.n));
    TorsionResult res;
    res.w = op.scatter(y, mask);
    res.residual = cg.rel_residual;
    res.iterations = cg.iterations;
    res.converged = cg.rel_residual <= cfg.tolerance;
    return res;
}

EigenResult eigensolve(const DomainMask& mask, int k, const SolverConfig& cfg,
                       const EigenResult* warm_start) {
    cfg.validate();
    if (mask.empty()) throw std::invalid_argument("eigensolve: empty mask");
    if (k < 1) throw std::invalid_argument("eigensolve: k must be >= 1");
    if (k > mask.count()) throw std::invalid_argument("eigensolve: k exceeds the cell count");

    const GridSpec& g = mask.grid();
    ActiveSet op(mask);
    const int n = op.n;
    const int block = int(std::min<std::int64_t>(std::max(k + 2, 3), n));
    const int inner_budget = cfg.linear_iteration_budget(n);

    std::vector<std::vector<double>> X(static_cast<std::size_t>(block)),
        Y(static_cast<std::size_t>(block)), AY(static_cast<std::size_t>(block));
    for (int j = 0; j < block; ++j) {
        X[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(n), 0.0);
        Y[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(n), 0.0);
        AY[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(n), 0.0);
    }
    int warm_cols = 0;
    if (warm_start && !warm_start->eigenfunctions.empty() &&
        warm_start->eigenfunctions[0].grid == g) {
        warm_cols = int(std::min<std::size_t>(warm_start->eigenfunctions.size(),
                                              static_cast<std::size_t>(block)));
        for (int j = 0; j < warm_cols; ++j)
            for (int i = 0; i < n; ++i)
                X[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                    warm_start->eigenfunctions[static_cast<std::size_t>(j)]
                                              [op.cells[static_cast<std::size_t>(i)]];
    }
    for (int j = warm_cols; j < block; ++j)
        fill_random(X[static_cast<std::size_t>(j)], cfg.seed + 0x9e3779b97f4a7c15ULL * (j + 1));
    orthonormalize(X, cfg.seed);

    EigenResult res;
    res.k = k;
    res.eigenvalues.assign(static_cast<std::size_t>(k), 0.0);
    res.residuals.assign(static_cast<std::size_t>(k), 1.0);

    std::vector<double> H, theta, Q, tmp(static_cast<std::size_t>(n));
    double inner_tol = std::min(1e-2, std::max(cfg.tolerance, 1e-10));
    const int max_outer = 400;
    double worst = 1.0;
    double best_worst = 1e300;
    int flat_outers = 0;
    for (int outer = 0; outer < max_outer; ++outer) {
        res.outer_iterations = outer + 1;
        for (int j = 0; j < block; ++j) {
            if (outer == 0) Y[static_cast<std::size_t>(j)] = X[static_cast<std::size_t>(j)];
            cg_solve(op, X[static_cast<std::size_t>(j)], Y[static_cast<std::size_t>(j)], inner_tol,
                     inner_budget);
        }
        orthonormalize(Y, cfg.seed + 0x2545f4914f6cdd1dULL * (outer + 1));
        for (int j = 0; j < block; ++j)
            op.apply(Y[static_cast<std::size_t>(j)], AY[static_cast<std::size_t>(j)]);
        H.assign(static_cast<std::size_t>(block) * block, 0.0);
        for (int i = 0; i < block; ++i)
            for (int j = i; j < block; ++j) {
                const double v = dot(Y[static_cast<std::size_t>(i)], AY[static_cast<std::size_t>(j)]);
                H[std::size_t(i) * block + j] = v;
                H[std::size_t(j) * block + i] = v;
            }
        jacobi_eigh(H, block, theta, Q);

        // Rotate Y and AY into the Ritz basis.
        std::vector<std::vector<double>> Xn(static_cast<std::size_t>(block)),
            AXn(static_cast<std::size_t>(block));
        for (int j = 0; j < block; ++j) {
            Xn[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(n), 0.0);
            AXn[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(n), 0.0);
            for (int i = 0; i < block; ++i) {
                const double q = Q[std::size_t(i) * block + j];
                if (q == 0.0) continue;
                axpy(q, Y[static_cast<std::size_t>(i)], Xn[static_cast<std::size_t>(j)]);
                axpy(q, AY[static_cast<std::size_t>(i)], AXn[static_cast<std::size_t>(j)]);
            }
        }

        worst = 0.0;
        for (int j = 0; j < k; ++j) {
            tmp = AXn[static_cast<std::size_t>(j)];
            axpy(-theta[static_cast<std::size_t>(j)], Xn[static_cast<std::size_t>(j)], tmp);
            const double denom = std::max(std::abs(theta[static_cast<std::size_t>(j)]), 1e-300);
            res.residuals[static_cast<std::size_t>(j)] = norm(tmp) / denom;
            worst = std::max(worst, res.residuals[static_cast<std::size_t>(j)]);
            res.eigenvalues[static_cast<std::size_t>(j)] = theta[static_cast<std::size_t>(j)];
        }
        X = std::move(Xn);
        if (worst <= cfg.tolerance) {
            res.converged = true;
            break;
        }
        // Roundoff floor: residuals that stop improving will not recover.
        if (worst > 0.9 * best_worst) {
            if (++flat_outers >= 10) break;
        } else {
            flat_outers = 0;
        }
        best_worst = std::min(best_worst, worst);
        inner_tol = std::clamp(0.1 * worst, 0.01 * cfg.tolerance, 1e-2);
        inner_tol = std::max(inner_tol, 1e-14);
    }

    const double l2_scale = std::pow(g.h, -0.5 * g.dim);  // unit l2 -> unit L2
    res.eigenfunctions.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        auto& col = X[static_cast<std::size_t>(j)];
        double s = 0.0;
        for (double v : col) s += v;
        const double sign = (s < 0.0) ? -1.0 : 1.0;
        for (double& v : col) v *= sign * l2_scale;
        res.eigenfunctions.push_back(op.scatter(col, mask));
    }
    return res;
}

}  // namespace eigenshape
