#include "eigenshape/gamma.hpp"

#include <cmath>
#include <stdexcept>

namespace eigenshape {

GammaDistanceReport gamma_distance(const DomainMask& a, const DomainMask& b,
                                   const SolverConfig& cfg) {
    if (a.grid() != b.grid()) throw std::invalid_argument("gamma_distance: grid mismatch");
    const GridSpec& g = a.grid();
    GammaDistanceReport rep;
    rep.h = g.h;

    ScalarField wa, wb;
    if (!a.empty()) {
        TorsionResult ra = solve_torsion(a, cfg);
        rep.residual_a = ra.residual;
        rep.converged = rep.converged && ra.converged;
        wa = std::move(ra.w);
    } else {
        wa = ScalarField(a);
    }
    if (!b.empty()) {
        TorsionResult rb = solve_torsion(b, cfg);
        rep.residual_b = rb.residual;
        rep.converged = rep.converged && rb.converged;
        wb = std::move(rb.w);
    } else {
        wb = ScalarField(b);
    }

    double s = 0.0;
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
        const double d = wa[idx] - wb[idx];
        s += d * d;
    }
    rep.value = std::sqrt(s * g.cell_volume());
    return rep;
}

double energy(const DomainMask& mask, const SolverConfig& cfg) {
    if (mask.empty()) throw std::invalid_argument("energy: empty mask");
    TorsionResult r = solve_torsion(mask, cfg);
    if (!r.converged)
        throw std::runtime_error("energy: torsion solve exhausted its budget (residual " +
                                 std::to_string(r.residual) + ")");
    const GridSpec& g = mask.grid();
    double s = 0.0;
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) s += r.w[idx];
    return -s * g.cell_volume();
}

DomainMask closed_neighborhood(const DomainMask& d) { return dilate(d, 1); }

std::vector<CoareaPoint> coarea_check(const ScalarField& u, const DomainMask& mask,
                                      const DomainMask& dbar,
                                      const std::vector<double>& epsilons) {
    const GridSpec& g = mask.grid();
    if (u.grid != g || dbar.grid() != g) throw std::invalid_argument("coarea_check: grid mismatch");
    const double umax = u.max_value();
    for (double eps : epsilons)
        if (!(eps > 0.0) || eps >= umax)
            throw std::invalid_argument("coarea_check: epsilon must lie in (0, max(u))");

    std::vector<CoareaPoint> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons) {
        double total = 0.0;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            const double v = u[idx];
            if (!(v > 0.0) || v > eps) continue;
            if (dbar.test(idx)) continue;
            auto c = g.coords_of(idx);
            double grad2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                std::array<int, 3> nc = c;
                nc[a] += 1;
                const double fwd =
                    g.contains(nc[0], nc[1], nc[2]) ? u[g.index_of(nc[0], nc[1], nc[2])] : 0.0;
                const double diff = (fwd - v) / g.h;
                grad2 += diff * diff;
            }
            total += std::sqrt(grad2) * g.cell_volume();
        }
        out.push_back({eps, total, total / eps});
    }
    return out;
}

}  // namespace eigenshape
