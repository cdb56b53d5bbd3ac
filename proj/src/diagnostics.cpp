#include "eigenshape/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "eigenshape/geometry.hpp"

namespace eigenshape {

namespace {

// Coordinate offsets with center distance inside [lo, hi] (in length units).
std::vector<std::array<int, 3>> offsets_in_shell(const GridSpec& g, double lo, double hi) {
    std::vector<std::array<int, 3>> out;
    const int reach = int(std::ceil(hi / g.h)) + 1;
    const int zlo = g.dim == 3 ? -reach : 0;
    const int zhi = g.dim == 3 ? reach : 0;
    for (int dz = zlo; dz <= zhi; ++dz)
        for (int dy = -reach; dy <= reach; ++dy)
            for (int dx = -reach; dx <= reach; ++dx) {
                const double d = g.h * std::sqrt(double(dx) * dx + double(dy) * dy + double(dz) * dz);
                if (d >= lo && d <= hi) out.push_back({dx, dy, dz});
            }
    return out;
}

}  // namespace

LemmaReport verify_growth_lemma(const ScalarField& u, const DomainMask& mask, double C,
                                const std::vector<double>& radii) {
    const GridSpec& g = mask.grid();
    if (u.grid != g) throw std::invalid_argument("verify_growth_lemma: grid mismatch");
    LemmaReport rep;
    for (double r : radii) {
        if (r < 2.0 * g.h)
            throw std::invalid_argument("verify_growth_lemma: radii must be >= 2h");
        const auto annulus = offsets_in_shell(g, r - g.h, r);
        const auto ball = offsets_in_shell(g, 0.0, r);
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            const auto c = g.coords_of(idx);
            double sum = 0.0;
            std::int64_t n = 0;
            for (const auto& off : annulus) {
                const int x = c[0] + off[0], y = c[1] + off[1], z = c[2] + off[2];
                if (!g.contains(x, y, z)) continue;
                sum += u[g.index_of(x, y, z)];
                ++n;
            }
            if (n == 0) continue;
            const double avg = sum / double(n);
            if (!(C * r <= avg)) continue;  // premise fails
            ++rep.premises_held;
            bool ok = true;
            for (const auto& off : ball) {
                const int x = c[0] + off[0], y = c[1] + off[1], z = c[2] + off[2];
                if (!g.contains(x, y, z)) continue;
                const std::int64_t b = g.index_of(x, y, z);
                if (mask.test(b) && !(u[b] > 0.0)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) rep.violations.push_back({idx, r, avg, C * r});
        }
    }
    return rep;
}

LemmaReport verify_vanishing_lemma(const ScalarField& u, const DomainMask& mask,
                                   const DomainMask& D, double C0, double r0) {
    const GridSpec& g = mask.grid();
    if (u.grid != g || D.grid() != g)
        throw std::invalid_argument("verify_vanishing_lemma: grid mismatch");
    if (!(r0 > 2.0 * g.h)) throw std::invalid_argument("verify_vanishing_lemma: r0 must exceed 2h");

    std::vector<double> dist2 = squared_distance_transform(D);
    const double r0_cells2 = (r0 / g.h) * (r0 / g.h);

    std::vector<double> radii;
    for (double r = r0 / 2.0; r >= 2.0 * g.h; r /= 2.0) radii.push_back(r);

    LemmaReport rep;
    for (double r : radii) {
        const auto annulus = offsets_in_shell(g, r - g.h, r);
        const auto half_ball = offsets_in_shell(g, 0.0, r / 2.0);
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            if (dist2[static_cast<std::size_t>(idx)] <= r0_cells2) continue;  // too close to D
            const auto c = g.coords_of(idx);
            double sum = 0.0;
            std::int64_t n = 0;
            for (const auto& off : annulus) {
                const int x = c[0] + off[0], y = c[1] + off[1], z = c[2] + off[2];
                if (!g.contains(x, y, z)) continue;
                sum += u[g.index_of(x, y, z)];
                ++n;
            }
            if (n == 0) continue;
            const double avg = sum / double(n);
            if (!(avg <= C0 * r)) continue;  // premise fails
            ++rep.premises_held;
            bool ok = true;
            for (const auto& off : half_ball) {
                const int x = c[0] + off[0], y = c[1] + off[1], z = c[2] + off[2];
                if (!g.contains(x, y, z)) continue;
                if (u[g.index_of(x, y, z)] > 0.0) {
                    ok = false;
                    break;
                }
            }
            if (!ok) rep.violations.push_back({idx, r, avg, C0 * r});
        }
    }
    return rep;
}

std::optional<double> sweep_growth_constant(const ScalarField& u, const DomainMask& mask,
                                            const std::vector<double>& radii,
                                            const std::vector<double>& c_grid) {
    std::optional<double> best;
    for (double c : c_grid)
        if (verify_growth_lemma(u, mask, c, radii).violations.empty())
            if (!best || c > *best) best = c;
    return best;
}

std::optional<double> sweep_vanishing_constant(const ScalarField& u, const DomainMask& mask,
                                               const DomainMask& D, double r0,
                                               const std::vector<double>& c_grid) {
    std::optional<double> best;
    for (double c : c_grid)
        if (verify_vanishing_lemma(u, mask, D, c, r0).violations.empty())
            if (!best || c > *best) best = c;
    return best;
}

}  // namespace eigenshape
