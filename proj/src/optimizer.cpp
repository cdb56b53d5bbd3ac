#include "eigenshape/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "eigenshape/gamma.hpp"
#include "eigenshape/geometry.hpp"

namespace eigenshape {

void ObjectiveSpec::validate() const {
    if (k < 1 || k > 6) throw std::invalid_argument("ObjectiveSpec: k must be in [1, 6]");
}

namespace {

struct Evaluation {
    double value = 0.0;
    double residual = 0.0;
    EigenResult eigen;       // eigenvalue objectives
    ScalarField torsion_w;   // energy objective
};

Evaluation evaluate(const DomainMask& mask, const ObjectiveSpec& obj, const SolverConfig& cfg,
                    const EigenResult* warm_eigen, const ScalarField* warm_w) {
    Evaluation ev;
    if (obj.kind == ObjectiveKind::eigenvalue_k) {
        ev.eigen = eigensolve(mask, obj.k, cfg, warm_eigen);
        ev.value = ev.eigen.eigenvalues.back();
        for (double r : ev.eigen.residuals) ev.residual = std::max(ev.residual, r);
    } else {
        TorsionResult t = solve_torsion(mask, cfg, warm_w);
        double s = 0.0;
        for (std::int64_t idx = 0; idx < mask.grid().total_cells(); ++idx) s += t.w[idx];
        ev.value = -s * mask.grid().cell_volume();
        ev.residual = t.residual;
        ev.torsion_w = std::move(t.w);
    }
    return ev;
}

// Superlevel density driving the rearrangement: mean |u_j|^2 of the first k
// modes, or the torsion function for the energy objective.
struct Density {
    std::vector<double> values;
    EigenResult eigen;
    ScalarField torsion_w;
};

Density density_on(const DomainMask& mask, const ObjectiveSpec& obj, const SolverConfig& cfg,
                   const EigenResult* warm_eigen, const ScalarField* warm_w) {
    Density d;
    const std::size_t total = static_cast<std::size_t>(mask.grid().total_cells());
    d.values.assign(total, 0.0);
    if (obj.kind == ObjectiveKind::eigenvalue_k) {
        d.eigen = eigensolve(mask, obj.k, cfg, warm_eigen);
        for (const ScalarField& u : d.eigen.eigenfunctions)
            for (std::size_t i = 0; i < total; ++i) d.values[i] += u.values[i] * u.values[i];
        for (std::size_t i = 0; i < total; ++i) d.values[i] /= double(obj.k);
    } else {
        TorsionResult t = solve_torsion(mask, cfg, warm_w);
        d.values = t.w.values;
        d.torsion_w = std::move(t.w);
    }
    return d;
}

// D ∪ {density > τ} with τ picked so the cell count hits the target; ties
// among equal density values are admitted in ascending cell-index order.
DomainMask rethreshold(const DomainMask& support, const DomainMask& D,
                       const std::vector<double>& density, std::int64_t target_count) {
    const GridSpec& g = support.grid();
    DomainMask out = D;
    std::int64_t need = target_count - D.count();
    if (need <= 0) return out;
    std::vector<std::pair<double, std::int64_t>> ranked;
    ranked.reserve(static_cast<std::size_t>(support.count()));
    for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
        if (support.test(idx) && !D.test(idx))
            ranked.emplace_back(density[static_cast<std::size_t>(idx)], idx);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    need = std::min<std::int64_t>(need, std::int64_t(ranked.size()));
    for (std::int64_t i = 0; i < need; ++i) out.set(ranked[static_cast<std::size_t>(i)].second, true);
    return out;
}

// Feasible start: D face-dilated in equal rounds until the target count is
// reached, the last ring trimmed in ascending index order.
DomainMask dilated_start(const DomainMask& D, std::int64_t target_count) {
    DomainMask cur = D;
    while (cur.count() < target_count) {
        DomainMask next = dilate(cur, 1);
        if (next.count() == cur.count()) break;  // grid saturated
        if (next.count() > target_count) {
            std::int64_t excess = next.count() - target_count;
            for (std::int64_t idx = 0; idx < next.grid().total_cells() && excess > 0; ++idx) {
                if (next.test(idx) && !cur.test(idx)) {
                    next.set(idx, false);
                    --excess;
                }
            }
        }
        cur = std::move(next);
    }
    return cur;
}

// Brings a warm-start mask to the target count: grow by dilation rounds,
// shrink by dropping the non-D cells farthest from D.
DomainMask resize_to_count(const DomainMask& mask, const DomainMask& D, std::int64_t target_count) {
    DomainMask cur = mask_union(mask, D);
    if (cur.count() < target_count) return dilated_start(cur, target_count);
    if (cur.count() > target_count) {
        std::vector<double> d2 = squared_distance_transform(D);
        std::vector<std::pair<double, std::int64_t>> ranked;
        for (std::int64_t idx = 0; idx < cur.grid().total_cells(); ++idx)
            if (cur.test(idx) && !D.test(idx)) ranked.emplace_back(d2[static_cast<std::size_t>(idx)], idx);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second < b.second);
        });
        std::int64_t excess = cur.count() - target_count;
        for (std::int64_t i = 0; i < excess; ++i)
            cur.set(ranked[static_cast<std::size_t>(i)].second, false);
    }
    return cur;
}

std::uint64_t mask_hash(const DomainMask& mask) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : mask.raw()) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::int64_t symmetric_difference_count(const DomainMask& a, const DomainMask& b) {
    std::int64_t n = 0;
    for (std::int64_t idx = 0; idx < a.grid().total_cells(); ++idx)
        if (a.test(idx) != b.test(idx)) ++n;
    return n;
}

}  // namespace

ConstrainedResult optimize_constrained(const ConstrainedProblem& p, const SolverConfig& cfg,
                                       int max_outer, const DomainMask* init) {
    cfg.validate();
    p.objective.validate();
    if (p.D.empty()) throw std::invalid_argument("optimize_constrained: D is empty");
    const GridSpec& g = p.D.grid();
    const double cell = g.cell_volume();
    if (p.m < p.D.measure() - 0.5 * cell)
        throw std::invalid_argument("optimize_constrained: target measure below measure(D)");
    const std::int64_t target =
        std::max<std::int64_t>(p.D.count(), std::llround(p.m / cell));
    if (std::int64_t(target) > g.total_cells())
        throw std::invalid_argument("optimize_constrained: target measure exceeds the grid");

    ConstrainedResult res;
    res.trace.status = OptimizeStatus::budget_exhausted;

    // Degenerate budget: D is the only feasible point.
    if (target == p.D.count()) {
        Evaluation ev = evaluate(p.D, p.objective, cfg, nullptr, nullptr);
        res.mask = p.D;
        res.objective = ev.value;
        res.eigen = std::move(ev.eigen);
        res.trace.entries.push_back({0, res.objective, p.D.measure(), 0, ev.residual,
                                     touches_boundary(p.D)});
        res.trace.entries.push_back({1, res.objective, p.D.measure(), 0, ev.residual,
                                     touches_boundary(p.D)});
        res.trace.status = OptimizeStatus::converged;
        res.trace.best_iteration = 1;
        return res;
    }

    DomainMask omega = init ? resize_to_count(*init, p.D, target) : dilated_start(p.D, target);
    Evaluation cur_ev = evaluate(omega, p.objective, cfg, nullptr, nullptr);
    res.trace.entries.push_back(
        {0, cur_ev.value, omega.measure(), 0, cur_ev.residual, touches_boundary(omega)});

    DomainMask best = omega;
    Evaluation best_ev = cur_ev;
    int best_iter = 0;

    std::set<std::uint64_t> seen;
    seen.insert(mask_hash(omega));

    EigenResult dil_eigen;        // warm-start chain for the dilated solves
    ScalarField dil_w;
    bool have_density = false;
    int stall = 0;

    // Working margin around the iterate: a Euclidean collar keeps the
    // rethreshold free of the lattice anisotropy a face dilation would
    // imprint on every step.
    const double margin = 3.0 * g.h;

    int t = 1;
    for (; t <= max_outer; ++t) {
        DomainMask dil = dilate_euclidean(omega, margin);
        Density den = density_on(dil, p.objective, cfg, have_density ? &dil_eigen : &cur_ev.eigen,
                                 have_density ? &dil_w : &cur_ev.torsion_w);
        if (p.objective.kind == ObjectiveKind::eigenvalue_k) dil_eigen = std::move(den.eigen);
        else dil_w = std::move(den.torsion_w);
        have_density = true;

        DomainMask cand = rethreshold(dil, p.D, den.values, target);
        const std::int64_t flips = symmetric_difference_count(cand, omega);
        if (flips == 0) {
            res.trace.entries.push_back({t, cur_ev.value, omega.measure(), 0, cur_ev.residual,
                                         touches_boundary(omega)});
            res.trace.status = OptimizeStatus::converged;
            break;
        }

        Evaluation cand_ev = evaluate(cand, p.objective, cfg,
                                      p.objective.kind == ObjectiveKind::eigenvalue_k ? &dil_eigen
                                                                                      : nullptr,
                                      p.objective.kind == ObjectiveKind::energy ? &dil_w : nullptr);
        res.trace.entries.push_back({t, cand_ev.value, cand.measure(), flips, cand_ev.residual,
                                     touches_boundary(cand)});

        const bool significant =
            cand_ev.value < best_ev.value - cfg.tolerance * std::abs(best_ev.value);
        if (cand_ev.value < best_ev.value) {
            best = cand;
            best_ev = cand_ev;
            best_iter = t;
        }
        stall = significant ? 0 : stall + 1;

        omega = std::move(cand);
        cur_ev = std::move(cand_ev);

        const std::uint64_t h = mask_hash(omega);
        if (seen.count(h)) {  // deterministic cycle; the best iterate is settled
            res.trace.status = OptimizeStatus::converged;
            ++t;
            break;
        }
        seen.insert(h);
        if (stall >= 3) {
            res.trace.status = OptimizeStatus::converged;
            ++t;
            break;
        }
    }

    // Greedy stabilization from the best iterate: accept only strict
    // improvements so that rerunning from the returned mask is a fixed point.
    for (int extra = 0; extra < 20; ++extra) {
        DomainMask dil = dilate_euclidean(best, margin);
        Density den = density_on(dil, p.objective, cfg,
                                 p.objective.kind == ObjectiveKind::eigenvalue_k ? &best_ev.eigen
                                                                                 : nullptr,
                                 p.objective.kind == ObjectiveKind::energy ? &best_ev.torsion_w
                                                                           : nullptr);
        DomainMask cand = rethreshold(dil, p.D, den.values, target);
        if (cand.same_cells(best)) break;
        Evaluation cand_ev = evaluate(cand, p.objective, cfg,
                                      p.objective.kind == ObjectiveKind::eigenvalue_k ? &den.eigen
                                                                                      : nullptr,
                                      p.objective.kind == ObjectiveKind::energy ? &den.torsion_w
                                                                                : nullptr);
        if (!(cand_ev.value < best_ev.value)) break;
        ++t;
        res.trace.entries.push_back({t, cand_ev.value, cand.measure(),
                                     symmetric_difference_count(cand, best), cand_ev.residual,
                                     touches_boundary(cand)});
        best = std::move(cand);
        best_ev = std::move(cand_ev);
        best_iter = t;
    }

    res.mask = best;
    res.objective = best_ev.value;
    res.eigen = std::move(best_ev.eigen);
    res.trace.best_iteration = best_iter;

    if (touches_boundary(res.mask))
        throw std::runtime_error(
            "optimize_constrained: optimal mask touches the grid boundary; the bounding box is "
            "too small for this problem");
    return res;
}

namespace {

struct ProbeCache {
    std::map<std::int64_t, PenalizedProbe> by_count;
    std::map<std::int64_t, ConstrainedResult> results;

    const DomainMask* nearest_mask(std::int64_t count) const {
        const ConstrainedResult* best = nullptr;
        std::int64_t best_gap = 0;
        for (const auto& [c, r] : results) {
            const std::int64_t gap = std::abs(c - count);
            if (!best || gap < best_gap) {
                best = &r;
                best_gap = gap;
            }
        }
        return best ? &best->mask : nullptr;
    }
};

// `warm` seeds the constrained run from the nearest already-solved budget.
// Only safe once the bracket scan has pinned a single basin: a warm start
// from the wrong side of a dichotomy would drag the iterate across.
const PenalizedProbe& probe_measure(const PenalizedProblem& p, const SolverConfig& cfg,
                                    int max_outer, double m, ProbeCache& cache, bool warm) {
    const double cell = p.D.grid().cell_volume();
    const std::int64_t count = std::max<std::int64_t>(p.D.count(), std::llround(m / cell));
    auto it = cache.by_count.find(count);
    if (it != cache.by_count.end()) return it->second;

    PenalizedProbe probe;
    probe.m = double(count) * cell;
    try {
        ConstrainedProblem cp{p.D, probe.m, p.objective};
        const DomainMask* init = warm ? cache.nearest_mask(count) : nullptr;
        ConstrainedResult r = optimize_constrained(cp, cfg, max_outer, init);
        probe.objective_value = r.objective;
        probe.penalized_value = r.objective + p.lambda * r.mask.measure();
        probe.feasible = true;
        cache.results.emplace(count, std::move(r));
    } catch (const std::runtime_error&) {  // boundary touch: infeasible at this budget
        probe.objective_value = std::numeric_limits<double>::infinity();
        probe.penalized_value = std::numeric_limits<double>::infinity();
        probe.feasible = false;
    }
    return cache.by_count.emplace(count, probe).first->second;
}

}  // namespace

PenalizedResult optimize_penalized(const PenalizedProblem& p, const SolverConfig& cfg,
                                   double m_max, int max_outer) {
    cfg.validate();
    p.objective.validate();
    if (!(p.lambda > 0.0)) throw std::invalid_argument("optimize_penalized: lambda must be > 0");
    if (p.D.empty()) throw std::invalid_argument("optimize_penalized: D is empty");
    if (!(m_max > p.D.measure()))
        throw std::invalid_argument("optimize_penalized: m_max must exceed measure(D)");
    if (p.objective.kind == ObjectiveKind::eigenvalue_k && p.objective.k != 1)
        throw std::invalid_argument("optimize_penalized: eigenvalue objective supports k = 1");

    const double cell = p.D.grid().cell_volume();
    const double lo = p.D.measure();
    ProbeCache cache;

    // Coarse bracket scan guards against the two-basin profiles that the
    // dichotomy constraints produce; golden section then refines one basin.
    const int scan_points = 7;
    double best_m = lo;
    double best_val = probe_measure(p, cfg, max_outer, lo, cache, false).penalized_value;
    for (int i = 1; i < scan_points; ++i) {
        const double m = lo + (m_max - lo) * double(i) / double(scan_points - 1);
        const double v = probe_measure(p, cfg, max_outer, m, cache, false).penalized_value;
        if (v < best_val) {
            best_val = v;
            best_m = m;
        }
    }
    const double span = (m_max - lo) / double(scan_points - 1);
    double a = std::max(lo, best_m - span);
    double b = std::min(m_max, best_m + span);

    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = probe_measure(p, cfg, max_outer, c, cache, true).penalized_value;
    double fd = probe_measure(p, cfg, max_outer, d, cache, true).penalized_value;
    while (b - a > 2.0 * cell) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = probe_measure(p, cfg, max_outer, c, cache, true).penalized_value;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = probe_measure(p, cfg, max_outer, d, cache, true).penalized_value;
        }
    }
    // Grid-quantum refinement around the final bracket.
    const std::int64_t c_lo = std::max<std::int64_t>(p.D.count(), std::llround(a / cell) - 1);
    const std::int64_t c_hi = std::llround(b / cell) + 1;
    for (std::int64_t count = c_lo; count <= c_hi; ++count)
        probe_measure(p, cfg, max_outer, double(count) * cell, cache, true);

    PenalizedResult out;
    const PenalizedProbe* winner = nullptr;
    for (const auto& [count, probe] : cache.by_count) {
        out.probes.push_back(probe);
        if (!probe.feasible) continue;
        if (!winner || probe.penalized_value < winner->penalized_value) winner = &probe;
    }
    if (!winner) throw std::runtime_error("optimize_penalized: no feasible budget on this grid");

    const std::int64_t star_count = std::llround(winner->m / cell);
    ConstrainedResult& win = cache.results.at(std::max(star_count, p.D.count()));
    out.mask = std::move(win.mask);
    out.trace = std::move(win.trace);
    out.eigen = std::move(win.eigen);
    out.objective_value = winner->objective_value;
    out.penalized_value = winner->penalized_value;
    out.m_star = winner->m;
    out.budget_binding = std::abs(winner->m - m_max) <= cell;
    return out;
}

const char* to_string(CaseLabel label) {
    switch (label) {
        case CaseLabel::A: return "A";
        case CaseLabel::B: return "B";
        default: return "mixed";
    }
}

CaseReport detect_case(const ConstraintPair& pair) {
    std::vector<DomainMask> d_comps = connected_components(pair.D);
    if (d_comps.size() != 2)
        throw std::invalid_argument("detect_case: D must have exactly two components");

    const GridSpec& g = pair.D.grid();
    auto aspect = [&g](const DomainMask& m) {
        std::array<int, 3> lo = {g.cells[0], g.cells[1], g.cells[2]}, hi = {-1, -1, -1};
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
            if (!m.test(idx)) continue;
            auto c = g.coords_of(idx);
            for (int a = 0; a < g.dim; ++a) {
                lo[a] = std::min(lo[a], c[a]);
                hi[a] = std::max(hi[a], c[a]);
            }
        }
        double mn = std::numeric_limits<double>::max(), mx = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            const double e = double(hi[a] - lo[a] + 1);
            mn = std::min(mn, e);
            mx = std::max(mx, e);
        }
        return mx / mn;
    };
    const int rect_comp = aspect(d_comps[0]) >= aspect(d_comps[1]) ? 0 : 1;
    const DomainMask& d_rect = d_comps[static_cast<std::size_t>(rect_comp)];
    const DomainMask& d_ball = d_comps[static_cast<std::size_t>(1 - rect_comp)];

    CaseReport rep;
    DomainMask added = mask_difference(pair.omega, pair.D);
    rep.added_measure = added.measure();
    if (added.empty()) return rep;  // mixed by convention, zero added measure

    std::vector<DomainMask> o_comps = connected_components(pair.omega);
    for (const DomainMask& comp : o_comps) {
        bool has_ball = !mask_intersection(comp, d_ball).empty();
        bool has_rect = !mask_intersection(comp, d_rect).empty();
        const double add_here = mask_intersection(comp, added).measure();
        if (add_here == 0.0) continue;
        if (has_ball && !has_rect) rep.added_to_ball += add_here;
        else if (has_rect && !has_ball) rep.added_to_rect += add_here;
        else rep.added_elsewhere += add_here;
    }
    if (rep.added_elsewhere > 0.0) rep.label = CaseLabel::mixed;
    else if (rep.added_to_ball > 0.0 && rep.added_to_rect == 0.0) rep.label = CaseLabel::A;
    else if (rep.added_to_rect > 0.0 && rep.added_to_ball == 0.0) rep.label = CaseLabel::B;
    else rep.label = CaseLabel::mixed;
    return rep;
}

}  // namespace eigenshape
