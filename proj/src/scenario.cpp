#include "eigenshape/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eigenshape/gamma.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/io.hpp"

namespace eigenshape {

namespace fs = std::filesystem;
using nlohmann::json;

bool RunReport::passed() const {
    if (!error.empty()) return false;
    for (const auto& o : outcomes)
        if (!o.pass) return false;
    return true;
}

namespace {

// One cell wide at least: a primitive thinner than a cell keeps the column
// of cells its center line runs through.
void rasterize_one(const Primitive& p, const GridSpec& g, DomainMask& out,
                   std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };
    auto cell_of_coord = [&](double x, int axis) {
        int c = int(std::floor((x - g.origin[axis]) / g.h));
        return std::clamp(c, 0, g.cells[axis] - 1);
    };

    switch (p.kind) {
        case Primitive::Kind::single_cell: {
            if (!g.contains(p.index[0], p.index[1], p.index[2]))
                throw std::invalid_argument("rasterize: single_cell index outside the grid");
            out.set(g.index_of(p.index[0], p.index[1], p.index[2]), true);
            return;
        }
        case Primitive::Kind::ball: {
            for (int a = 0; a < g.dim; ++a) {
                if (p.center[a] - p.radius < g.origin[a] ||
                    p.center[a] + p.radius > g.origin[a] + g.cells[a] * g.h)
                    throw std::invalid_argument("rasterize: ball extends outside the grid");
            }
            std::int64_t before = out.count();
            const double r2 = p.radius * p.radius;
            for (std::int64_t idx = 0; idx < g.total_cells(); ++idx) {
                auto c = g.coords_of(idx);
                double d2 = 0.0;
                for (int a = 0; a < g.dim; ++a) {
                    const double d = g.center(c[a], a) - p.center[a];
                    d2 += d * d;
                }
                if (d2 <= r2) out.set(idx, true);
            }
            if (out.count() == before) {
                warn("degenerate ball (radius below cell size) rasterized to one cell");
                std::array<int, 3> c = {cell_of_coord(p.center[0], 0), cell_of_coord(p.center[1], 1),
                                        g.dim == 3 ? cell_of_coord(p.center[2], 2) : 0};
                out.set(g.index_of(c[0], c[1], c[2]), true);
            }
            return;
        }
        case Primitive::Kind::rectangle: {
            for (int a = 0; a < g.dim; ++a) {
                if (p.center[a] - p.half_widths[a] < g.origin[a] ||
                    p.center[a] + p.half_widths[a] > g.origin[a] + g.cells[a] * g.h)
                    throw std::invalid_argument("rasterize: rectangle extends outside the grid");
            }
            // Per-axis index ranges of cell centers inside the open slab;
            // empty ranges degrade to the single column through the center.
            std::array<int, 3> lo = {0, 0, 0}, hi = {0, 0, 0};
            for (int a = 0; a < g.dim; ++a) {
                const double xmin = p.center[a] - p.half_widths[a];
                const double xmax = p.center[a] + p.half_widths[a];
                int l = int(std::ceil((xmin - g.origin[a]) / g.h - 0.5));
                int h_ = int(std::floor((xmax - g.origin[a]) / g.h - 0.5));
                l = std::max(l, 0);
                h_ = std::min(h_, g.cells[a] - 1);
                if (l > h_) {
                    warn("degenerate rectangle (half-width below h/2) widened to one cell along axis " +
                         std::to_string(a));
                    l = h_ = cell_of_coord(p.center[a], a);
                }
                lo[a] = l;
                hi[a] = h_;
            }
            std::array<int, 3> c;
            c[2] = 0;
            for (int k = lo[2]; k <= (g.dim == 3 ? hi[2] : 0); ++k)
                for (int j = lo[1]; j <= hi[1]; ++j)
                    for (int i = lo[0]; i <= hi[0]; ++i) out.set(g.index_of(i, j, k), true);
            return;
        }
    }
}

}  // namespace

DomainMask rasterize(const std::vector<Primitive>& primitives, const GridSpec& grid,
                     std::vector<std::string>* warnings) {
    DomainMask out(grid);
    for (const Primitive& p : primitives) rasterize_one(p, grid, out, warnings);
    return out;
}

namespace {

int line_of_byte(const std::string& text, std::size_t byte) {
    return 1 + int(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

GridSpec parse_grid(const json& j) {
    const double xmin = j.at("xmin").get<double>();
    const double xmax = j.at("xmax").get<double>();
    const double ymin = j.at("ymin").get<double>();
    const double ymax = j.at("ymax").get<double>();
    const double cpu = j.at("cells_per_unit").get<double>();
    if (!(cpu > 0.0)) throw std::runtime_error("grid: cells_per_unit must be positive");
    auto cells_along = [&](double lo, double hi) {
        const double exact = (hi - lo) * cpu;
        const int n = int(std::llround(exact));
        if (n < 1 || std::abs(exact - n) > 1e-9 * std::max(1.0, exact))
            throw std::runtime_error("grid: extent is not an integer number of cells");
        return n;
    };
    const int nx = cells_along(xmin, xmax);
    const int ny = cells_along(ymin, ymax);
    return GridSpec(2, {nx, ny, 1}, {xmin, ymin, 0.0}, 1.0 / cpu);
}

Primitive parse_primitive(const json& j) {
    Primitive p;
    const std::string type = j.at("type").get<std::string>();
    if (type == "ball") {
        p.kind = Primitive::Kind::ball;
        auto c = j.at("center");
        for (std::size_t a = 0; a < c.size() && a < 3; ++a) p.center[a] = c[a].get<double>();
        p.radius = j.at("radius").get<double>();
    } else if (type == "rectangle") {
        p.kind = Primitive::Kind::rectangle;
        auto c = j.at("center");
        for (std::size_t a = 0; a < c.size() && a < 3; ++a) p.center[a] = c[a].get<double>();
        auto w = j.at("half_widths");
        for (std::size_t a = 0; a < w.size() && a < 3; ++a) p.half_widths[a] = w[a].get<double>();
    } else if (type == "single_cell") {
        p.kind = Primitive::Kind::single_cell;
        auto ix = j.at("index");
        for (std::size_t a = 0; a < ix.size() && a < 3; ++a) p.index[a] = ix[a].get<int>();
    } else {
        throw std::runtime_error("unknown primitive type: " + type);
    }
    return p;
}

Scenario parse_scenario(const json& j, std::uint64_t suite_seed) {
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.grid = parse_grid(j.at("grid"));
    for (const auto& pj : j.at("constraint")) s.constraint.push_back(parse_primitive(pj));

    const json& pb = j.at("problem");
    const std::string ptype = pb.at("type").get<std::string>();
    if (ptype == "constrained") {
        s.penalized = false;
        s.m = pb.at("m").get<double>();
    } else if (ptype == "penalized") {
        s.penalized = true;
        s.lambda = pb.at("lambda").get<double>();
        s.m_max = pb.at("m_max").get<double>();
    } else {
        throw std::runtime_error("scenario " + s.name + ": unknown problem type " + ptype);
    }
    const std::string obj = pb.value("objective", "eigenvalue");
    if (obj == "eigenvalue") {
        s.objective.kind = ObjectiveKind::eigenvalue_k;
        s.objective.k = pb.value("k", 1);
    } else if (obj == "energy") {
        s.objective.kind = ObjectiveKind::energy;
    } else {
        throw std::runtime_error("scenario " + s.name + ": unknown objective " + obj);
    }

    s.solver.seed = suite_seed;
    if (j.contains("solver")) {
        const json& sv = j["solver"];
        s.solver.tolerance = sv.value("tolerance", s.solver.tolerance);
        s.solver.max_iterations = sv.value("max_iterations", s.solver.max_iterations);
        if (sv.contains("seed")) s.solver.seed = sv["seed"].get<std::uint64_t>();
    }
    s.max_outer = j.value("max_outer", 60);

    if (j.contains("checks")) {
        for (const auto& cj : j["checks"]) {
            CheckSpec spec;
            spec.name = cj.at("name").get<std::string>();
            for (auto it = cj.begin(); it != cj.end(); ++it) {
                if (it.key() == "name") continue;
                if (it.value().is_number())
                    spec.params[it.key()] = it.value().get<double>();
                else if (it.value().is_string() && it.key() == "label")
                    spec.label = it.value().get<std::string>();
            }
            s.checks.push_back(std::move(spec));
        }
    }
    return s;
}

}  // namespace

SuiteConfig load_suite_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ":" + std::to_string(line_of_byte(text, e.byte)) +
                                 ": JSON parse error: " + e.what());
    }

    SuiteConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t(1));
    cfg.provenance = j.value("_provenance", "");
    std::set<std::string> names;
    if (j.contains("scenarios")) {
        for (const auto& sj : j["scenarios"]) {
            Scenario s = parse_scenario(sj, cfg.seed);
            if (!names.insert(s.name).second)
                throw std::runtime_error(path + ": duplicate scenario name: " + s.name);
            // Feasibility is a configuration error, caught before running.
            if (!s.penalized) {
                DomainMask d = rasterize(s.constraint, s.grid);
                if (s.m < d.measure() - 0.5 * s.grid.cell_volume())
                    throw std::runtime_error(path + ": scenario " + s.name +
                                             ": m is below the measure of the constraint D");
            }
            cfg.scenarios.push_back(std::move(s));
        }
    }
    return cfg;
}

namespace {

struct CheckContext {
    const Scenario& s;
    const DomainMask& D;
    const DomainMask& omega;
    double objective;
    double m_target;  // constrained m, or the penalized optimum m*
    const OptimizationTrace& trace;
    const EigenResult* eigen;
    const SolverConfig& cfg;
};

double lambda1_of(const CheckContext& ctx) {
    if (ctx.eigen && !ctx.eigen->eigenvalues.empty()) return ctx.eigen->eigenvalues[0];
    return eigensolve(ctx.omega, 1, ctx.cfg).eigenvalues[0];
}

CheckOutcome evaluate_check(const CheckSpec& spec, const CheckContext& ctx) {
    CheckOutcome out;
    out.name = spec.name;
    const GridSpec& g = ctx.s.grid;
    auto param = [&](const std::string& key, double fallback) {
        auto it = spec.params.find(key);
        return it == spec.params.end() ? fallback : it->second;
    };

    if (spec.name == "lambda1_close_to") {
        const double target = param("value", 0.0);
        const double rel = param("rel_tol", 0.02);
        out.measured = lambda1_of(ctx);
        out.threshold = target;
        out.pass = std::abs(out.measured - target) <= rel * std::abs(target);
        out.note = "rel_tol=" + format_double(rel);
    } else if (spec.name == "convexity_defect_above") {
        out.measured = convexity_defect(ctx.omega);
        out.threshold = param("value", 0.0);
        out.pass = out.measured > out.threshold;
    } else if (spec.name == "convexity_defect_below") {
        out.measured = convexity_defect(ctx.omega);
        out.threshold = param("value", 0.0);
        out.pass = out.measured < out.threshold;
    } else if (spec.name == "measure_saturation") {
        out.measured = std::abs(ctx.omega.measure() - ctx.m_target);
        out.threshold = g.cell_volume();
        out.pass = out.measured <= out.threshold;
    } else if (spec.name == "excess_distance_bound") {
        out.measured = excess_distance(ConstraintPair(ctx.D, ctx.omega));
        const double free_measure = std::max(ctx.m_target - ctx.D.measure(), 0.0);
        out.threshold = ball_diameter_for_measure(free_measure, g.dim) + 4.0 * g.h;
        out.pass = out.measured <= out.threshold;
    } else if (spec.name == "case_equals") {
        const CaseReport rep = detect_case(ConstraintPair(ctx.D, ctx.omega));
        out.measured = double(int(rep.label));
        out.threshold = 0.0;
        out.pass = spec.label == to_string(rep.label);
        out.note = std::string("expected=") + spec.label + " got=" + to_string(rep.label);
    } else if (spec.name == "single_iteration") {
        out.measured = ctx.trace.entries.empty() ? -1.0 : double(ctx.trace.entries.back().iteration);
        out.threshold = 1.0;
        out.pass = out.measured == 1.0;
    } else if (spec.name == "omega_equals_d") {
        std::int64_t diff = 0;
        for (std::int64_t idx = 0; idx < g.total_cells(); ++idx)
            if (ctx.omega.test(idx) != ctx.D.test(idx)) ++diff;
        out.measured = double(diff);
        out.threshold = 0.0;
        out.pass = diff == 0;
    } else if (spec.name == "beats_competitor_ball") {
        const double area = param("ball_measure", 0.0);
        Primitive ball;
        ball.kind = Primitive::Kind::ball;
        ball.center = {param("cx", 0.0), param("cy", 0.0), 0.0};
        ball.radius = std::sqrt(area / M_PI);
        DomainMask competitor = mask_union(ctx.D, rasterize({ball}, g));
        out.measured = lambda1_of(ctx);
        out.threshold = eigensolve(competitor, 1, ctx.cfg).eigenvalues[0];
        out.pass = out.measured < out.threshold;
        out.note = "competitor ball measure " + format_double(area);
    } else if (spec.name == "penalized_dominance") {
        out.measured = ctx.objective + ctx.s.lambda * ctx.omega.measure();
        const double lam_d = eigensolve(ctx.D, 1, ctx.cfg).eigenvalues[0];
        out.threshold = lam_d + ctx.s.lambda * ctx.D.measure();
        out.pass = out.measured <= out.threshold * (1.0 + ctx.cfg.tolerance) + ctx.cfg.tolerance;
    } else if (spec.name == "connected_components_count") {
        out.measured = double(connected_components(ctx.omega).size());
        out.threshold = param("value", 1.0);
        out.pass = out.measured == out.threshold;
    } else {
        out.pass = false;
        out.note = "unknown check";
    }
    return out;
}

void write_report_csv(const RunReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "scenario," << rep.scenario << "\n";
    out << "objective," << format_double(rep.objective) << "\n";
    out << "measure," << format_double(rep.measure_value) << "\n";
    if (!rep.error.empty()) out << "error," << rep.error << "\n";
    out << "check,name,measured,threshold,result,note\n";
    for (const auto& o : rep.outcomes)
        out << "check," << o.name << "," << format_double(o.measured) << ","
            << format_double(o.threshold) << "," << (o.pass ? "pass" : "fail") << "," << o.note
            << "\n";
}

}  // namespace

RunReport run_scenario(const Scenario& s, const std::string& output_dir) {
    RunReport rep;
    rep.scenario = s.name;
    fs::create_directories(output_dir);
    const auto t0 = std::chrono::steady_clock::now();

    try {
        std::vector<std::string> warnings;
        DomainMask D = rasterize(s.constraint, s.grid, &warnings);
        if (D.empty()) throw std::runtime_error("constraint D rasterized to the empty set");
        if (!s.penalized && s.m < D.measure() - 0.5 * s.grid.cell_volume())
            throw std::runtime_error("configuration error: m below measure(D)");

        DomainMask omega;
        OptimizationTrace trace;
        EigenResult eigen;
        double m_target = 0.0;

        if (s.penalized) {
            PenalizedProblem p{D, s.lambda, s.objective};
            PenalizedResult r = optimize_penalized(p, s.solver, s.m_max, s.max_outer);
            omega = std::move(r.mask);
            trace = std::move(r.trace);
            eigen = std::move(r.eigen);
            rep.objective = r.objective_value;
            m_target = r.m_star;
        } else {
            ConstrainedProblem p{D, s.m, s.objective};
            ConstrainedResult r = optimize_constrained(p, s.solver, s.max_outer);
            omega = std::move(r.mask);
            trace = std::move(r.trace);
            eigen = std::move(r.eigen);
            rep.objective = r.objective;
            m_target = s.m;
        }
        rep.measure_value = omega.measure();

        const std::string mask_path = output_dir + "/mask.pgm";
        write_mask_pgm(omega, mask_path);
        rep.artifacts.push_back(mask_path);
        const std::string d_path = output_dir + "/constraint.pgm";
        write_mask_pgm(D, d_path);
        rep.artifacts.push_back(d_path);
        const std::string trace_path = output_dir + "/trace.csv";
        write_trace_csv(trace, trace_path);
        rep.artifacts.push_back(trace_path);
        if (s.objective.kind == ObjectiveKind::eigenvalue_k) {
            const std::string eig_path = output_dir + "/eigen.csv";
            write_eigen_csv(eigen, eig_path);
            rep.artifacts.push_back(eig_path);
            for (std::size_t j = 0; j < eigen.eigenfunctions.size(); ++j) {
                const std::string base = output_dir + "/u_" + std::to_string(j + 1);
                write_field_pgm(eigen.eigenfunctions[j], base + ".pgm");
                write_field_csv(eigen.eigenfunctions[j], base + ".csv");
                rep.artifacts.push_back(base + ".csv");
            }
        }
        if (!warnings.empty()) {
            std::ofstream wf(output_dir + "/warnings.txt");
            for (const auto& w : warnings) wf << w << "\n";
        }

        CheckContext ctx{s,     D,
                         omega, rep.objective,
                         m_target, trace,
                         s.objective.kind == ObjectiveKind::eigenvalue_k ? &eigen : nullptr,
                         s.solver};
        for (const CheckSpec& spec : s.checks) rep.outcomes.push_back(evaluate_check(spec, ctx));
    } catch (const std::exception& e) {
        rep.error = e.what();
        for (const CheckSpec& spec : s.checks) {
            CheckOutcome o;
            o.name = spec.name;
            o.pass = false;
            o.note = "run aborted";
            rep.outcomes.push_back(o);
        }
    }

    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_report_csv(rep, output_dir + "/report.csv");
    {
        // Wall time lives outside report.csv so reports stay bit-for-bit
        // reproducible across runs.
        std::ofstream tf(output_dir + "/timing.txt");
        tf << "wall_seconds," << format_double(rep.wall_seconds) << "\n";
    }
    return rep;
}

SuiteSummary run_suite(const std::string& config_path, const std::string& output_dir, int jobs,
                       std::optional<std::uint64_t> seed_override) {
    SuiteConfig cfg = load_suite_config(config_path);
    if (seed_override)
        for (Scenario& s : cfg.scenarios) s.solver.seed = *seed_override;
    fs::create_directories(output_dir);

    SuiteSummary summary;
    summary.reports.resize(cfg.scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.scenarios.size()) break;
            const Scenario& s = cfg.scenarios[i];
            summary.reports[i] = run_scenario(s, output_dir + "/" + s.name);
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, int(cfg.scenarios.size())));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::sort(summary.reports.begin(), summary.reports.end(),
              [](const RunReport& a, const RunReport& b) { return a.scenario < b.scenario; });

    std::ofstream out(output_dir + "/summary.csv");
    out << "scenario,objective,measure,checks_passed,checks_total,status\n";
    for (const RunReport& r : summary.reports) {
        int passed = 0;
        for (const auto& o : r.outcomes) passed += o.pass ? 1 : 0;
        const bool ok = r.passed();
        summary.all_passed = summary.all_passed && ok;
        out << r.scenario << "," << format_double(r.objective) << ","
            << format_double(r.measure_value) << "," << passed << "," << r.outcomes.size() << ","
            << (ok ? "pass" : "fail") << "\n";
    }

    std::cout << "suite: " << config_path << "\n";
    for (const RunReport& r : summary.reports) {
        std::cout << (r.passed() ? "  [pass] " : "  [FAIL] ") << r.scenario
                  << "  objective=" << r.objective << "  measure=" << r.measure_value << "  ("
                  << r.wall_seconds << " s)";
        if (!r.error.empty()) std::cout << "  error: " << r.error;
        std::cout << "\n";
        for (const auto& o : r.outcomes)
            std::cout << "      " << (o.pass ? "pass " : "FAIL ") << o.name
                      << "  measured=" << o.measured << " threshold=" << o.threshold
                      << (o.note.empty() ? "" : "  " + o.note) << "\n";
    }
    return summary;
}

}  // namespace eigenshape
