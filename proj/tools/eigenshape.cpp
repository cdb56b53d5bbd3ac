#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eigenshape/gamma.hpp"
#include "eigenshape/geometry.hpp"
#include "eigenshape/io.hpp"
#include "eigenshape/scenario.hpp"
#include "eigenshape/solver.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("EIGENSHAPE_SEED");
    if (!v || !*v) return std::nullopt;
    return std::strtoull(v, nullptr, 10);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eigenshape: spectral shape optimization with internal inclusion constraints"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a scenario suite from a JSON config");
    std::string config_path, out_dir = "out";
    int jobs = 1;
    std::optional<std::uint64_t> seed_flag;
    run->add_option("config", config_path, "suite config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "concurrent scenarios");
    std::uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "override the config seed");

    // solve
    auto* solve = app.add_subcommand("solve", "leading Dirichlet eigenvalues of a mask");
    std::string mask_path, solve_out;
    int k = 1;
    double tol = 1e-8;
    std::uint64_t solve_seed = 1;
    solve->add_option("--mask", mask_path, "mask PGM")->required();
    solve->add_option("--k", k, "number of eigenvalues");
    solve->add_option("--tol", tol, "relative residual tolerance");
    solve->add_option("--seed", solve_seed, "eigensolver seed");
    solve->add_option("--out", solve_out, "directory for eigen.csv and eigenfunction files");

    // torsion
    auto* torsion = app.add_subcommand("torsion", "torsion function of a mask");
    std::string torsion_mask, torsion_out;
    double torsion_tol = 1e-8;
    torsion->add_option("--mask", torsion_mask, "mask PGM")->required();
    torsion->add_option("--tol", torsion_tol, "relative residual tolerance");
    torsion->add_option("--out", torsion_out, "directory for the torsion field files");

    // gamma
    auto* gamma = app.add_subcommand("gamma", "gamma distance between two masks");
    std::string mask_a, mask_b;
    double gamma_tol = 1e-8;
    gamma->add_option("--mask-a", mask_a, "first mask PGM")->required();
    gamma->add_option("--mask-b", mask_b, "second mask PGM")->required();
    gamma->add_option("--tol", gamma_tol, "relative residual tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            std::optional<std::uint64_t> seed = env_seed();
            if (seed_opt->count() > 0) seed = seed_value;  // explicit flag wins over env
            eigenshape::SuiteSummary summary =
                eigenshape::run_suite(config_path, out_dir, jobs, seed);
            return summary.all_passed ? 0 : 1;
        }
        if (*solve) {
            eigenshape::DomainMask mask = eigenshape::read_mask_pgm(mask_path);
            eigenshape::SolverConfig cfg;
            cfg.tolerance = tol;
            cfg.seed = env_seed().value_or(solve_seed);
            eigenshape::EigenResult res = eigenshape::eigensolve(mask, k, cfg);
            std::cout << "index,eigenvalue,residual\n";
            for (int j = 0; j < res.k; ++j)
                std::cout << (j + 1) << "," << eigenshape::format_double(res.eigenvalues[j]) << ","
                          << eigenshape::format_double(res.residuals[j]) << "\n";
            if (!solve_out.empty()) {
                eigenshape::write_eigen_csv(res, solve_out + "/eigen.csv");
                for (std::size_t j = 0; j < res.eigenfunctions.size(); ++j) {
                    const std::string base = solve_out + "/u_" + std::to_string(j + 1);
                    eigenshape::write_field_pgm(res.eigenfunctions[j], base + ".pgm");
                    eigenshape::write_field_csv(res.eigenfunctions[j], base + ".csv");
                }
            }
            return res.converged ? 0 : 1;
        }
        if (*torsion) {
            eigenshape::DomainMask mask = eigenshape::read_mask_pgm(torsion_mask);
            eigenshape::SolverConfig cfg;
            cfg.tolerance = torsion_tol;
            eigenshape::TorsionResult res = eigenshape::solve_torsion(mask, cfg);
            double integral = 0.0;
            for (std::int64_t idx = 0; idx < mask.grid().total_cells(); ++idx)
                integral += res.w[idx];
            integral *= mask.grid().cell_volume();
            std::cout << "residual," << eigenshape::format_double(res.residual) << "\n";
            std::cout << "max_w," << eigenshape::format_double(res.w.max_value()) << "\n";
            std::cout << "energy," << eigenshape::format_double(-integral) << "\n";
            if (!torsion_out.empty()) {
                eigenshape::write_field_pgm(res.w, torsion_out + "/torsion.pgm");
                eigenshape::write_field_csv(res.w, torsion_out + "/torsion.csv");
            }
            return res.converged ? 0 : 1;
        }
        if (*gamma) {
            eigenshape::DomainMask a = eigenshape::read_mask_pgm(mask_a);
            eigenshape::DomainMask b = eigenshape::read_mask_pgm(mask_b);
            eigenshape::SolverConfig cfg;
            cfg.tolerance = gamma_tol;
            eigenshape::GammaDistanceReport rep = eigenshape::gamma_distance(a, b, cfg);
            std::cout << "value," << eigenshape::format_double(rep.value) << "\n";
            std::cout << "h," << eigenshape::format_double(rep.h) << "\n";
            std::cout << "residual_a," << eigenshape::format_double(rep.residual_a) << "\n";
            std::cout << "residual_b," << eigenshape::format_double(rep.residual_b) << "\n";
            return rep.converged ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
