#include "pxk/report.hpp"

#include <fstream>
#include <ostream>

#include "pxk/format.hpp"

namespace pxk {

std::string geometry_csv_header() {
    return "rho,C_rho,lambda_bar,delta,alpha,min_sphere_J,t0,J_e";
}

std::string geometry_csv_row(const GeometryConstants& geo, double min_sphere_J, double t0,
                             double J_e) {
    return fmt17(geo.rho) + "," + fmt17(geo.C_rho) + "," + fmt17(geo.lambda_bar) + "," +
           fmt17(geo.delta) + "," + fmt17(geo.alpha) + "," + fmt17(min_sphere_J) + "," +
           fmt17(t0) + "," + fmt17(J_e);
}

std::string iterations_csv_header() {
    return "solver,iter,J,residual_norm,x_norm,degeneracy_gap";
}

namespace {

void write_iterations(std::ostream& os, const SolutionPair& pair) {
    os << iterations_csv_header() << "\n";
    for (const auto& rec : pair.history1)
        os << "mountain_pass," << rec.iter << "," << fmt17(rec.J) << "," << fmt17(rec.res_norm)
           << "," << fmt17(rec.x_norm) << "," << fmt17(rec.gap) << "\n";
    for (const auto& rec : pair.history2)
        os << "ekeland," << rec.iter << "," << fmt17(rec.J) << "," << fmt17(rec.res_norm) << ","
           << fmt17(rec.x_norm) << "," << fmt17(rec.gap) << "\n";
}

void write_report(std::ostream& os, const ExperimentSpec& spec, const SolutionPair* pair,
                  const std::string& clause, const std::string& detail) {
    os << "verdict: " << (pair ? "CERTIFIED" : "FAILED") << "\n";
    os << "clause: " << (pair ? "-" : clause) << "\n";
    if (!pair && !detail.empty()) os << "detail: " << detail << "\n";
    os << "mode: " << (spec.mode == H2Mode::h2 ? "theorem1" : "theorem2") << "\n";
    os << "grid: dim=" << spec.dim << " nodes=" << spec.nodes << "\n";
    if (!pair) return;

    const GeometryConstants& geo = pair->geo;
    os << "rho: " << fmt17(geo.rho) << "\n";
    os << "C_rho: " << fmt17(geo.C_rho) << "\n";
    os << "lambda_bar: " << fmt17(geo.lambda_bar) << " (lambda = " << fmt17(spec.lambda)
       << ")\n";
    os << "delta: " << fmt17(geo.delta) << " (|h|_{p*'} = " << fmt17(geo.h_norm_conj) << ")\n";
    os << "alpha: " << fmt17(geo.alpha) << "\n";
    os << "embedding C1,C2,C3: " << fmt17(geo.constants.C1) << " " << fmt17(geo.constants.C2)
       << " " << fmt17(geo.constants.C3) << "\n";
    os << "min sphere J: " << fmt17(pair->sphere.min_energy) << "\n";
    os << "divergence ray: t0 = " << fmt17(pair->ray_t0) << ", J(e) = "
       << fmt17(pair->ray_energy) << "\n";
    os << "ball starter: t = " << fmt17(pair->starter_t) << ", J = "
       << fmt17(pair->starter_energy) << "\n";
    os << "u1: J = " << fmt17(pair->J1) << ", residual = " << fmt17(pair->res1)
       << ", gap = " << fmt17(pair->ps1.degeneracy_gap) << "\n";
    os << "u2: J = " << fmt17(pair->J2) << ", residual = " << fmt17(pair->res2)
       << ", gap = " << fmt17(pair->ps2.degeneracy_gap) << "\n";
    os << "cap: " << fmt17(pair->ps1.cap) << " (both levels below: "
       << ((pair->ps1.below_cap && pair->ps2.below_cap) ? "yes" : "no") << ")\n";
}

} // namespace

ExitStatus run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                          std::ostream& log) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        log << "cannot create output directory " << out_dir << ": " << ec.message() << "\n";
        return ExitStatus::io_error;
    }
    {
        std::ofstream probe(out_dir / "report.txt");
        if (!probe) {
            log << "output directory " << out_dir << " is not writable\n";
            return ExitStatus::io_error;
        }
    }

    ProblemData prob = materialize(spec);

    SolutionPair pair;
    try {
        pair = solve_pair(prob, spec.solver);
    } catch (const CertificationFailed& err) {
        std::ofstream rep(out_dir / "report.txt");
        write_report(rep, spec, nullptr, err.clause(), err.what());
        log << "certification failed [" << err.clause() << "]: " << err.what() << "\n";
        return ExitStatus::certification_failed;
    } catch (const Error& err) {
        std::ofstream rep(out_dir / "report.txt");
        write_report(rep, spec, nullptr, "pipeline_error", err.what());
        log << "pipeline error: " << err.what() << "\n";
        return ExitStatus::certification_failed;
    }

    {
        std::ofstream os(out_dir / "geometry.csv");
        os << geometry_csv_header() << "\n"
           << geometry_csv_row(pair.geo, pair.sphere.min_energy, pair.ray_t0, pair.ray_energy)
           << "\n";
    }
    {
        std::ofstream os(out_dir / "iterations.csv");
        write_iterations(os, pair);
    }
    {
        std::ofstream os(out_dir / "u1.csv");
        write_csv(pair.u1, os);
    }
    {
        std::ofstream os(out_dir / "u2.csv");
        write_csv(pair.u2, os);
    }
    {
        std::ofstream os(out_dir / "report.txt");
        write_report(os, spec, &pair, "", "");
    }
    log << "certified: J(u1) = " << fmt17(pair.J1) << " > 0 > J(u2) = " << fmt17(pair.J2)
        << "\n";
    return ExitStatus::ok;
}

ExitStatus run_geometry(const ExperimentSpec& spec, std::ostream& os) {
    ProblemData prob = materialize(spec);

    const HypothesisReport h1 = check_H1(prob.p, prob.q, prob.r, prob.kirchhoff.gamma);
    if (!h1.passed) {
        os << "H1 failed: " << h1.violations.front().condition << "\n";
        return ExitStatus::certification_failed;
    }
    const HypothesisReport h2 = check_H2(prob, prob.mode);
    if (!h2.passed) {
        os << "H2 failed: " << h2.violations.front().condition << "\n";
        return ExitStatus::certification_failed;
    }

    try {
        const EmbeddingConstants constants = estimate_embedding_constants(
            prob.p, prob.q, prob.r, 512, substream(spec.solver.seed, 1));
        const GeometryConstants geo =
            mountain_pass_constants(prob, constants, default_rho_grid());
        const HypothesisReport sphere =
            verify_sphere_lower_bound(prob, geo, 512, substream(spec.solver.seed, 2));

        bool mask_nonempty = false;
        for (bool b : prob.omega0_mask) mask_nonempty = mask_nonempty || b;
        const GridFunction phi0 =
            mask_nonempty ? bump_on_mask(prob.grid, prob.omega0_mask)
                          : bump_on_mask(prob.grid,
                                         std::vector<bool>(prob.omega0_mask.size(), true));
        std::vector<double> schedule;
        for (int k = 0; k <= 60; ++k) schedule.push_back(std::pow(2.0, k));
        const DivergenceRay ray = find_divergence_ray(prob, geo, phi0, schedule);

        os << geometry_csv_header() << "\n"
           << geometry_csv_row(geo, sphere.min_energy, ray.t0, ray.J_e) << "\n";
        return sphere.passed ? ExitStatus::ok : ExitStatus::certification_failed;
    } catch (const Error& err) {
        os << "geometry pipeline error: " << err.what() << "\n";
        return ExitStatus::certification_failed;
    }
}

} // namespace pxk
