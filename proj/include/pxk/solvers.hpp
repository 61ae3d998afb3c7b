#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pxk/energy.hpp"
#include "pxk/geometry.hpp"

namespace pxk {

struct SolverParams {
    int max_iters = 20000;
    double grad_tol = 1e-6;
    double step_init = 1.0;
    int path_points = 31;
    double backtrack_factor = 0.5;
    double theta = 0.0; // 0 = auto: midpoint of the admissible window
    std::uint64_t seed = 7;
    double norm_bound = 1e6; // boundedness monitor for PS sequences
};

// Palais-Smale diagnostics at the final iterate.
struct PSReport {
    double level_c = 0.0;
    double cap = 0.0;
    bool below_cap = false;
    double degeneracy_gap = 0.0; // a - b s^gamma
    bool bounded_flag = false;
};

struct IterationRecord {
    int iter = 0;
    double J = 0.0;
    double res_norm = 0.0;
    double x_norm = 0.0;
    double gap = 0.0;
};

enum class SolveStatus { converged, iteration_limit, boundary_trap };

struct SolverResult {
    GridFunction u;
    double energy = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::iteration_limit;
    PSReport ps;
    std::vector<IterationRecord> history;
    // Mountain pass only: running minimax estimate, non-increasing by
    // construction.
    std::vector<double> minimax_estimates;
};

// Admissible window (p_+, min{r_-, (p_-)^{gamma+1}(gamma+1)/(p_+)^gamma})
// for the PS parameter theta.
std::pair<double, double> theta_window(const ProblemData& prob);

// Throws ValidationError when the window is empty or theta falls outside it.
double validate_theta(const ProblemData& prob, const SolverParams& params);

PSReport ps_monitor(const std::vector<GridFunction>& history, const ProblemData& prob,
                    const SolverParams& params);

// Path minimax: descends the path maximizer with a preconditioned
// backtracking step, re-tensions the path by equal arclength, and polishes
// the near-critical maximizer with a damped Newton step on the gradient.
// Throws CapExceeded when the (monotone) minimax estimate exceeds the
// Kirchhoff cap.
SolverResult mountain_pass_solve(const ProblemData& prob, const GeometryConstants& geo,
                                 const GridFunction& e, const SolverParams& params);

// Monotone projected descent inside the closed rho-ball from a negative-energy
// starter; reports boundary_trap if the iterate converges onto the sphere.
SolverResult ekeland_ball_descent(const ProblemData& prob, const GeometryConstants& geo,
                                  const GridFunction& starter, const SolverParams& params);

struct SolutionPair {
    GridFunction u1;
    double J1 = 0.0;
    double res1 = 0.0;
    GridFunction u2;
    double J2 = 0.0;
    double res2 = 0.0;
    PSReport ps1, ps2;

    // pipeline evidence, kept for reporting
    GeometryConstants geo;
    HypothesisReport sphere;
    double ray_t0 = 0.0;
    double ray_energy = 0.0;
    double starter_t = 0.0;
    double starter_energy = 0.0;
    std::vector<IterationRecord> history1, history2;
};

// Full certification pipeline: hypotheses, geometry, both solvers, and the
// SolutionPair invariants.  Throws CertificationFailed naming the violated
// clause.
SolutionPair solve_pair(const ProblemData& prob, const SolverParams& params);

} // namespace pxk
