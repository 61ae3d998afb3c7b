#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pxk/energy.hpp"
#include "pxk/spaces.hpp"

namespace pxk {

// Mountain-pass geometry constants.  All closed forms; `constants` carries
// the probe-estimated embedding factors they are built from.
struct GeometryConstants {
    double rho = 0.0;
    double epsilon = 0.0;
    double C_epsilon = 0.0;
    double C_rho = 0.0;
    double lambda_bar = 0.0;
    double delta = 0.0;
    double alpha = 0.0;
    EmbeddingConstants constants;
    // Luxemburg norms of the weights entering the formulas.
    double f_norm_q0 = 0.0;
    double g_norm_r0 = 0.0;
    double h_norm_conj = 0.0;
};

// --- closed forms, exposed for independent re-evaluation in tests ---

double c_rho_formula(double rho, const KirchhoffCoefficients& k, double p_minus, double p_plus,
                     double r_minus, double C2, double g_norm_r0);
double lambda_bar_formula(double C_rho, double q_minus, double C1, double f_norm_q0, double rho,
                          double p_plus);
double young_epsilon(double a, double p_plus, double C3);
// Sharp Young constant for x y <= eps x^s + C_eps y^{s'} with s = p_plus.
double young_constant(double eps, double p_plus);
double delta_formula(double C_rho, double rho, double p_plus, double C3, double C_eps);
double alpha_formula(double C_rho, double rho, double p_plus);

// rho candidates 2^{-1} .. 2^{-30}.
std::vector<double> default_rho_grid();

// Weight integrability / sign checks; H2' additionally requires h == 0 and
// g > 0 on a nonempty omega0.
HypothesisReport check_H2(const ProblemData& prob, H2Mode mode);

// Selects the largest admissible rho (margin rule C_rho >= a/(4 p_plus)) and
// evaluates all constants.
GeometryConstants mountain_pass_constants(const ProblemData& prob,
                                          const EmbeddingConstants& constants,
                                          const std::vector<double>& rho_grid);

// Energy of a field on the sphere ||u||_X = rho; rejects off-sphere inputs.
double sphere_sample_energy(const ProblemData& prob, const GeometryConstants& geo,
                            const GridFunction& u);

// Draws `samples` random directions rescaled to the rho-sphere and checks
// J >= alpha on each; min J found is reported in `min_energy`.
HypothesisReport verify_sphere_lower_bound(const ProblemData& prob, const GeometryConstants& geo,
                                           int samples, std::uint64_t seed);

struct DivergenceRay {
    GridFunction e;
    double t0 = 0.0;
    double J_e = 0.0;
    std::array<double, 3> tail{}; // strictly decreasing J evidence from t0 on
};

// First t on the schedule with ||t phi0|| > rho, J(t phi0) < 0 and a strictly
// decreasing J-tail beyond it.
DivergenceRay find_divergence_ray(const ProblemData& prob, const GeometryConstants& geo,
                                  const GridFunction& phi0, const std::vector<double>& t_schedule);

struct SmallTResult {
    double t = 0.0;
    double J_t = 0.0;
};

// Smallest scheduled t in (0,1) with J(t psi0) < 0 inside the rho-ball; uses
// the order-t h-term, so requires int h psi0 > 0 and h not identically zero.
SmallTResult verify_small_t_negative(const ProblemData& prob, const GeometryConstants& geo,
                                     const GridFunction& psi0,
                                     const std::vector<double>& t_schedule);

// h == 0 variant: negativity comes from the lambda f-term at order t^q,
// requiring int f |psi0|^q > 0.
SmallTResult verify_small_t_negative_f(const ProblemData& prob, const GeometryConstants& geo,
                                       const GridFunction& psi0,
                                       const std::vector<double>& t_schedule);

// Smooth bump equal to 1 at the centre of the bounding box of `mask`,
// vanishing outside it.
GridFunction bump_on_mask(const GridPtr& grid, const std::vector<bool>& mask);

// Bump over the largest axis-aligned box of strictly positive weight around
// the maximizer of `weight`.
GridFunction bump_on_positive_part(const GridFunction& weight);

} // namespace pxk
