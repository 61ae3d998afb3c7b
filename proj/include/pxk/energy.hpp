#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "pxk/exponents.hpp"
#include "pxk/mesh.hpp"

namespace pxk {

// Nonlocal coefficient M(s) = a - b s^gamma.  Sign-changing: degenerates at
// s* = (a/b)^{1/gamma} and is negative beyond.
struct KirchhoffCoefficients {
    double a = 1.0;
    double b = 1.0;
    double gamma = 1.0;
};

double kirchhoff_M(double s, const KirchhoffCoefficients& k);

// Max over s >= 0 of a s - b s^{gamma+1}/(gamma+1), attained at (a/b)^{1/gamma}.
double kirchhoff_cap(const KirchhoffCoefficients& k);
double degeneracy_threshold(const KirchhoffCoefficients& k);

enum class H2Mode { h2, h2prime };

// Full instance of the variational problem on a grid.
struct ProblemData {
    GridPtr grid;
    KirchhoffCoefficients kirchhoff;
    double lambda = 0.0;
    ExponentField p, q, r;
    DerivedExponents derived;
    GridFunction f, g, h;
    std::vector<bool> omega0_mask;
    double eta = 0.01; // integrability margins, metadata only on a grid
    double mu = 0.01;
    H2Mode mode = H2Mode::h2;

    static ProblemData assemble(GridPtr grid, KirchhoffCoefficients k, double lambda,
                                ExponentField p, ExponentField q, ExponentField r,
                                GridFunction f, GridFunction g, GridFunction h,
                                std::vector<bool> omega0_mask, H2Mode mode,
                                double eta = 0.01, double mu = 0.01);
};

struct EnergyBreakdown {
    double s = 0.0;              // int |grad lap u|^p / p
    double kirchhoff_part = 0.0; // a s - b s^{gamma+1}/(gamma+1)
    double f_part = 0.0;         // int f |u|^q / q
    double g_part = 0.0;         // int g |u|^r / r
    double h_part = 0.0;         // int h u
    double total = 0.0;          // kirchhoff_part - lambda f_part - g_part - h_part
};

std::string energy_csv_header();
std::string to_csv_row(const EnergyBreakdown& e);

// int |grad lap u|^{p(x)}/p(x) over cells.
double gradient_energy_s(const GridFunction& u, const ProblemData& prob);

EnergyBreakdown energy_J(const GridFunction& u, const ProblemData& prob);

// lambda f_part + g_part + h_part; equals kirchhoff_part - total.
double potential_phi(const GridFunction& u, const ProblemData& prob);

// Gradient energy s together with its nodal gradient ds/du (adjoint of the
// composed difference operators, boundary entries zero).
std::pair<double, GridFunction> principal_gradient(const GridFunction& u,
                                                   const ProblemData& prob);

// Gradient of the lower-order potential: w (lambda f |u|^{q-2}u +
// g |u|^{r-2}u + h), boundary entries zero.  residual = M(s) ds/du - load.
GridFunction lower_order_load(const GridFunction& u, const ProblemData& prob);

// Nodal gradient r_i = <J'(u), e_i> assembled through the exact adjoint of
// the composed difference operators; boundary entries are zero.
GridFunction residual(const GridFunction& u, const ProblemData& prob);

double residual_norm(const GridFunction& r);

// Relative error between <residual(u), v> and the central difference of J.
double directional_derivative_check(const GridFunction& u, const GridFunction& v,
                                    const ProblemData& prob, double h);

} // namespace pxk
