#include "pxk/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "pxk/format.hpp"

namespace pxk {

namespace {

// |u|^{e-2} u = sign(u) |u|^{e-1}; smooth through 0 for e > 1.
Eigen::ArrayXd signed_power(const Eigen::ArrayXd& u, const Eigen::ArrayXd& e) {
    return u.sign() * u.abs().pow(e - 1.0);
}

void check_coeffs(const KirchhoffCoefficients& k) {
    if (!(k.a > 0.0 && k.b > 0.0 && k.gamma > 0.0))
        throw std::invalid_argument("Kirchhoff coefficients must be positive");
}

} // namespace

double kirchhoff_M(double s, const KirchhoffCoefficients& k) {
    check_coeffs(k);
    if (s < 0.0) throw std::invalid_argument("kirchhoff_M: s must be nonnegative");
    return k.a - k.b * std::pow(s, k.gamma);
}

double kirchhoff_cap(const KirchhoffCoefficients& k) {
    check_coeffs(k);
    return k.gamma * std::pow(k.a, (k.gamma + 1.0) / k.gamma) /
           ((k.gamma + 1.0) * std::pow(k.b, 1.0 / k.gamma));
}

double degeneracy_threshold(const KirchhoffCoefficients& k) {
    check_coeffs(k);
    return std::pow(k.a / k.b, 1.0 / k.gamma);
}

ProblemData ProblemData::assemble(GridPtr grid, KirchhoffCoefficients k, double lambda,
                                  ExponentField p, ExponentField q, ExponentField r,
                                  GridFunction f, GridFunction g, GridFunction h,
                                  std::vector<bool> omega0_mask, H2Mode mode, double eta,
                                  double mu) {
    check_coeffs(k);
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    require_same_grid(*grid, p.grid(), "ProblemData");
    require_same_grid(*grid, q.grid(), "ProblemData");
    require_same_grid(*grid, r.grid(), "ProblemData");
    require_same_grid(*grid, f.grid(), "ProblemData");
    require_same_grid(*grid, g.grid(), "ProblemData");
    require_same_grid(*grid, h.grid(), "ProblemData");
    if (omega0_mask.size() != static_cast<std::size_t>(grid->num_nodes()))
        throw std::invalid_argument("omega0 mask size does not match grid");
    if (!(eta > 0.0 && mu > 0.0)) throw std::invalid_argument("eta, mu must be positive");

    ProblemData prob;
    prob.grid = grid;
    prob.kirchhoff = k;
    prob.lambda = lambda;
    prob.derived = derived_exponents(p, q, r);
    prob.p = std::move(p);
    prob.q = std::move(q);
    prob.r = std::move(r);
    prob.f = std::move(f);
    prob.g = std::move(g);
    prob.h = std::move(h);
    prob.omega0_mask = std::move(omega0_mask);
    prob.eta = eta;
    prob.mu = mu;
    prob.mode = mode;
    return prob;
}

std::string energy_csv_header() { return "s,kirchhoff_part,f_part,g_part,h_part,total"; }

std::string to_csv_row(const EnergyBreakdown& e) {
    return fmt17(e.s) + "," + fmt17(e.kirchhoff_part) + "," + fmt17(e.f_part) + "," +
           fmt17(e.g_part) + "," + fmt17(e.h_part) + "," + fmt17(e.total);
}

double gradient_energy_s(const GridFunction& u, const ProblemData& prob) {
    require_same_grid(u.grid(), *prob.grid, "gradient_energy_s");
    const Eigen::ArrayXd mag = grad_laplacian(u).magnitude().values();
    // 1/p(x) weight stays inside the quadrature
    return (u.grid().node_weights() * mag.pow(prob.p.values()) / prob.p.values()).sum();
}

EnergyBreakdown energy_J(const GridFunction& u, const ProblemData& prob) {
    require_same_grid(u.grid(), *prob.grid, "energy_J");
    const auto& k = prob.kirchhoff;
    const Eigen::ArrayXd& w = u.grid().node_weights();
    const Eigen::ArrayXd uabs = u.values().abs();

    EnergyBreakdown e;
    e.s = gradient_energy_s(u, prob);
    e.kirchhoff_part = k.a * e.s - k.b * std::pow(e.s, k.gamma + 1.0) / (k.gamma + 1.0);
    e.f_part = (w * prob.f.values() * uabs.pow(prob.q.values()) / prob.q.values()).sum();
    e.g_part = (w * prob.g.values() * uabs.pow(prob.r.values()) / prob.r.values()).sum();
    e.h_part = (w * prob.h.values() * u.values()).sum();
    e.total = e.kirchhoff_part - prob.lambda * e.f_part - e.g_part - e.h_part;
    return e;
}

double potential_phi(const GridFunction& u, const ProblemData& prob) {
    const EnergyBreakdown e = energy_J(u, prob);
    return prob.lambda * e.f_part + e.g_part + e.h_part;
}

std::pair<double, GridFunction> principal_gradient(const GridFunction& u,
                                                   const ProblemData& prob) {
    require_same_grid(u.grid(), *prob.grid, "principal_gradient");
    const Grid& grid = u.grid();

    const VectorField gl = grad_laplacian(u);
    const Eigen::ArrayXd mag = gl.magnitude().values();
    const Eigen::ArrayXd& w = grid.node_weights();
    const double s = (w * mag.pow(prob.p.values()) / prob.p.values()).sum();

    // w_i |grad lap u|^{p-2} with the limit value 0 where the magnitude
    // vanishes (removes the p < 2 singularity).
    Eigen::ArrayXd coef(mag.size());
    for (Eigen::Index i = 0; i < mag.size(); ++i)
        coef[i] = mag[i] > 0.0 ? w[i] * std::pow(mag[i], prob.p.values()[i] - 2.0) : 0.0;

    Eigen::VectorXd accum = Eigen::VectorXd::Zero(grid.num_nodes());
    for (int a = 0; a < grid.dim(); ++a) {
        const Eigen::ArrayXd A = gl.component(a) * coef;
        accum += grid.diff_op(a).transpose() * A.matrix();
    }
    Eigen::ArrayXd gs = (grid.lap_op().transpose() * accum).array();
    for (Eigen::Index node = 0; node < gs.size(); ++node)
        if (grid.is_boundary(node)) gs[node] = 0.0;
    return {s, GridFunction(u.grid_ptr(), std::move(gs))};
}

GridFunction lower_order_load(const GridFunction& u, const ProblemData& prob) {
    require_same_grid(u.grid(), *prob.grid, "lower_order_load");
    const Grid& grid = u.grid();
    const Eigen::ArrayXd& w = grid.node_weights();
    Eigen::ArrayXd load =
        w * (prob.lambda * prob.f.values() * signed_power(u.values(), prob.q.values()) +
             prob.g.values() * signed_power(u.values(), prob.r.values()) + prob.h.values());
    for (Eigen::Index node = 0; node < load.size(); ++node)
        if (grid.is_boundary(node)) load[node] = 0.0;
    return GridFunction(u.grid_ptr(), std::move(load));
}

GridFunction residual(const GridFunction& u, const ProblemData& prob) {
    const auto& k = prob.kirchhoff;

    auto [s, gs] = principal_gradient(u, prob);
    const double M = k.a - k.b * std::pow(s, k.gamma);

    Eigen::ArrayXd res = M * gs.values() - lower_order_load(u, prob).values();
    return GridFunction(u.grid_ptr(), std::move(res));
}

double residual_norm(const GridFunction& r) { return std::sqrt(r.values().square().sum()); }

double directional_derivative_check(const GridFunction& u, const GridFunction& v,
                                    const ProblemData& prob, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("directional_derivative_check: h must be > 0");
    if (v.max_abs() == 0.0) return 0.0;

    const GridFunction vb = apply_navier_bc(v);
    const double dd = (residual(u, prob).values() * vb.values()).sum();
    const double fd =
        (energy_J(u + h * vb, prob).total - energy_J(u - h * vb, prob).total) / (2.0 * h);
    const double scale = std::max(std::abs(dd), std::abs(fd));
    if (scale < 1e-300) return 0.0;
    return std::abs(dd - fd) / scale;
}

} // namespace pxk
