#include "pxk/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pxk {

double c_rho_formula(double rho, const KirchhoffCoefficients& k, double p_minus, double p_plus,
                     double r_minus, double C2, double g_norm_r0) {
    return k.a / (2.0 * p_plus) -
           k.b * std::pow(rho, p_minus * (k.gamma + 1.0) - p_plus) /
               (std::pow(p_minus, k.gamma + 1.0) * (k.gamma + 1.0)) -
           (C2 / r_minus) * g_norm_r0 * std::pow(rho, r_minus - p_plus);
}

double lambda_bar_formula(double C_rho, double q_minus, double C1, double f_norm_q0, double rho,
                          double p_plus) {
    return C_rho * q_minus / (2.0 * C1 * f_norm_q0 * std::pow(rho, q_minus - p_plus));
}

double young_epsilon(double a, double p_plus, double C3) { return a / (2.0 * p_plus * C3); }

double young_constant(double eps, double p_plus) {
    const double s = p_plus;
    const double sp = p_plus / (p_plus - 1.0);
    return (1.0 / sp) * std::pow(eps * s, -sp / s);
}

double delta_formula(double C_rho, double rho, double p_plus, double C3, double C_eps) {
    return 0.5 * std::pow(C_rho * std::pow(rho, p_plus) / (2.0 * C3 * C_eps),
                          p_plus / (p_plus - 1.0));
}

double alpha_formula(double C_rho, double rho, double p_plus) {
    return 0.25 * C_rho * std::pow(rho, p_plus);
}

std::vector<double> default_rho_grid() {
    std::vector<double> g;
    double rho = 0.5;
    for (int k = 1; k <= 30; ++k, rho *= 0.5) g.push_back(rho);
    return g;
}

namespace {

struct WeightNorms {
    double f_q0 = 0.0;
    double g_r0 = 0.0;
    double h_conj = 0.0;
};

WeightNorms weight_norms(const ProblemData& prob) {
    WeightNorms n;
    n.f_q0 = luxemburg_norm(prob.f, prob.derived.q0).value;
    n.g_r0 = luxemburg_norm(prob.g, prob.derived.r0).value;
    n.h_conj = luxemburg_norm(prob.h, prob.derived.p_star_conjugate).value;
    return n;
}

} // namespace

HypothesisReport check_H2(const ProblemData& prob, H2Mode mode) {
    HypothesisReport rep;
    auto fail = [&](const char* cond, Eigen::Index node, std::vector<double> vals) {
        rep.passed = false;
        rep.violations.push_back(Violation{cond, node, std::move(vals)});
    };

    for (Eigen::Index i = 0; i < prob.g.size(); ++i)
        if (prob.g.values()[i] < 0.0) {
            fail("0 <= g(x)", i, {prob.g.values()[i]});
            break;
        }

    if (!prob.f.values().isFinite().all()) fail("f finite", -1, {});
    if (!prob.g.values().isFinite().all()) fail("g finite", -1, {});
    if (!prob.h.values().isFinite().all()) fail("h finite", -1, {});

    if (rep.passed) {
        const WeightNorms n = weight_norms(prob);
        if (!std::isfinite(n.f_q0)) fail("|f|_{q0} finite", -1, {n.f_q0});
        if (!std::isfinite(n.g_r0)) fail("|g|_{r0} finite", -1, {n.g_r0});
        if (!std::isfinite(n.h_conj)) fail("|h|_{p*'} finite", -1, {n.h_conj});
        if (!std::isfinite(prob.h.max_abs())) fail("|h|_inf finite", -1, {});
    }

    if (mode == H2Mode::h2prime) {
        if (prob.h.max_abs() != 0.0) fail("h(x) == 0 required", -1, {prob.h.max_abs()});
        bool nonempty = false;
        for (std::size_t i = 0; i < prob.omega0_mask.size(); ++i) {
            if (!prob.omega0_mask[i]) continue;
            nonempty = true;
            if (!(prob.g.values()[static_cast<Eigen::Index>(i)] > 0.0)) {
                fail("g > 0 on omega0", static_cast<Eigen::Index>(i),
                     {prob.g.values()[static_cast<Eigen::Index>(i)]});
                break;
            }
        }
        if (!nonempty) fail("non-empty open domain omega0", -1, {});
    }
    return rep;
}

GeometryConstants mountain_pass_constants(const ProblemData& prob,
                                          const EmbeddingConstants& constants,
                                          const std::vector<double>& rho_grid) {
    const auto& k = prob.kirchhoff;
    const double pm = prob.p.p_minus();
    const double pp = prob.p.p_plus();
    const double qm = prob.q.p_minus();
    const double rm = prob.r.p_minus();

    // (H1) guarantees both exponents of rho are positive, so C_rho tends to
    // a/(2 p_plus) as rho -> 0.
    if (!(pm * (k.gamma + 1.0) - pp > 0.0) || !(rm - pp > 0.0))
        throw std::invalid_argument(
            "mountain_pass_constants requires p_-(gamma+1) > p_+ and r_- > p_+");
    if (rho_grid.empty()) throw std::invalid_argument("rho grid is empty");

    const WeightNorms norms = weight_norms(prob);

    GeometryConstants geo;
    geo.constants = constants;
    geo.f_norm_q0 = norms.f_q0;
    geo.g_norm_r0 = norms.g_r0;
    geo.h_norm_conj = norms.h_conj;

    const double margin = k.a / (4.0 * pp);
    double best_rho = 0.0, best_crho = 0.0;
    for (double rho : rho_grid) {
        const double crho = c_rho_formula(rho, k, pm, pp, rm, constants.C2, norms.g_r0);
        if (crho >= margin && rho > best_rho) {
            best_rho = rho;
            best_crho = crho;
        }
    }
    if (best_rho == 0.0)
        throw NoAdmissibleRho("no rho in the grid satisfies C_rho >= a/(4 p_plus)");

    geo.rho = best_rho;
    geo.C_rho = best_crho;
    geo.epsilon = young_epsilon(k.a, pp, constants.C3);
    geo.C_epsilon = young_constant(geo.epsilon, pp);
    geo.lambda_bar = lambda_bar_formula(best_crho, qm, constants.C1, norms.f_q0, best_rho, pp);
    geo.delta = delta_formula(best_crho, best_rho, pp, constants.C3, geo.C_epsilon);
    geo.alpha = alpha_formula(best_crho, best_rho, pp);
    return geo;
}

double sphere_sample_energy(const ProblemData& prob, const GeometryConstants& geo,
                            const GridFunction& u) {
    const double nrm = x_norm(u, prob.p);
    if (std::abs(nrm - geo.rho) > 1e-6 * geo.rho)
        throw std::invalid_argument("sphere sample must satisfy ||u||_X = rho (has " +
                                    std::to_string(nrm) + ", rho = " + std::to_string(geo.rho) +
                                    ")");
    return energy_J(u, prob).total;
}

HypothesisReport verify_sphere_lower_bound(const ProblemData& prob, const GeometryConstants& geo,
                                           int samples, std::uint64_t seed) {
    HypothesisReport rep;
    rep.min_energy = std::numeric_limits<double>::infinity();

    // Theorem 1.1 regime gates; flagged rather than thrown so callers can
    // surface the violated inequality.
    if (!(prob.lambda > 0.0 && prob.lambda < geo.lambda_bar)) {
        rep.passed = false;
        rep.violations.push_back(
            Violation{"lambda in (0, lambda_bar)", -1, {prob.lambda, geo.lambda_bar}});
        return rep;
    }
    if (prob.mode == H2Mode::h2 && !(geo.h_norm_conj < geo.delta)) {
        rep.passed = false;
        rep.violations.push_back(
            Violation{"|h|_{p*'} < delta", -1, {geo.h_norm_conj, geo.delta}});
        return rep;
    }

    Rng rng(seed);
    for (int i = 0; i < samples; ++i) {
        GridFunction u = random_field(prob.grid, rng);
        const double nrm = x_norm(u, prob.p);
        if (!(nrm > 1e-300)) continue;
        u *= geo.rho / nrm;
        const double J = sphere_sample_energy(prob, geo, u);
        rep.min_energy = std::min(rep.min_energy, J);
        if (!(J >= geo.alpha)) {
            rep.passed = false;
            rep.violations.push_back(Violation{"J >= alpha on sphere", i, {J, geo.alpha}});
        }
    }
    return rep;
}

DivergenceRay find_divergence_ray(const ProblemData& prob, const GeometryConstants& geo,
                                  const GridFunction& phi0,
                                  const std::vector<double>& t_schedule) {
    if (phi0.max_abs() == 0.0)
        throw std::invalid_argument("find_divergence_ray: phi0 must be nonzero");
    if (t_schedule.empty())
        throw std::invalid_argument("find_divergence_ray: empty schedule");

    auto J_at = [&](double t) { return energy_J(t * phi0, prob).total; };

    for (std::size_t k = 0; k < t_schedule.size(); ++k) {
        const double t0 = t_schedule[k];
        const double J0 = J_at(t0);
        if (!(J0 < 0.0)) continue;
        if (!(x_norm(t0 * phi0, prob.p) > geo.rho)) continue;

        const double t1 = k + 1 < t_schedule.size() ? t_schedule[k + 1] : 2.0 * t0;
        const double t2 = k + 2 < t_schedule.size() ? t_schedule[k + 2] : 2.0 * t1;
        const double J1 = J_at(t1);
        const double J2 = J_at(t2);
        if (J0 > J1 && J1 > J2) {
            DivergenceRay ray{t0 * phi0, t0, J0, {J0, J1, J2}};
            return ray;
        }
    }
    throw NoDescentFound("no scheduled t gives ||t phi0|| > rho with J < 0 and decreasing tail");
}

namespace {

SmallTResult scan_small_t(const ProblemData& prob, const GeometryConstants& geo,
                          const GridFunction& psi0, const std::vector<double>& t_schedule) {
    SmallTResult best;
    bool found = false;
    for (double t : t_schedule) {
        if (!(t > 0.0 && t < 1.0)) continue;
        const GridFunction ut = t * psi0;
        const double J = energy_J(ut, prob).total;
        if (J < 0.0 && x_norm(ut, prob.p) < geo.rho) {
            if (!found || t < best.t) best = SmallTResult{t, J};
            found = true;
        }
    }
    if (!found)
        throw PositivityNotFound("no scheduled t in (0,1) has J(t psi0) < 0 inside the ball");
    return best;
}

} // namespace

SmallTResult verify_small_t_negative(const ProblemData& prob, const GeometryConstants& geo,
                                     const GridFunction& psi0,
                                     const std::vector<double>& t_schedule) {
    if (prob.h.max_abs() == 0.0)
        throw NotApplicable("h == 0: use the sign-changing-f starter instead");
    const double pairing = (prob.grid->node_weights() * prob.h.values() * psi0.values()).sum();
    if (!(pairing > 0.0))
        throw std::invalid_argument("verify_small_t_negative requires int h psi0 > 0, got " +
                                    std::to_string(pairing));
    return scan_small_t(prob, geo, psi0, t_schedule);
}

SmallTResult verify_small_t_negative_f(const ProblemData& prob, const GeometryConstants& geo,
                                       const GridFunction& psi0,
                                       const std::vector<double>& t_schedule) {
    const double pairing = (prob.grid->node_weights() * prob.f.values() *
                            psi0.values().abs().pow(prob.q.values()))
                               .sum();
    if (!(pairing > 0.0))
        throw std::invalid_argument(
            "verify_small_t_negative_f requires int f |psi0|^q > 0, got " +
            std::to_string(pairing));
    return scan_small_t(prob, geo, psi0, t_schedule);
}

namespace {

double bump_profile(double t) {
    // C-infinity bump: 1 at t = 0, 0 for |t| >= 1.
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

GridFunction bump_on_box(const GridPtr& grid, const std::array<double, 2>& lo,
                         const std::array<double, 2>& hi) {
    Eigen::ArrayXd v(grid->num_nodes());
    for (Eigen::Index node = 0; node < grid->num_nodes(); ++node) {
        double val = 1.0;
        for (int a = 0; a < grid->dim(); ++a) {
            const double c = 0.5 * (lo[static_cast<std::size_t>(a)] + hi[static_cast<std::size_t>(a)]);
            const double w = 0.5 * (hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]);
            val *= w > 0.0 ? bump_profile((grid->coord(node, a) - c) / w) : 0.0;
        }
        v[node] = val;
    }
    return apply_navier_bc(GridFunction(grid, std::move(v)));
}

} // namespace

GridFunction bump_on_mask(const GridPtr& grid, const std::vector<bool>& mask) {
    std::array<double, 2> lo{std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity()};
    std::array<double, 2> hi{-std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
    bool any = false;
    for (Eigen::Index node = 0; node < grid->num_nodes(); ++node) {
        if (!mask[static_cast<std::size_t>(node)]) continue;
        any = true;
        for (int a = 0; a < grid->dim(); ++a) {
            lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)],
                                                       grid->coord(node, a));
            hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)],
                                                       grid->coord(node, a));
        }
    }
    if (!any) throw std::invalid_argument("bump_on_mask: empty mask");
    return bump_on_box(grid, lo, hi);
}

GridFunction bump_on_positive_part(const GridFunction& weight) {
    const GridPtr& grid = weight.grid_ptr();
    Eigen::Index peak = 0;
    weight.values().maxCoeff(&peak);
    if (!(weight.values()[peak] > 0.0))
        throw std::invalid_argument("bump_on_positive_part: weight has no positive values");

    // Expand a box from the peak along each axis while the weight stays
    // strictly positive.
    const int n = grid->nodes_per_axis();
    std::array<double, 2> lo{0.0, 0.0}, hi{0.0, 0.0};
    for (int a = 0; a < grid->dim(); ++a) {
        const Eigen::Index stride = (grid->dim() == 1 || a == 0) ? 1 : n;
        const Eigen::Index i0 = grid->dim() == 1 ? peak : (a == 0 ? peak % n : peak / n);
        Eigen::Index left = i0, right = i0;
        while (left > 0 && weight.values()[peak - (i0 - (left - 1)) * stride] > 0.0) --left;
        while (right < n - 1 && weight.values()[peak + ((right + 1) - i0) * stride] > 0.0)
            ++right;
        lo[static_cast<std::size_t>(a)] = static_cast<double>(left) * grid->spacing(a);
        hi[static_cast<std::size_t>(a)] = static_cast<double>(right) * grid->spacing(a);
    }
    return bump_on_box(grid, lo, hi);
}

} // namespace pxk
