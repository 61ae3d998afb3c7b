#include "pxk/exponents.hpp"

#include <cmath>
#include <stdexcept>

namespace pxk {

namespace {

// Discrete continuity proxy: along every grid edge the jump may not exceed
// the Lipschitz bound times the spacing (plus float slack).
void check_continuity(const Grid& g, const Eigen::ArrayXd& v, double bound) {
    if (!std::isfinite(bound)) return;
    const int n = g.nodes_per_axis();
    const double slack = 1e-12;
    for (int a = 0; a < g.dim(); ++a) {
        const double h = g.spacing(a);
        const Eigen::Index stride = (g.dim() == 1 || a == 0) ? 1 : n;
        for (Eigen::Index node = 0; node < g.num_nodes(); ++node) {
            const Eigen::Index i = g.dim() == 1 ? node : (a == 0 ? node % n : node / n);
            if (i + 1 >= n) continue;
            const double jump = std::abs(v[node + stride] - v[node]);
            if (jump > bound * h + slack)
                throw ContinuityViolation("exponent jump " + std::to_string(jump) +
                                          " exceeds Lipschitz bound at node " +
                                          std::to_string(node));
        }
    }
}

} // namespace

ExponentField ExponentField::from_values(GridPtr grid, Eigen::ArrayXd values, int analysis_dim,
                                         double lipschitz_bound) {
    if (values.size() != grid->num_nodes())
        throw GridMismatch("ExponentField: value count does not match grid");
    if (analysis_dim <= 3)
        throw NonAdmissibleExponent("analysis dimension must exceed 3");
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!(values[i] > 1.0) || !std::isfinite(values[i]))
            throw NonAdmissibleExponent("exponent must be > 1 at every node (node " +
                                        std::to_string(i) + " has " +
                                        std::to_string(values[i]) + ")");
    check_continuity(*grid, values, lipschitz_bound);

    ExponentField f;
    f.grid_ = std::move(grid);
    f.p_minus_ = values.minCoeff();
    f.p_plus_ = values.maxCoeff();
    f.values_ = std::move(values);
    f.analysis_dim_ = analysis_dim;
    return f;
}

ExponentField ExponentField::constant(GridPtr grid, double value, int analysis_dim) {
    Eigen::ArrayXd v = Eigen::ArrayXd::Constant(grid->num_nodes(), value);
    return from_values(std::move(grid), std::move(v), analysis_dim);
}

ExponentField build_exponent_field(GridPtr grid, const Eigen::ArrayXd& node_values,
                                   int analysis_dim, double lipschitz_bound) {
    ExponentField f = ExponentField::from_values(std::move(grid), node_values, analysis_dim,
                                                 lipschitz_bound);
    const double limit = static_cast<double>(analysis_dim) / 3.0;
    if (!(f.p_plus() < limit))
        throw NonAdmissibleExponent("p_plus = " + std::to_string(f.p_plus()) +
                                    " violates p_plus < N/3 = " + std::to_string(limit));
    return f;
}

ExponentField critical_exponent(const ExponentField& p) {
    const double N = static_cast<double>(p.analysis_dim());
    if (!(p.p_plus() < N / 3.0))
        throw NonAdmissibleExponent("critical_exponent requires p_plus < N/3");
    Eigen::ArrayXd v = N * p.values() / (N - 3.0 * p.values());
    return ExponentField::from_values(p.grid_ptr(), std::move(v), p.analysis_dim());
}

DerivedExponents derived_exponents(const ExponentField& p, const ExponentField& q,
                                   const ExponentField& r) {
    require_same_grid(p.grid(), q.grid(), "derived_exponents");
    require_same_grid(p.grid(), r.grid(), "derived_exponents");

    DerivedExponents d{critical_exponent(p), ExponentField{}, ExponentField{}, ExponentField{}};
    const Eigen::ArrayXd& ps = d.p_star.values();

    auto ratio_field = [&](const Eigen::ArrayXd& s, const char* name, bool& large_flag) {
        Eigen::ArrayXd den = ps - s;
        for (Eigen::Index i = 0; i < den.size(); ++i) {
            if (!(den[i] > 0.0))
                throw ExponentOutOfRange(std::string(name) +
                                         ": exponent reaches p* at node " + std::to_string(i));
            if (den[i] < 1e-6) large_flag = true;
        }
        return ExponentField::from_values(p.grid_ptr(), ps / den, p.analysis_dim());
    };

    d.q0 = ratio_field(q.values(), "q0", d.q0_large);
    d.r0 = ratio_field(r.values(), "r0", d.r0_large);

    bool unused = false;
    d.p_star_conjugate = ratio_field(Eigen::ArrayXd::Ones(ps.size()), "p*-conjugate", unused);
    return d;
}

HypothesisReport check_H1(const ExponentField& p, const ExponentField& q,
                          const ExponentField& r, double gamma, double margin) {
    require_same_grid(p.grid(), q.grid(), "check_H1");
    require_same_grid(p.grid(), r.grid(), "check_H1");
    if (!(gamma > 0.0)) throw std::invalid_argument("check_H1: gamma must be positive");

    const ExponentField pstar = critical_exponent(p);
    const double pm = p.p_minus();
    const double pp = p.p_plus();

    HypothesisReport rep;
    auto fail = [&](const char* cond, Eigen::Index node, std::vector<double> vals) {
        rep.passed = false;
        rep.violations.push_back(Violation{cond, node, std::move(vals)});
    };

    for (Eigen::Index i = 0; i < p.grid().num_nodes() && rep.passed; ++i) {
        const double qi = q.values()[i];
        const double ri = r.values()[i];
        const double pi_star = pstar.values()[i];
        if (!(1.0 < qi - margin)) {
            fail("1 < q(x)", i, {qi});
        } else if (!(qi < pm - margin)) {
            fail("q(x) < p_minus", i, {qi, pm});
        } else if (!(pp < (gamma + 1.0) * pm - margin)) {
            fail("p_plus < (gamma+1) p_minus", i, {pp, (gamma + 1.0) * pm});
        } else if (!((gamma + 1.0) * pp < ri - margin)) {
            fail("(gamma+1) p_plus < r(x)", i, {(gamma + 1.0) * pp, ri});
        } else if (!(ri < pi_star - margin)) {
            fail("r(x) < p*(x)", i, {ri, pi_star});
        }
    }
    return rep;
}

} // namespace pxk
