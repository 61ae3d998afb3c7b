#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pxk/exponents.hpp"
#include "pxk/mesh.hpp"
#include "pxk/random.hpp"
#include "pxk/spaces.hpp"

using namespace pxk;

namespace {

GridFunction sampled(const GridPtr& g, double (*f)(double)) {
    Eigen::ArrayXd v(g->num_nodes());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(g->coord(i, 0));
    return GridFunction(g, std::move(v));
}

} // namespace

TEST_CASE("build_grid accepts valid specs and rejects bad ones") {
    const GridPtr g1 = build_grid(1, {1.0}, 65);
    CHECK(g1->num_nodes() == 65);
    CHECK(g1->spacing(0) == doctest::Approx(1.0 / 64).epsilon(1e-15));

    const GridPtr g2 = build_grid(2, {1.0, 1.0}, 33);
    CHECK(g2->num_nodes() == 33 * 33);

    CHECK_THROWS_AS(build_grid(1, {1.0}, 5), BadGridSpec);
    CHECK_THROWS_AS(build_grid(3, {1.0, 1.0, 1.0}, 33), BadGridSpec);
    CHECK_THROWS_AS(build_grid(1, {-1.0}, 33), BadGridSpec);
    CHECK_THROWS_AS(build_grid(2, {1.0}, 33), BadGridSpec);
}

TEST_CASE("laplacian is exact on constants and quadratics") {
    const GridPtr g = build_grid(1, {1.0}, 65);

    const GridFunction c(g, Eigen::ArrayXd::Constant(g->num_nodes(), 3.25));
    const GridFunction lc = laplacian(c);
    for (Eigen::Index i = 0; i < lc.size(); ++i) CHECK(lc.values()[i] == 0.0);

    const GridFunction q = sampled(g, [](double x) { return x * x; });
    const GridFunction lq = laplacian(q);
    for (Eigen::Index i = 1; i + 1 < lq.size(); ++i)
        CHECK(lq.values()[i] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("laplacian converges at second order on sin(pi x)") {
    const GridPtr g = build_grid(1, {1.0}, 257);
    const GridFunction u = sampled(g, [](double x) { return std::sin(M_PI * x); });
    const GridFunction lu = laplacian(u);
    double err = 0.0;
    for (Eigen::Index i = 1; i + 1 < lu.size(); ++i) {
        const double exact = -M_PI * M_PI * std::sin(M_PI * g->coord(i, 0));
        err = std::max(err, std::abs(lu.values()[i] - exact));
    }
    CHECK(err < 1e-3);
}

TEST_CASE("grad_laplacian: constants, cubics, smooth convergence") {
    const GridPtr g = build_grid(1, {1.0}, 65);

    const GridFunction c(g, Eigen::ArrayXd::Constant(g->num_nodes(), -1.7));
    const VectorField glc = grad_laplacian(c);
    for (Eigen::Index i = 0; i < g->num_nodes(); ++i) CHECK(glc.component(0)[i] == 0.0);

    // third derivative of x^3 is 6, exact away from the walls
    const GridFunction cu = sampled(g, [](double x) { return x * x * x; });
    const VectorField glcu = grad_laplacian(cu);
    for (Eigen::Index i = 2; i + 3 < g->num_nodes(); ++i)
        CHECK(glcu.component(0)[i] == doctest::Approx(6.0).epsilon(1e-9));

    // O(h^2) on sin(pi x), slope >= 1.9 under refinement
    std::vector<double> errs;
    for (int n : {65, 129, 257}) {
        const GridPtr gn = build_grid(1, {1.0}, n);
        const GridFunction u = sampled(gn, [](double x) { return std::sin(M_PI * x); });
        const VectorField gl = grad_laplacian(u);
        double err = 0.0;
        for (Eigen::Index i = 0; i < gn->num_nodes(); ++i) {
            const double exact = -std::pow(M_PI, 3) * std::cos(M_PI * gn->coord(i, 0));
            err = std::max(err, std::abs(gl.component(0)[i] - exact));
        }
        errs.push_back(err);
    }
    CHECK(errs[2] < 2e-3);
    CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
    CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("laplacian is linear") {
    const GridPtr g = build_grid(1, {1.0}, 65);
    Rng rng(31);
    const GridFunction u = random_field(g, rng);
    const GridFunction v = random_field(g, rng);
    const GridFunction lhs = laplacian(2.5 * u - 0.75 * v);
    const GridFunction rhs = 2.5 * laplacian(u) - 0.75 * laplacian(v);
    CHECK((lhs.values() - rhs.values()).abs().maxCoeff() <
          1e-10 * (1.0 + rhs.values().abs().maxCoeff()));
}

TEST_CASE("apply_navier_bc zeroes the trace and the nested traces vanish") {
    const GridPtr g = build_grid(1, {1.0}, 129);

    const GridFunction z(g);
    CHECK(apply_navier_bc(z).max_abs() == 0.0);

    // sin(pi x) satisfies all three traces analytically
    const GridFunction s = sampled(g, [](double x) { return std::sin(M_PI * x); });
    const GridFunction sb = apply_navier_bc(s);
    for (Eigen::Index i = 1; i + 1 < g->num_nodes(); ++i)
        CHECK(sb.values()[i] == s.values()[i]);

    Rng rng(5);
    const GridFunction u = random_field(g, rng);
    const GridFunction w = laplacian(u);
    const GridFunction w2 = laplacian(w);
    for (Eigen::Index i = 0; i < g->num_nodes(); ++i) {
        if (!g->is_boundary(i)) continue;
        CHECK(u.values()[i] == 0.0);
        CHECK(w.values()[i] == 0.0);
        CHECK(w2.values()[i] == 0.0);
    }
}

TEST_CASE("integrate: trapezoid exactness and the pi^6/2 oracle") {
    const GridPtr g = build_grid(1, {1.0}, 257);
    CHECK(integrate(GridFunction(g, Eigen::ArrayXd::Ones(g->num_nodes()))) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(sampled(g, [](double x) { return x; })) ==
          doctest::Approx(0.5).epsilon(1e-14));

    const GridFunction w = sampled(g, [](double x) {
        const double c = std::pow(M_PI, 3) * std::cos(M_PI * x);
        return c * c;
    });
    CHECK(integrate(w) == doctest::Approx(std::pow(M_PI, 6) / 2.0).epsilon(1e-2));
}

TEST_CASE("x_norm: zero, homogeneity, sin oracle, triangle inequality") {
    const GridPtr g = build_grid(1, {1.0}, 129);
    const ExponentField p = ExponentField::constant(g, 2.0, 7);

    CHECK(x_norm(GridFunction(g), p) == 0.0);

    const GridFunction s = sampled(g, [](double x) { return std::sin(M_PI * x); });
    CHECK(x_norm(s, p) ==
          doctest::Approx(std::sqrt(std::pow(M_PI, 6) / 2.0)).epsilon(1e-2));

    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        const GridFunction u = random_field(g, rng);
        const double t = rng.uniform(-3.0, 3.0);
        const double lhs = x_norm(t * u, p);
        const double rhs = std::abs(t) * x_norm(u, p);
        CHECK(std::abs(lhs - rhs) <= 1e-8 * (1.0 + rhs));

        const GridFunction v = random_field(g, rng);
        CHECK(x_norm(u + v, p) <= x_norm(u, p) + x_norm(v, p) + 1e-8);
    }
}

TEST_CASE("stiffness matrix is the symmetric quadratic form of the gradient energy") {
    const GridPtr g = build_grid(1, {1.0}, 65);
    Rng rng(23);
    const GridFunction u = random_field(g, rng);
    const GridFunction v = random_field(g, rng);

    const auto& K = g->gradlap_stiffness();
    const double kuv = u.values().matrix().dot(K * v.values().matrix());
    const double kvu = v.values().matrix().dot(K * u.values().matrix());
    CHECK(std::abs(kuv - kvu) <= 1e-10 * (1.0 + std::abs(kuv)));

    // s(u) at p = 2 equals u^T K u / 2
    const ExponentField p2 = ExponentField::constant(g, 2.0, 7);
    const GridFunction mag = grad_laplacian(u).magnitude();
    const double s_quad = (g->node_weights() * mag.values().square() / 2.0).sum();
    const double s_K = 0.5 * u.values().matrix().dot(K * u.values().matrix());
    CHECK(s_quad == doctest::Approx(s_K).epsilon(1e-8));

    // discrete integration by parts at p = 2: the pairing of grad-laplacians
    // is symmetric
    double suv = 0.0, svu = 0.0;
    const VectorField gu = grad_laplacian(u), gv = grad_laplacian(v);
    for (int a = 0; a < g->dim(); ++a) {
        suv += (g->node_weights() * gu.component(a) * gv.component(a)).sum();
        svu += (g->node_weights() * gv.component(a) * gu.component(a)).sum();
    }
    CHECK(std::abs(suv - svu) <= 1e-10 * (1.0 + std::abs(suv)));
}

TEST_CASE("2D stencils behave on separable smooth fields") {
    const GridPtr g = build_grid(2, {1.0, 1.0}, 65);

    Eigen::ArrayXd v(g->num_nodes());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double x = g->coord(i, 0), y = g->coord(i, 1);
        v[i] = x * x + y * y;
    }
    const GridFunction q(g, std::move(v));
    const GridFunction lq = laplacian(q);
    for (Eigen::Index i = 0; i < g->num_nodes(); ++i)
        if (!g->is_boundary(i))
            CHECK(lq.values()[i] == doctest::Approx(4.0).epsilon(1e-8));

    Eigen::ArrayXd sv(g->num_nodes());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        sv[i] = std::sin(M_PI * g->coord(i, 0)) * std::sin(M_PI * g->coord(i, 1));
    const GridFunction s(g, std::move(sv));
    const VectorField gl = grad_laplacian(s);
    double err = 0.0;
    for (Eigen::Index i = 0; i < g->num_nodes(); ++i) {
        const double x = g->coord(i, 0), y = g->coord(i, 1);
        const double exact = -2.0 * std::pow(M_PI, 3) * std::cos(M_PI * x) *
                             std::sin(M_PI * y);
        err = std::max(err, std::abs(gl.component(0)[i] - exact));
    }
    CHECK(err < 2.0 * std::pow(M_PI, 3) * 0.01); // ~1% of the amplitude at n=65
}

TEST_CASE("grid function CSV serialization") {
    const GridPtr g = build_grid(1, {1.0}, 9);
    const GridFunction u = sampled(g, [](double x) { return 2.0 * x; });
    std::ostringstream os;
    write_csv(u, os);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,value");
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(line.find(',') != std::string::npos);
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("grid mismatch is rejected") {
    const GridPtr a = build_grid(1, {1.0}, 65);
    const GridPtr b = build_grid(1, {1.0}, 129);
    GridFunction ua(a), ub(b);
    CHECK_THROWS_AS(ua += ub, GridMismatch);
}
