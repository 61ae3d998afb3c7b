#include <doctest.h>

#include <cmath>

#include "pxk/config.hpp"
#include "pxk/geometry.hpp"
#include "pxk/random.hpp"

using namespace pxk;

namespace {

const ProblemData& canonical() {
    static ProblemData prob = materialize(canonical_spec());
    return prob;
}

const EmbeddingConstants& canonical_constants() {
    static EmbeddingConstants c = estimate_embedding_constants(
        canonical().p, canonical().q, canonical().r, 512, substream(7, 1));
    return c;
}

const GeometryConstants& canonical_geometry() {
    static GeometryConstants geo =
        mountain_pass_constants(canonical(), canonical_constants(), default_rho_grid());
    return geo;
}

} // namespace

TEST_CASE("check_H2 verdicts") {
    // canonical instance passes plain H2
    CHECK(check_H2(canonical(), H2Mode::h2).passed);

    // one negative g node fails with a location
    ProblemData bad = canonical();
    Eigen::ArrayXd gv = bad.g.values();
    gv[40] = -0.5;
    bad.g = GridFunction(bad.grid, std::move(gv));
    const HypothesisReport rep = check_H2(bad, H2Mode::h2);
    CHECK_FALSE(rep.passed);
    CHECK(rep.violations.front().condition == "0 <= g(x)");
    CHECK(rep.violations.front().location == 40);

    // H2' passes for the h == 0 instance
    CHECK(check_H2(materialize(theorem2_spec()), H2Mode::h2prime).passed);

    // H2' with nonzero h fails naming the requirement
    const HypothesisReport h_rep = check_H2(canonical(), H2Mode::h2prime);
    CHECK_FALSE(h_rep.passed);
    bool found = false;
    for (const auto& v : h_rep.violations) found = found || v.condition.find("h(x)") == 0;
    CHECK(found);

    // empty omega0 fails
    ExperimentSpec spec = theorem2_spec();
    spec.omega0_lo = 2.0;
    spec.omega0_hi = 3.0; // outside the unit domain
    const HypothesisReport empty_rep = check_H2(materialize(spec), H2Mode::h2prime);
    CHECK_FALSE(empty_rep.passed);
}

TEST_CASE("geometry constants: limits and formula re-evaluation") {
    // b -> 0 with g == 0: C_rho == a/(2 p_plus) for every rho, alpha keeps
    // the closed reduction a rho^{p_+}/(8 p_+)
    ExperimentSpec spec = canonical_spec();
    spec.b = 1e-12;
    spec.g = WeightProfile{};
    spec.r = ExponentProfile{ExponentProfile::Kind::constant, 5.0, 0.0};
    const ProblemData prob = materialize(spec);
    const GeometryConstants geo =
        mountain_pass_constants(prob, canonical_constants(), default_rho_grid());
    CHECK(geo.rho == 0.5);
    CHECK(geo.C_rho == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(geo.alpha == doctest::Approx(1.0 * std::pow(0.5, 2.0) / 16.0).epsilon(1e-9));

    // doubling a doubles the rho -> 0 limit of C_rho
    const double c1 = c_rho_formula(1e-12, {1.0, 1.0, 1.0}, 2.0, 2.0, 5.0, 0.01, 1.0);
    const double c2 = c_rho_formula(1e-12, {2.0, 1.0, 1.0}, 2.0, 2.0, 5.0, 0.01, 1.0);
    CHECK(c2 == doctest::Approx(2.0 * c1).epsilon(1e-9));

    // every published constant matches independent re-evaluation
    const GeometryConstants g0 = canonical_geometry();
    const auto& k = canonical().kirchhoff;
    const double pp = canonical().p.p_plus();
    CHECK(g0.C_rho == doctest::Approx(c_rho_formula(g0.rho, k, canonical().p.p_minus(), pp,
                                                    canonical().r.p_minus(),
                                                    g0.constants.C2, g0.g_norm_r0))
                          .epsilon(1e-12));
    CHECK(g0.lambda_bar ==
          doctest::Approx(lambda_bar_formula(g0.C_rho, canonical().q.p_minus(),
                                             g0.constants.C1, g0.f_norm_q0, g0.rho, pp))
              .epsilon(1e-12));
    CHECK(g0.epsilon == doctest::Approx(young_epsilon(k.a, pp, g0.constants.C3)).epsilon(1e-12));
    CHECK(g0.C_epsilon == doctest::Approx(young_constant(g0.epsilon, pp)).epsilon(1e-12));
    CHECK(g0.delta == doctest::Approx(delta_formula(g0.C_rho, g0.rho, pp, g0.constants.C3,
                                                    g0.C_epsilon))
                          .epsilon(1e-12));
    CHECK(g0.alpha == doctest::Approx(alpha_formula(g0.C_rho, g0.rho, pp)).epsilon(1e-12));
    CHECK(g0.C_rho > 0.0);

    // pinned regression values for the seeded canonical constants
    CHECK(g0.rho == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g0.C_rho == doctest::Approx(0.21874999994925942).epsilon(1e-6));
    CHECK(g0.delta == doctest::Approx(1763.0216660048882).epsilon(1e-6));
}

TEST_CASE("lambda_bar monotonicity in C_rho, C1 and |f|") {
    const double base = lambda_bar_formula(0.2, 1.5, 0.01, 0.7, 0.5, 2.0);
    CHECK(lambda_bar_formula(0.25, 1.5, 0.01, 0.7, 0.5, 2.0) > base);
    CHECK(lambda_bar_formula(0.2, 1.5, 0.02, 0.7, 0.5, 2.0) < base);
    CHECK(lambda_bar_formula(0.2, 1.5, 0.01, 1.4, 0.5, 2.0) < base);
}

TEST_CASE("Young inequality constant is valid and nearly sharp") {
    Rng rng(314);
    for (double pp : {2.0, 2.2, 3.0}) {
        const double eps = rng.uniform(0.05, 5.0);
        const double ceps = young_constant(eps, pp);
        const double sp = pp / (pp - 1.0);
        double max_ratio = 0.0;
        for (int rep = 0; rep < 1000; ++rep) {
            const double x = std::pow(10.0, rng.uniform(-3.0, 3.0));
            const double y = std::pow(10.0, rng.uniform(-3.0, 3.0));
            const double bound = eps * std::pow(x, pp) + ceps * std::pow(y, sp);
            CHECK(x * y <= bound * (1.0 + 1e-12));
            max_ratio = std::max(max_ratio, x * y / bound);
        }
        // the constant is sharp: some pair comes close to equality
        CHECK(max_ratio > 0.5);
    }
}

TEST_CASE("no admissible rho when the g-term overwhelms every candidate") {
    ExperimentSpec spec = canonical_spec();
    spec.g = WeightProfile{WeightProfile::Kind::bump, 1e30, 1.0, 0.0, 0.3, 0.7};
    const ProblemData prob = materialize(spec);
    CHECK_THROWS_AS(
        mountain_pass_constants(prob, canonical_constants(), {0.5}), NoAdmissibleRho);
}

TEST_CASE("sphere lower bound: seeded verification and gates") {
    const HypothesisReport rep =
        verify_sphere_lower_bound(canonical(), canonical_geometry(), 128, substream(7, 2));
    CHECK(rep.passed);
    CHECK(rep.min_energy >= canonical_geometry().alpha);

    // off-sphere samples are rejected as out-of-spec inputs
    Rng rng(21);
    GridFunction u = random_field(canonical().grid, rng);
    u *= (0.5 * canonical_geometry().rho) / x_norm(u, canonical().p);
    CHECK_THROWS_AS(sphere_sample_energy(canonical(), canonical_geometry(), u),
                    std::invalid_argument);

    // lambda above the bar is flagged, not silently accepted
    ProblemData above = canonical();
    above.lambda = 1e9;
    const HypothesisReport flagged =
        verify_sphere_lower_bound(above, canonical_geometry(), 8, 1);
    CHECK_FALSE(flagged.passed);
    CHECK(flagged.violations.front().condition.find("lambda") != std::string::npos);
}

TEST_CASE("divergence ray: postconditions, g == 0 fallback, exhaustion") {
    const ProblemData& prob = canonical();
    const GeometryConstants& geo = canonical_geometry();
    const GridFunction phi0 = bump_on_mask(prob.grid, prob.omega0_mask);

    CHECK(energy_J(0.0 * phi0, prob).total == 0.0);

    const double t_rho = geo.rho / x_norm(phi0, prob.p);
    std::vector<double> schedule;
    for (int k = 1; k <= 90; ++k) schedule.push_back(t_rho * std::pow(2.0, 0.5 * k));
    const DivergenceRay ray = find_divergence_ray(prob, geo, phi0, schedule);
    CHECK(ray.J_e < 0.0);
    CHECK(x_norm(ray.e, prob.p) > geo.rho);
    CHECK(ray.tail[0] > ray.tail[1]);
    CHECK(ray.tail[1] > ray.tail[2]);

    // with g == 0 and b > 0 the -b s^{gamma+1} term still forces the ray
    ExperimentSpec no_g = canonical_spec();
    no_g.g = WeightProfile{};
    const ProblemData prob_ng = materialize(no_g);
    const GridFunction whole =
        bump_on_mask(prob_ng.grid,
                     std::vector<bool>(static_cast<std::size_t>(prob_ng.grid->num_nodes()), true));
    const DivergenceRay ray_ng = find_divergence_ray(prob_ng, geo, whole, schedule);
    CHECK(ray_ng.J_e < 0.0);

    // schedule exhaustion reports NoDescentFound
    CHECK_THROWS_AS(find_divergence_ray(prob, geo, phi0, {1e-12}), NoDescentFound);
    CHECK_THROWS_AS(find_divergence_ray(prob, geo, GridFunction(prob.grid), schedule),
                    std::invalid_argument);
}

TEST_CASE("small-t negativity: h route") {
    const ProblemData& prob = canonical();
    const GeometryConstants& geo = canonical_geometry();
    const GridFunction psi0 = bump_on_positive_part(prob.h);

    std::vector<double> schedule;
    for (int k = 1; k <= 50; ++k) schedule.push_back(std::pow(2.0, -k));
    const SmallTResult st = verify_small_t_negative(prob, geo, psi0, schedule);
    CHECK(st.t > 0.0);
    CHECK(st.t < 1.0);
    CHECK(st.J_t < 0.0);
    CHECK(x_norm(st.t * psi0, prob.p) < geo.rho);

    // psi0 with the wrong sign pairing is rejected
    CHECK_THROWS_AS(verify_small_t_negative(prob, geo, (-1.0) * psi0, schedule),
                    std::invalid_argument);

    // a schedule with only large t fails the ball constraint
    CHECK_THROWS_AS(verify_small_t_negative(prob, geo, psi0, {0.99}), PositivityNotFound);

    // h == 0 makes the h-route inapplicable
    const ProblemData t2 = materialize(theorem2_spec());
    CHECK_THROWS_AS(verify_small_t_negative(t2, geo, bump_on_positive_part(t2.f), schedule),
                    NotApplicable);
}

TEST_CASE("small-t negativity: sign-changing f route") {
    const ProblemData t2 = materialize(theorem2_spec());
    const EmbeddingConstants constants =
        estimate_embedding_constants(t2.p, t2.q, t2.r, 512, substream(7, 1));
    const GeometryConstants geo = mountain_pass_constants(t2, constants, default_rho_grid());
    const GridFunction psi0 = bump_on_positive_part(t2.f);

    std::vector<double> schedule;
    for (int k = 1; k <= 50; ++k) schedule.push_back(std::pow(2.0, -k));
    const SmallTResult st = verify_small_t_negative_f(t2, geo, psi0, schedule);
    CHECK(st.J_t < 0.0);
    CHECK(x_norm(st.t * psi0, t2.p) < geo.rho);

    // negative pairing rejected: a bump sitting on the f < 0 region
    Eigen::ArrayXd v(t2.grid->num_nodes());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double t = (t2.grid->coord(i, 0) - 0.75) / 0.15;
        v[i] = std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
    }
    const GridFunction neg_psi(t2.grid, std::move(v));
    CHECK_THROWS_AS(verify_small_t_negative_f(t2, geo, neg_psi, schedule),
                    std::invalid_argument);
}

TEST_CASE("bump construction helpers") {
    const GridPtr g = build_grid(1, {1.0}, 129);

    CHECK_THROWS_AS(
        bump_on_mask(g, std::vector<bool>(static_cast<std::size_t>(g->num_nodes()), false)),
        std::invalid_argument);

    std::vector<bool> mask(static_cast<std::size_t>(g->num_nodes()), false);
    for (Eigen::Index i = 0; i < g->num_nodes(); ++i)
        mask[static_cast<std::size_t>(i)] = g->coord(i, 0) > 0.3 && g->coord(i, 0) < 0.7;
    const GridFunction bump = bump_on_mask(g, mask);
    for (Eigen::Index i = 0; i < g->num_nodes(); ++i) {
        const double x = g->coord(i, 0);
        if (x <= 0.3 || x >= 0.7)
            CHECK(bump.values()[i] == 0.0);
    }
    CHECK(bump.max_abs() > 0.9);

    const GridFunction neg(g, Eigen::ArrayXd::Constant(g->num_nodes(), -1.0));
    CHECK_THROWS_AS(bump_on_positive_part(neg), std::invalid_argument);
}
