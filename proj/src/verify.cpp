#include "pxk/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "pxk/config.hpp"
#include "pxk/geometry.hpp"
#include "pxk/solvers.hpp"
#include "pxk/spaces.hpp"

namespace pxk {

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
    const char* label;
    double time_limit_s; // 0 = no limit
};

class Battery {
public:
    Battery(std::ostream& out, std::ostream* timing) : out_(out), timing_(timing) {}

    template <typename Fn>
    void run(int index, const Criterion& crit, Fn&& body) {
        const auto start = Clock::now();
        bool ok = false;
        std::string note;
        try {
            note = body();
            ok = true;
        } catch (const std::exception& err) {
            note = err.what();
        }
        const double elapsed =
            std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start)
                .count();
        bool timed_out = false;
        if (crit.time_limit_s > 0.0 && elapsed > crit.time_limit_s) {
            ok = false;
            timed_out = true;
        }
        all_ok_ = all_ok_ && ok;

        out_ << "[" << std::setw(2) << index << "] " << crit.label << " ... "
             << (ok ? "PASS" : "FAIL");
        if (!ok && timed_out) out_ << " (time limit)";
        if (!note.empty()) out_ << " | " << note;
        out_ << "\n";
        if (timing_)
            *timing_ << "criterion " << index << ": " << elapsed << " s"
                     << (timed_out ? " (over limit)" : "") << "\n";
    }

    bool all_ok() const { return all_ok_; }

private:
    std::ostream& out_;
    std::ostream* timing_;
    bool all_ok_ = true;
};

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw CheckFailure(msg);
}

double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

// Random admissible principal exponent (range inside (1, N/3) for N = 7).
ExponentField random_exponent(const GridPtr& grid, Rng& rng) {
    const double v0 = rng.uniform(1.2, 2.1);
    const double slope = rng.uniform(-0.15, 0.15);
    Eigen::ArrayXd v(grid->num_nodes());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = v0 + slope * grid->coord(i, 0);
    return build_exponent_field(grid, v, 7, 1.0);
}

GridFunction scaled_random_field(const GridPtr& grid, Rng& rng) {
    GridFunction u = random_field(grid, rng);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    return scale * u;
}

// Direct-search maximizer of a s - b s^{gamma+1}/(gamma+1): log-grid scan
// followed by log-space ternary refinement.  Independent of the closed form.
struct CapOracle {
    double value;
    double argmax;
};

CapOracle brute_force_cap(double a, double b, double gamma) {
    auto f = [&](double s) { return a * s - b * std::pow(s, gamma + 1.0) / (gamma + 1.0); };

    const int N = 8192;
    double best = -std::numeric_limits<double>::infinity();
    double bs = 1.0;
    for (int i = 0; i < N; ++i) {
        const double ex = -30.0 + 60.0 * static_cast<double>(i) / (N - 1);
        const double s = std::pow(10.0, ex);
        const double v = f(s);
        if (v > best) {
            best = v;
            bs = s;
        }
    }
    const double ratio = std::pow(10.0, 60.0 / (N - 1));
    double lo = bs / (ratio * ratio);
    double hi = bs * ratio * ratio;
    for (int it = 0; it < 400; ++it) {
        const double m1 = lo * std::pow(hi / lo, 1.0 / 3.0);
        const double m2 = lo * std::pow(hi / lo, 2.0 / 3.0);
        if (f(m1) < f(m2))
            lo = m1;
        else
            hi = m2;
    }
    const double sm = std::sqrt(lo * hi);
    return CapOracle{f(sm), sm};
}

std::string fmt_short(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

} // namespace

bool verify_suite(const VerifyOptions& opts, std::ostream& out, std::ostream* timing) {
    Battery battery(out, timing);
    out << "property battery, seed " << opts.seed << "\n";

    const GridPtr grid = build_grid(1, {1.0}, 129);

    battery.run(1, {"luxemburg constant-exponent oracle (500 fields)", 10.0}, [&] {
        Rng rng(substream(opts.seed, 11));
        const double ps[] = {1.5, 2.0, 3.0};
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double pc = ps[i % 3];
            const ExponentField p = ExponentField::constant(grid, pc, 7);
            const GridFunction u = scaled_random_field(grid, rng);
            const double lux = luxemburg_norm(u, p).value;
            const double oracle = std::pow(modular(u, p), 1.0 / pc);
            worst = std::max(worst, rel_err(lux, oracle));
        }
        require(worst <= 1e-8, "worst relative error " + fmt_short(worst));
        return "worst rel err " + fmt_short(worst);
    });

    battery.run(2, {"norm-modular relations battery (1000 pairs + sequences)", 30.0}, [&] {
        Rng rng(substream(opts.seed, 12));
        for (int i = 0; i < 1000; ++i) {
            const ExponentField p = random_exponent(grid, rng);
            const GridFunction u = scaled_random_field(grid, rng);
            const RelationReport rep = verify_norm_modular_relations(u, p);
            require(rep.passed(), "relation violation at pair " + std::to_string(i));
            const double nrm = rep.norm;
            if (nrm > 0.0) {
                const double normalized =
                    modular_weighted(u.values() / nrm, grid->node_weights(), p.values());
                require(std::abs(normalized - 1.0) <= 1e-8,
                        "normalization off by " + fmt_short(std::abs(normalized - 1.0)));
            }
        }
        // sequence forms: u_n = u / 2^n drives both norm and modular to 0
        // monotonically, u_n = u 2^n drives both to infinity
        const ExponentField p = random_exponent(grid, rng);
        const GridFunction u = random_field(grid, rng);
        double prev_norm = std::numeric_limits<double>::infinity();
        double prev_mod = std::numeric_limits<double>::infinity();
        double nrm = 0.0, mod = 0.0;
        for (int n = 1; n <= 40; ++n) {
            const GridFunction un = std::pow(0.5, n) * u;
            nrm = luxemburg_norm(un, p).value;
            mod = modular(un, p);
            require(nrm < prev_norm && mod < prev_mod, "shrinking sequence not monotone");
            prev_norm = nrm;
            prev_mod = mod;
        }
        require(nrm < 1e-6 && mod < 1e-9, "shrinking sequence did not vanish");
        prev_norm = prev_mod = 0.0;
        for (int n = 1; n <= 20; ++n) {
            const GridFunction un = std::pow(2.0, n) * u;
            nrm = luxemburg_norm(un, p).value;
            mod = modular(un, p);
            require(nrm > prev_norm && mod > prev_mod, "growing sequence not monotone");
            prev_norm = nrm;
            prev_mod = mod;
        }
        require(nrm > 1e4 && mod > 1e4, "growing sequence did not diverge");
        return std::string{};
    });

    battery.run(3, {"Hoelder pairing bound (1000 pairs)", 0.0}, [&] {
        Rng rng(substream(opts.seed, 13));
        int violations = 0;
        for (int i = 0; i < 1000; ++i) {
            const ExponentField p = random_exponent(grid, rng);
            const GridFunction u = scaled_random_field(grid, rng);
            const GridFunction v = scaled_random_field(grid, rng);
            if (!holder_bound(u, v, p).holds) ++violations;
        }
        require(violations == 0, std::to_string(violations) + " violations");
        return "0 violations";
    });

    battery.run(4, {"gradient consistency (50 directions, slope check)", 0.0}, [&] {
        Rng rng(substream(opts.seed, 14));
        const ProblemData prob = materialize(canonical_spec());
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            GridFunction u = random_field(prob.grid, rng);
            u *= 0.7 / x_norm(u, prob.p);
            GridFunction v = random_field(prob.grid, rng);
            v *= 0.5 / x_norm(v, prob.p);
            worst = std::max(worst, directional_derivative_check(u, v, prob, 1e-5));
        }
        require(worst <= 1e-5, "worst relative error " + fmt_short(worst));

        // halving h must shrink the central-difference error at order ~ 2
        double slope_sum = 0.0;
        int slope_count = 0;
        for (int i = 0; i < 5; ++i) {
            GridFunction u = random_field(prob.grid, rng);
            u *= 0.7 / x_norm(u, prob.p);
            GridFunction v = random_field(prob.grid, rng);
            v *= 0.5 / x_norm(v, prob.p);
            const double e0 = directional_derivative_check(u, v, prob, 4e-3);
            const double e1 = directional_derivative_check(u, v, prob, 2e-3);
            const double e2 = directional_derivative_check(u, v, prob, 1e-3);
            if (e0 > 1e-12 && e1 > 1e-13 && e2 > 1e-14) {
                slope_sum += std::log2(e0 / e2) / 2.0;
                ++slope_count;
            }
        }
        require(slope_count >= 3, "too few usable slope samples");
        const double slope = slope_sum / slope_count;
        require(slope >= 1.6 && slope <= 2.6, "slope " + fmt_short(slope));
        return "worst rel err " + fmt_short(worst) + ", slope " + fmt_short(slope);
    });

    battery.run(5, {"Kirchhoff cap identity (200 coefficient triples)", 0.0}, [&] {
        Rng rng(substream(opts.seed, 15));
        double worst_val = 0.0, worst_arg = 0.0;
        for (int i = 0; i < 200; ++i) {
            KirchhoffCoefficients k{rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0),
                                    rng.uniform(0.1, 10.0)};
            const CapOracle oracle = brute_force_cap(k.a, k.b, k.gamma);
            double formula = kirchhoff_cap(k);
            if (opts.corrupt_cap_formula) formula *= 1.0 + 1e-3;
            worst_val = std::max(worst_val, rel_err(formula, oracle.value));
            worst_arg = std::max(worst_arg, rel_err(degeneracy_threshold(k), oracle.argmax));
        }
        require(worst_val <= 1e-8, "cap value rel err " + fmt_short(worst_val));
        require(worst_arg <= 1e-6, "argmax rel err " + fmt_short(worst_arg));
        return "value err " + fmt_short(worst_val) + ", argmax err " + fmt_short(worst_arg);
    });

    battery.run(6, {"mountain-pass geometry (sphere, ray, small t)", 120.0}, [&] {
        const ProblemData prob = materialize(canonical_spec());
        const EmbeddingConstants constants = estimate_embedding_constants(
            prob.p, prob.q, prob.r, 512, substream(opts.seed, 1));
        const GeometryConstants geo =
            mountain_pass_constants(prob, constants, default_rho_grid());
        require(geo.C_rho > 0.0, "C_rho not positive");

        const HypothesisReport sphere =
            verify_sphere_lower_bound(prob, geo, 512, substream(opts.seed, 2));
        require(sphere.passed, "sphere sample below alpha");

        const GridFunction phi0 = bump_on_mask(prob.grid, prob.omega0_mask);
        std::vector<double> up;
        for (int k = 0; k <= 60; ++k) up.push_back(std::pow(2.0, k));
        const DivergenceRay ray = find_divergence_ray(prob, geo, phi0, up);
        require(x_norm(ray.e, prob.p) > geo.rho && ray.J_e < 0.0, "ray postcondition");

        const GridFunction psi0 = bump_on_positive_part(prob.h);
        std::vector<double> down;
        for (int k = 1; k <= 50; ++k) down.push_back(std::pow(2.0, -k));
        const SmallTResult st = verify_small_t_negative(prob, geo, psi0, down);
        require(st.J_t < 0.0 && x_norm(st.t * psi0, prob.p) < geo.rho,
                "small-t postcondition");
        return "min sphere J " + fmt_short(sphere.min_energy) + " >= alpha " +
               fmt_short(geo.alpha);
    });

    battery.run(7, {"two solutions, canonical instance", 300.0}, [&] {
        ExperimentSpec spec = canonical_spec();
        spec.solver.seed = opts.seed;
        const ProblemData prob = materialize(spec);
        const SolutionPair pair = solve_pair(prob, spec.solver);
        require(pair.res1 <= 1e-6 && pair.res2 <= 1e-6, "residuals above 1e-6");
        require(pair.J1 >= pair.geo.alpha, "J(u1) below alpha");
        require(pair.J1 > 0.0 && pair.J2 < 0.0, "sign pattern J1 > 0 > J2 broken");
        require(pair.J1 < 0.5 && pair.J2 < 0.5, "level not below the cap 0.5");
        return "J1 " + fmt_short(pair.J1) + ", J2 " + fmt_short(pair.J2);
    });

    battery.run(8, {"two solutions, h == 0 pathway", 300.0}, [&] {
        ExperimentSpec spec = theorem2_spec();
        spec.solver.seed = opts.seed;
        const ProblemData prob = materialize(spec);
        const SolutionPair pair = solve_pair(prob, spec.solver);
        require(pair.res1 <= 1e-6 && pair.res2 <= 1e-6, "residuals above 1e-6");
        require(pair.J1 > 0.0 && pair.J2 < 0.0, "sign pattern J1 > 0 > J2 broken");
        return "J1 " + fmt_short(pair.J1) + ", J2 " + fmt_short(pair.J2);
    });

    battery.run(9, {"stencil convergence and quadrature", 0.0}, [&] {
        std::vector<double> errs;
        for (int n : {65, 129, 257}) {
            const GridPtr g = build_grid(1, {1.0}, n);
            Eigen::ArrayXd v(g->num_nodes());
            for (Eigen::Index i = 0; i < v.size(); ++i)
                v[i] = std::sin(M_PI * g->coord(i, 0));
            const GridFunction u(g, std::move(v));
            const VectorField gl = grad_laplacian(u);
            double err = 0.0;
            const double pi3 = M_PI * M_PI * M_PI;
            for (Eigen::Index i = 2; i + 2 < g->num_nodes(); ++i) {
                const double x = g->coord(i, 0);
                err = std::max(err, std::abs(gl.component(0)[i] + pi3 * std::cos(M_PI * x)));
            }
            errs.push_back(err);
        }
        const double slope01 = std::log2(errs[0] / errs[1]);
        const double slope12 = std::log2(errs[1] / errs[2]);
        require(slope01 >= 1.9 && slope12 >= 1.9,
                "slopes " + fmt_short(slope01) + ", " + fmt_short(slope12));

        const GridPtr g = build_grid(1, {1.0}, 257);
        Eigen::ArrayXd w(g->num_nodes());
        const double pi3 = M_PI * M_PI * M_PI;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double c = pi3 * std::cos(M_PI * g->coord(i, 0));
            w[i] = c * c;
        }
        const double integral = integrate(GridFunction(g, std::move(w)));
        const double exact = std::pow(M_PI, 6) / 2.0;
        require(rel_err(integral, exact) <= 1e-2,
                "integral rel err " + fmt_short(rel_err(integral, exact)));
        return "slopes " + fmt_short(slope01) + "/" + fmt_short(slope12) + ", quadrature err " +
               fmt_short(rel_err(integral, exact));
    });

    out << "overall: " << (battery.all_ok() ? "PASS" : "FAIL") << "\n";
    return battery.all_ok();
}

} // namespace pxk
