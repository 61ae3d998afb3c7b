#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "pxk/exponents.hpp"
#include "pxk/mesh.hpp"
#include "pxk/random.hpp"

namespace pxk {

struct LuxemburgNorm {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0; // |modular(u/value) - 1|, 0 for the zero field
};

struct EmbeddingConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    int probe_count = 0;
    double safety_factor = 0.0;
};

struct RelationReport {
    double norm = 0.0;
    double modular_value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    bool bounds_hold = true;
    bool trichotomy_holds = true;
    bool passed() const { return bounds_hold && trichotomy_holds; }
};

struct HolderReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// --- array-level core (any weighted point set: nodes or cells) ---

double modular_weighted(const Eigen::ArrayXd& values, const Eigen::ArrayXd& weights,
                        const Eigen::ArrayXd& exponents);

// inf{ mu > 0 : modular(values/mu) <= 1 } by bracketing from mu = 1 and
// bisection on the strictly decreasing map mu -> modular(values/mu).
LuxemburgNorm luxemburg_norm_weighted(const Eigen::ArrayXd& values,
                                      const Eigen::ArrayXd& weights,
                                      const Eigen::ArrayXd& exponents, double tol = 1e-10,
                                      int expansion_limit = 1100);

// --- grid-function interface ---

double modular(const GridFunction& u, const ExponentField& p);

LuxemburgNorm luxemburg_norm(const GridFunction& u, const ExponentField& p, double tol = 1e-10);

// Norm-modular relations: power bounds on either side of 1 plus trichotomy.
RelationReport verify_norm_modular_relations(const GridFunction& u, const ExponentField& p);

// |int u v| <= 2 |u|_{p} |v|_{p/(p-1)}.
HolderReport holder_bound(const GridFunction& u, const GridFunction& v, const ExponentField& p);

// Random probe field: low-mode sine series with a small rough component,
// boundary-compliant, never identically zero.  Consumes a fixed number of
// draws so probe sequences are prefix-stable.
GridFunction random_field(const GridPtr& grid, Rng& rng, double roughness = 0.05);

// safety * max over seeded probes of |u|_{s} / ||u||_X.
double estimate_embedding_constant(const ExponentField& p, const ExponentField& s, int probes,
                                   std::uint64_t seed, double safety = 1.2);
// Same maximization over an explicit probe set.
double embedding_ratio_max(const std::vector<GridFunction>& probes, const ExponentField& p,
                           const ExponentField& s);

// Probe-estimated constants for the three lower-order bounds:
//   int |f| |u|^q  <= C1 |f|_{q0} max(||u||^{q+}, ||u||^{q-})
//   int |g| |u|^r  <= C2 |g|_{r0} max(||u||^{r+}, ||u||^{r-})
//   int |h| |u|    <= C3 |h|_{p*'} ||u||
EmbeddingConstants estimate_embedding_constants(const ExponentField& p, const ExponentField& q,
                                                const ExponentField& r, int probes,
                                                std::uint64_t seed, double safety = 1.2);

} // namespace pxk
