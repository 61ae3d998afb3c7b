#pragma once

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

#include "pxk/mesh.hpp"

namespace pxk {

// Variable exponent sampled on grid nodes, with its range and the analysis
// dimension N used by the critical-exponent arithmetic.  N is decoupled from
// the grid dimension: it only parametrizes p*(x) = N p / (N - 3p) and the
// hypothesis chains.
class ExponentField {
public:
    ExponentField() = default; // empty; assign from a builder before use

    // Lenient builder: requires values > 1 and the discrete Lipschitz
    // continuity proxy, but no subcriticality; used for q, r and derived
    // exponents whose range is unconstrained.
    static ExponentField from_values(GridPtr grid, Eigen::ArrayXd values, int analysis_dim,
                                     double lipschitz_bound = std::numeric_limits<double>::infinity());

    static ExponentField constant(GridPtr grid, double value, int analysis_dim);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::ArrayXd& values() const { return values_; }
    double p_minus() const { return p_minus_; }
    double p_plus() const { return p_plus_; }
    int analysis_dim() const { return analysis_dim_; }

    bool is_constant(double tol = 0.0) const { return p_plus_ - p_minus_ <= tol; }

private:
    GridPtr grid_;
    Eigen::ArrayXd values_;
    double p_minus_ = 0.0;
    double p_plus_ = 0.0;
    int analysis_dim_ = 0;
};

// Strict builder for the principal exponent: additionally enforces the
// standing assumption p_plus < N/3.
ExponentField build_exponent_field(GridPtr grid, const Eigen::ArrayXd& node_values,
                                   int analysis_dim, double lipschitz_bound);

// p*(x) = N p(x) / (N - 3 p(x)); exceeds p nodewise.
ExponentField critical_exponent(const ExponentField& p);

struct DerivedExponents {
    ExponentField p_star;
    ExponentField q0;
    ExponentField r0;
    ExponentField p_star_conjugate;
    bool q0_large = false; // denominator p* - q below 1e-6 somewhere
    bool r0_large = false;
};

// q0 = p*/(p*-q), r0 = p*/(p*-r), conjugate p*/(p*-1).
DerivedExponents derived_exponents(const ExponentField& p, const ExponentField& q,
                                   const ExponentField& r);

struct Violation {
    std::string condition;
    Eigen::Index location = -1;
    std::vector<double> values;
};

struct HypothesisReport {
    bool passed = true;
    std::vector<Violation> violations;
    // Filled by the sphere verifier; NaN elsewhere.
    double min_energy = std::numeric_limits<double>::quiet_NaN();
};

// Nodewise chain 1 < q < p_- <= p_+ < (g+1)p_- <= (g+1)p_+ < r < p*.
// Strict links are required to hold with `margin` of slack.
HypothesisReport check_H1(const ExponentField& p, const ExponentField& q,
                          const ExponentField& r, double gamma, double margin = 1e-9);

} // namespace pxk
