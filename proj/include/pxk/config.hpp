#pragma once

#include <string>
#include <vector>

#include "pxk/energy.hpp"
#include "pxk/solvers.hpp"

namespace pxk {

// p, q, r profiles: constant value or affine in the first coordinate.
struct ExponentProfile {
    enum class Kind { constant, affine };
    Kind kind = Kind::constant;
    double v0 = 2.0;
    double slope = 0.0;

    bool operator==(const ExponentProfile&) const = default;
};

// Weight profiles are named analytic families so the sign structure stays
// auditable: `sine` is sign-changing (offset shifts the mean), `bump` is a
// nonnegative compactly supported bump on [lo, hi].
struct WeightProfile {
    enum class Kind { zero, constant, sine, bump };
    Kind kind = Kind::zero;
    double amp = 0.0;
    double freq = 1.0;   // sine
    double offset = 0.0; // sine
    double lo = 0.0;     // bump support
    double hi = 0.0;

    bool operator==(const WeightProfile&) const = default;
};

struct ExperimentSpec {
    int dim = 1;
    std::vector<double> extents{1.0};
    int nodes = 129;

    int N = 7;
    double lipschitz_bound = 10.0;
    ExponentProfile p{ExponentProfile::Kind::constant, 2.0, 0.0};
    ExponentProfile q{ExponentProfile::Kind::constant, 1.5, 0.0};
    ExponentProfile r{ExponentProfile::Kind::constant, 5.0, 0.0};

    double a = 1.0;
    double b = 1.0;
    double gamma = 1.0;
    double lambda = 1e-3;

    WeightProfile f{WeightProfile::Kind::sine, 1.0, 2.0, 0.4, 0.0, 0.0};
    WeightProfile g{WeightProfile::Kind::bump, 40.0, 1.0, 0.0, 0.3, 0.7};
    WeightProfile h{WeightProfile::Kind::bump, 0.02, 1.0, 0.0, 0.15, 0.45};
    double omega0_lo = 0.3;
    double omega0_hi = 0.7;
    double eta = 0.01;
    double mu = 0.01;

    SolverParams solver;
    H2Mode mode = H2Mode::h2; // theorem1

    bool operator==(const ExperimentSpec&) const;
};

// The instance every default points at: 1D unit interval, n = 129, N = 7,
// p = 2, q = 1.5, r = 5, a = b = gamma = 1.
ExperimentSpec canonical_spec();
// h == 0 variant driven through the H2' pathway.
ExperimentSpec theorem2_spec();

// Line-oriented `[section]` / `key = value` format, `#` comments.  Unknown
// keys raise ParseError with the line number; semantic violations raise
// ValidationError naming the offending requirement.
ExperimentSpec parse_config(const std::string& text);

std::string serialize(const ExperimentSpec& spec);

// Evaluate a weight profile at a grid node.
double eval_weight(const WeightProfile& w, const Grid& grid, Eigen::Index node);

// Build the grid, fields and masks; throws ValidationError on hypotheses
// that can be checked structurally.
ProblemData materialize(const ExperimentSpec& spec);

} // namespace pxk
