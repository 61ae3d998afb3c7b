#include "pxk/config.hpp"

#include <cmath>
#include <sstream>

#include "pxk/format.hpp"

namespace pxk {

bool ExperimentSpec::operator==(const ExperimentSpec& o) const {
    return dim == o.dim && extents == o.extents && nodes == o.nodes && N == o.N &&
           lipschitz_bound == o.lipschitz_bound && p == o.p && q == o.q && r == o.r &&
           a == o.a && b == o.b && gamma == o.gamma && lambda == o.lambda && f == o.f &&
           g == o.g && h == o.h && omega0_lo == o.omega0_lo && omega0_hi == o.omega0_hi &&
           eta == o.eta && mu == o.mu && solver.max_iters == o.solver.max_iters &&
           solver.grad_tol == o.solver.grad_tol && solver.step_init == o.solver.step_init &&
           solver.path_points == o.solver.path_points &&
           solver.backtrack_factor == o.solver.backtrack_factor &&
           solver.theta == o.solver.theta && solver.seed == o.solver.seed &&
           solver.norm_bound == o.solver.norm_bound && mode == o.mode;
}

ExperimentSpec canonical_spec() { return ExperimentSpec{}; }

ExperimentSpec theorem2_spec() {
    ExperimentSpec spec;
    spec.mode = H2Mode::h2prime;
    spec.h = WeightProfile{WeightProfile::Kind::zero, 0.0, 1.0, 0.0, 0.0, 0.0};
    spec.f = WeightProfile{WeightProfile::Kind::sine, 5.0, 2.0, 0.0, 0.0, 0.0};
    // large enough that the f-driven ball minimizer has a resolvable
    // amplitude, still safely below the lambda_bar this instance produces
    spec.lambda = 8.0;
    return spec;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string t;
    while (in >> t) out.push_back(t);
    return out;
}

double to_double(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "line " + std::to_string(line) + ": expected a number, got '" +
                                   s + "'");
    }
}

int to_int(const std::string& s, int line) {
    const double v = to_double(s, line);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ParseError(line, "line " + std::to_string(line) + ": expected an integer, got '" +
                                   s + "'");
    return i;
}

ExponentProfile parse_exponent(const std::string& value, int line) {
    const auto t = tokens(value);
    if (t.size() == 2 && t[0] == "constant")
        return ExponentProfile{ExponentProfile::Kind::constant, to_double(t[1], line), 0.0};
    if (t.size() == 3 && t[0] == "affine")
        return ExponentProfile{ExponentProfile::Kind::affine, to_double(t[1], line),
                               to_double(t[2], line)};
    throw ParseError(line, "line " + std::to_string(line) +
                               ": exponent profile must be 'constant <v>' or 'affine <v0> "
                               "<slope>', got '" +
                               value + "'");
}

WeightProfile parse_weight(const std::string& value, int line) {
    const auto t = tokens(value);
    if (t.size() == 1 && t[0] == "zero") return WeightProfile{};
    if (t.size() == 2 && t[0] == "constant")
        return WeightProfile{WeightProfile::Kind::constant, to_double(t[1], line), 1.0, 0.0,
                             0.0, 0.0};
    if ((t.size() == 3 || t.size() == 4) && t[0] == "sine")
        return WeightProfile{WeightProfile::Kind::sine, to_double(t[1], line),
                             to_double(t[2], line),
                             t.size() == 4 ? to_double(t[3], line) : 0.0, 0.0, 0.0};
    if (t.size() == 4 && t[0] == "bump")
        return WeightProfile{WeightProfile::Kind::bump, to_double(t[1], line), 1.0, 0.0,
                             to_double(t[2], line), to_double(t[3], line)};
    throw ParseError(line, "line " + std::to_string(line) +
                               ": weight profile must be 'zero', 'constant <a>', 'sine <amp> "
                               "<freq> [offset]' or 'bump <amp> <lo> <hi>', got '" +
                               value + "'");
}

std::string exponent_text(const ExponentProfile& p) {
    if (p.kind == ExponentProfile::Kind::constant) return "constant " + fmt17(p.v0);
    return "affine " + fmt17(p.v0) + " " + fmt17(p.slope);
}

std::string weight_text(const WeightProfile& w) {
    switch (w.kind) {
    case WeightProfile::Kind::zero:
        return "zero";
    case WeightProfile::Kind::constant:
        return "constant " + fmt17(w.amp);
    case WeightProfile::Kind::sine:
        return "sine " + fmt17(w.amp) + " " + fmt17(w.freq) + " " + fmt17(w.offset);
    case WeightProfile::Kind::bump:
        return "bump " + fmt17(w.amp) + " " + fmt17(w.lo) + " " + fmt17(w.hi);
    }
    return "zero";
}

void validate(const ExperimentSpec& spec) {
    if (spec.dim != 1 && spec.dim != 2)
        throw ValidationError("grid.dim must be 1 or 2");
    if (static_cast<int>(spec.extents.size()) != spec.dim)
        throw ValidationError("grid.extent must list one length per axis");
    for (double e : spec.extents)
        if (!(e > 0.0)) throw ValidationError("grid.extent entries must be positive");
    if (spec.nodes < 9) throw ValidationError("grid.nodes must be at least 9");
    if (spec.N <= 3) throw ValidationError("exponents.N must exceed 3");
    if (!(spec.gamma > 0.0)) throw ValidationError("coefficients.gamma must be positive");
    if (!(spec.a > 0.0)) throw ValidationError("coefficients.a must be positive");
    if (!(spec.b > 0.0)) throw ValidationError("coefficients.b must be positive");
    if (!(spec.lambda > 0.0)) throw ValidationError("coefficients.lambda must be positive");
    if (!(spec.eta > 0.0) || !(spec.mu > 0.0))
        throw ValidationError("weights.eta and weights.mu must be positive");
    if (!(spec.omega0_lo < spec.omega0_hi))
        throw ValidationError("weights.omega0 must be a nonempty interval lo < hi");
    if (spec.solver.path_points < 5)
        throw ValidationError("solver.path_points must be at least 5");
    if (!(spec.solver.backtrack_factor > 0.0 && spec.solver.backtrack_factor < 1.0))
        throw ValidationError("solver.backtrack_factor must lie in (0,1)");
    if (!(spec.solver.grad_tol > 0.0)) throw ValidationError("solver.grad_tol must be positive");
    if (spec.mode == H2Mode::h2prime && spec.h.kind != WeightProfile::Kind::zero)
        throw ValidationError(
            "mode theorem2 requires h(x) == 0: set 'h = zero' in [weights]");
}

} // namespace

ExperimentSpec parse_config(const std::string& text) {
    ExperimentSpec spec;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    std::vector<double> extents_seen;
    bool extents_set = false;
    bool nodes_set = false;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(line_no, "line " + std::to_string(line_no) +
                                              ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "grid" && section != "exponents" && section != "coefficients" &&
                section != "weights" && section != "solver" && section != "run")
                throw ParseError(line_no, "line " + std::to_string(line_no) +
                                              ": unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no,
                             "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(line_no,
                             "line " + std::to_string(line_no) + ": empty key or value");

        auto unknown = [&]() -> ParseError {
            return ParseError(line_no, "line " + std::to_string(line_no) + ": unknown key '" +
                                           key + "' in section [" + section + "]");
        };

        if (section == "grid") {
            if (key == "dim")
                spec.dim = to_int(value, line_no);
            else if (key == "extent") {
                extents_seen.clear();
                for (const auto& t : tokens(value)) extents_seen.push_back(to_double(t, line_no));
                extents_set = true;
            } else if (key == "nodes") {
                spec.nodes = to_int(value, line_no);
                nodes_set = true;
            } else
                throw unknown();
        } else if (section == "exponents") {
            if (key == "N")
                spec.N = to_int(value, line_no);
            else if (key == "lipschitz_bound")
                spec.lipschitz_bound = to_double(value, line_no);
            else if (key == "p")
                spec.p = parse_exponent(value, line_no);
            else if (key == "q")
                spec.q = parse_exponent(value, line_no);
            else if (key == "r")
                spec.r = parse_exponent(value, line_no);
            else
                throw unknown();
        } else if (section == "coefficients") {
            if (key == "a")
                spec.a = to_double(value, line_no);
            else if (key == "b")
                spec.b = to_double(value, line_no);
            else if (key == "gamma")
                spec.gamma = to_double(value, line_no);
            else if (key == "lambda")
                spec.lambda = to_double(value, line_no);
            else
                throw unknown();
        } else if (section == "weights") {
            if (key == "f")
                spec.f = parse_weight(value, line_no);
            else if (key == "g")
                spec.g = parse_weight(value, line_no);
            else if (key == "h")
                spec.h = parse_weight(value, line_no);
            else if (key == "omega0") {
                const auto t = tokens(value);
                if (t.size() != 2)
                    throw ParseError(line_no, "line " + std::to_string(line_no) +
                                                  ": omega0 takes 'lo hi'");
                spec.omega0_lo = to_double(t[0], line_no);
                spec.omega0_hi = to_double(t[1], line_no);
            } else if (key == "eta")
                spec.eta = to_double(value, line_no);
            else if (key == "mu")
                spec.mu = to_double(value, line_no);
            else
                throw unknown();
        } else if (section == "solver") {
            if (key == "max_iters")
                spec.solver.max_iters = to_int(value, line_no);
            else if (key == "grad_tol")
                spec.solver.grad_tol = to_double(value, line_no);
            else if (key == "step_init")
                spec.solver.step_init = to_double(value, line_no);
            else if (key == "path_points")
                spec.solver.path_points = to_int(value, line_no);
            else if (key == "backtrack_factor")
                spec.solver.backtrack_factor = to_double(value, line_no);
            else if (key == "theta")
                spec.solver.theta = value == "auto" ? 0.0 : to_double(value, line_no);
            else if (key == "seed")
                spec.solver.seed = static_cast<std::uint64_t>(to_int(value, line_no));
            else if (key == "norm_bound")
                spec.solver.norm_bound = to_double(value, line_no);
            else
                throw unknown();
        } else if (section == "run") {
            if (key == "mode") {
                if (value == "theorem1")
                    spec.mode = H2Mode::h2;
                else if (value == "theorem2")
                    spec.mode = H2Mode::h2prime;
                else
                    throw ParseError(line_no, "line " + std::to_string(line_no) +
                                                  ": mode must be theorem1 or theorem2");
            } else
                throw unknown();
        } else {
            throw ParseError(line_no, "line " + std::to_string(line_no) +
                                          ": key outside of any section");
        }
    }

    if (extents_set) spec.extents = extents_seen;
    if (!extents_set && spec.dim == 2) spec.extents = {1.0, 1.0};
    // 2D default resolution is 33x33 so full runs stay desk-scale
    if (!nodes_set && spec.dim == 2) spec.nodes = 33;
    validate(spec);
    return spec;
}

std::string serialize(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "[grid]\n";
    os << "dim = " << spec.dim << "\n";
    os << "extent =";
    for (double e : spec.extents) os << " " << fmt17(e);
    os << "\n";
    os << "nodes = " << spec.nodes << "\n\n";

    os << "[exponents]\n";
    os << "N = " << spec.N << "\n";
    os << "lipschitz_bound = " << fmt17(spec.lipschitz_bound) << "\n";
    os << "p = " << exponent_text(spec.p) << "\n";
    os << "q = " << exponent_text(spec.q) << "\n";
    os << "r = " << exponent_text(spec.r) << "\n\n";

    os << "[coefficients]\n";
    os << "a = " << fmt17(spec.a) << "\n";
    os << "b = " << fmt17(spec.b) << "\n";
    os << "gamma = " << fmt17(spec.gamma) << "\n";
    os << "lambda = " << fmt17(spec.lambda) << "\n\n";

    os << "[weights]\n";
    os << "f = " << weight_text(spec.f) << "\n";
    os << "g = " << weight_text(spec.g) << "\n";
    os << "h = " << weight_text(spec.h) << "\n";
    os << "omega0 = " << fmt17(spec.omega0_lo) << " " << fmt17(spec.omega0_hi) << "\n";
    os << "eta = " << fmt17(spec.eta) << "\n";
    os << "mu = " << fmt17(spec.mu) << "\n\n";

    os << "[solver]\n";
    os << "max_iters = " << spec.solver.max_iters << "\n";
    os << "grad_tol = " << fmt17(spec.solver.grad_tol) << "\n";
    os << "step_init = " << fmt17(spec.solver.step_init) << "\n";
    os << "path_points = " << spec.solver.path_points << "\n";
    os << "backtrack_factor = " << fmt17(spec.solver.backtrack_factor) << "\n";
    if (spec.solver.theta == 0.0)
        os << "theta = auto\n";
    else
        os << "theta = " << fmt17(spec.solver.theta) << "\n";
    os << "seed = " << spec.solver.seed << "\n";
    os << "norm_bound = " << fmt17(spec.solver.norm_bound) << "\n\n";

    os << "[run]\n";
    os << "mode = " << (spec.mode == H2Mode::h2 ? "theorem1" : "theorem2") << "\n";
    return os.str();
}

double eval_weight(const WeightProfile& w, const Grid& grid, Eigen::Index node) {
    const double x = grid.coord(node, 0);
    switch (w.kind) {
    case WeightProfile::Kind::zero:
        return 0.0;
    case WeightProfile::Kind::constant:
        return w.amp;
    case WeightProfile::Kind::sine: {
        double v = std::sin(w.freq * M_PI * x / grid.extent(0));
        if (grid.dim() == 2) v *= std::sin(w.freq * M_PI * grid.coord(node, 1) / grid.extent(1));
        return w.amp * (v + w.offset);
    }
    case WeightProfile::Kind::bump: {
        const double c = 0.5 * (w.lo + w.hi);
        const double half = 0.5 * (w.hi - w.lo);
        if (!(half > 0.0)) return 0.0;
        auto bump1 = [&](double t) {
            if (std::abs(t) >= 1.0) return 0.0;
            return std::exp(1.0 - 1.0 / (1.0 - t * t));
        };
        double v = bump1((x - c) / half);
        if (grid.dim() == 2) v *= bump1((grid.coord(node, 1) - c) / half);
        return w.amp * v;
    }
    }
    return 0.0;
}

ProblemData materialize(const ExperimentSpec& spec) {
    validate(spec);
    GridPtr grid = build_grid(spec.dim, spec.extents, spec.nodes);

    auto exponent_values = [&](const ExponentProfile& prof) {
        Eigen::ArrayXd v(grid->num_nodes());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double x = grid->coord(i, 0);
            v[i] = prof.kind == ExponentProfile::Kind::constant ? prof.v0
                                                                : prof.v0 + prof.slope * x;
        }
        return v;
    };

    ExponentField p =
        build_exponent_field(grid, exponent_values(spec.p), spec.N, spec.lipschitz_bound);
    ExponentField q = ExponentField::from_values(grid, exponent_values(spec.q), spec.N,
                                                 spec.lipschitz_bound);
    ExponentField r = ExponentField::from_values(grid, exponent_values(spec.r), spec.N,
                                                 spec.lipschitz_bound);

    auto weight_field = [&](const WeightProfile& w) {
        Eigen::ArrayXd v(grid->num_nodes());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = eval_weight(w, *grid, i);
        return GridFunction(grid, std::move(v));
    };

    std::vector<bool> omega0(static_cast<std::size_t>(grid->num_nodes()), false);
    for (Eigen::Index i = 0; i < grid->num_nodes(); ++i) {
        bool inside = true;
        for (int a = 0; a < grid->dim(); ++a) {
            const double x = grid->coord(i, a);
            inside = inside && x > spec.omega0_lo && x < spec.omega0_hi;
        }
        omega0[static_cast<std::size_t>(i)] = inside;
    }

    return ProblemData::assemble(grid, KirchhoffCoefficients{spec.a, spec.b, spec.gamma},
                                 spec.lambda, std::move(p), std::move(q), std::move(r),
                                 weight_field(spec.f), weight_field(spec.g),
                                 weight_field(spec.h), std::move(omega0), spec.mode, spec.eta,
                                 spec.mu);
}

} // namespace pxk
