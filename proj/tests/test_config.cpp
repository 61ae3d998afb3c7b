#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pxk/config.hpp"
#include "pxk/format.hpp"
#include "pxk/report.hpp"

using namespace pxk;

TEST_CASE("defaults: the empty document is the canonical instance") {
    const ExperimentSpec spec = parse_config("");
    CHECK(spec == canonical_spec());
    CHECK(spec.nodes == 129);
    CHECK(spec.N == 7);
    CHECK(spec.a == 1.0);
    CHECK(spec.b == 1.0);
    CHECK(spec.gamma == 1.0);
    CHECK(spec.mode == H2Mode::h2);
    CHECK_NOTHROW(materialize(spec));
}

TEST_CASE("round trip: serialize then parse is the identity") {
    for (const ExperimentSpec& spec : {canonical_spec(), theorem2_spec()}) {
        const ExperimentSpec back = parse_config(serialize(spec));
        CHECK(back == spec);
    }

    ExperimentSpec custom = canonical_spec();
    custom.dim = 2;
    custom.extents = {1.0, 2.0};
    custom.nodes = 33;
    custom.N = 11;
    custom.p = ExponentProfile{ExponentProfile::Kind::affine, 2.0, 0.25};
    custom.lambda = 0.125;
    custom.solver.theta = 3.25;
    custom.solver.seed = 99;
    CHECK(parse_config(serialize(custom)) == custom);
}

TEST_CASE("parse errors carry line numbers") {
    try {
        parse_config("[grid]\nnodes = 129\nwhatever = 3\n");
        CHECK(false);
    } catch (const ParseError& err) {
        CHECK(err.line() == 3);
        CHECK(std::string(err.what()).find("whatever") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config("[nosuch]\n"), ParseError);
    CHECK_THROWS_AS(parse_config("key = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[grid]\nnodes = abc\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[weights]\nf = wavelet 1 2\n"), ParseError);
}

TEST_CASE("validation errors name the violated requirement") {
    try {
        parse_config("[coefficients]\ngamma = -1\n");
        CHECK(false);
    } catch (const ValidationError& err) {
        CHECK(std::string(err.what()).find("gamma") != std::string::npos);
    }

    try {
        parse_config("[run]\nmode = theorem2\n");
        CHECK(false);
    } catch (const ValidationError& err) {
        CHECK(std::string(err.what()).find("h(x) == 0") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config("[grid]\nnodes = 5\n"), ValidationError);
}

TEST_CASE("weight profiles evaluate with the documented sign structure") {
    const ExperimentSpec spec = canonical_spec();
    const ProblemData prob = materialize(spec);

    // f = sine with offset 0.4 changes sign
    bool has_pos = false, has_neg = false;
    for (Eigen::Index i = 0; i < prob.grid->num_nodes(); ++i) {
        has_pos = has_pos || prob.f.values()[i] > 0.0;
        has_neg = has_neg || prob.f.values()[i] < 0.0;
    }
    CHECK(has_pos);
    CHECK(has_neg);

    // g is nonnegative, strictly positive on omega0
    for (Eigen::Index i = 0; i < prob.grid->num_nodes(); ++i) {
        CHECK(prob.g.values()[i] >= 0.0);
        if (prob.omega0_mask[static_cast<std::size_t>(i)])
            CHECK(prob.g.values()[i] > 0.0);
    }

    // omega0 is the strict interior of the configured interval
    for (Eigen::Index i = 0; i < prob.grid->num_nodes(); ++i) {
        const double x = prob.grid->coord(i, 0);
        CHECK(prob.omega0_mask[static_cast<std::size_t>(i)] ==
              (x > spec.omega0_lo && x < spec.omega0_hi));
    }
}

TEST_CASE("csv formatting writes 17 significant digits that round-trip") {
    const double v = 0.1234567890123456789;
    const std::string s = fmt17(v);
    CHECK(std::stod(s) == v);
    CHECK(s.find('.') != std::string::npos);
    CHECK(s.find(',') == std::string::npos);
}

TEST_CASE("run_experiment writes the full artifact set on success") {
    const std::filesystem::path out = std::filesystem::temp_directory_path() / "pxk_test_run";
    std::filesystem::remove_all(out);

    std::ostringstream log;
    const ExitStatus status = run_experiment(canonical_spec(), out, log);
    CHECK(status == ExitStatus::ok);
    for (const char* name : {"geometry.csv", "iterations.csv", "u1.csv", "u2.csv", "report.txt"})
        CHECK(std::filesystem::exists(out / name));

    std::ifstream geo(out / "geometry.csv");
    std::string header;
    std::getline(geo, header);
    CHECK(header == geometry_csv_header());

    std::ifstream rep(out / "report.txt");
    std::stringstream buf;
    buf << rep.rdbuf();
    CHECK(buf.str().find("CERTIFIED") != std::string::npos);

    std::filesystem::remove_all(out);
}

TEST_CASE("run_experiment surfaces the violated gate and bad output paths") {
    const std::filesystem::path out = std::filesystem::temp_directory_path() / "pxk_test_fail";
    std::filesystem::remove_all(out);

    ExperimentSpec bad = canonical_spec();
    bad.lambda = 1e9;
    std::ostringstream log;
    CHECK(run_experiment(bad, out, log) == ExitStatus::certification_failed);
    std::ifstream rep(out / "report.txt");
    std::stringstream buf;
    buf << rep.rdbuf();
    CHECK(buf.str().find("lambda_gate") != std::string::npos);
    std::filesystem::remove_all(out);

    // an output directory nested under a regular file cannot be created
    const std::filesystem::path blocker =
        std::filesystem::temp_directory_path() / "pxk_blocker";
    {
        std::ofstream f(blocker);
        f << "x";
    }
    std::ostringstream log2;
    CHECK(run_experiment(canonical_spec(), blocker / "nested", log2) == ExitStatus::io_error);
    std::filesystem::remove(blocker);
}

TEST_CASE("run_geometry emits the geometry csv") {
    std::ostringstream os;
    CHECK(run_geometry(canonical_spec(), os) == ExitStatus::ok);
    CHECK(os.str().find(geometry_csv_header()) == 0);
}
