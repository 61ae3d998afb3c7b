#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pxk/config.hpp"
#include "pxk/report.hpp"
#include "pxk/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PXK_SEED")) {
        try {
            return static_cast<std::uint64_t>(std::stoull(env));
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring malformed PXK_SEED='" << env << "'\n";
        }
    }
    return 7;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sixth-order variable-exponent Kirchhoff variational solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    run_cmd->add_option("config", config_path, "experiment config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory");

    std::uint64_t seed = default_seed();
    auto* verify_cmd = app.add_subcommand("verify", "run the property battery");
    verify_cmd->add_option("--seed", seed, "battery seed (default: PXK_SEED or 7)");

    std::string geo_config_path;
    auto* geo_cmd = app.add_subcommand("geometry", "compute the geometry constants only");
    geo_cmd->add_option("config", geo_config_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const pxk::ExperimentSpec spec = pxk::parse_config(read_file(config_path));
            return static_cast<int>(pxk::run_experiment(spec, out_dir, std::cout));
        }
        if (verify_cmd->parsed()) {
            pxk::VerifyOptions opts;
            opts.seed = seed;
            const bool ok = pxk::verify_suite(opts, std::cout, &std::cerr);
            return ok ? 0 : 1;
        }
        if (geo_cmd->parsed()) {
            const pxk::ExperimentSpec spec = pxk::parse_config(read_file(geo_config_path));
            return static_cast<int>(pxk::run_geometry(spec, std::cout));
        }
    } catch (const pxk::ParseError& err) {
        std::cerr << "config parse error: " << err.what() << "\n";
        return static_cast<int>(pxk::ExitStatus::config_error);
    } catch (const pxk::ValidationError& err) {
        std::cerr << "config validation error: " << err.what() << "\n";
        return static_cast<int>(pxk::ExitStatus::config_error);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return static_cast<int>(pxk::ExitStatus::io_error);
    }
    return 0;
}
