#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pxk/config.hpp"
#include "pxk/geometry.hpp"
#include "pxk/solvers.hpp"

namespace pxk {

enum class ExitStatus : int {
    ok = 0,
    certification_failed = 1,
    config_error = 2,
    io_error = 3,
};

std::string geometry_csv_header();
std::string geometry_csv_row(const GeometryConstants& geo, double min_sphere_J, double t0,
                             double J_e);

std::string iterations_csv_header();

// Hypothesis checks -> geometry -> solve_pair; writes geometry.csv,
// iterations.csv, u1.csv, u2.csv and report.txt into out_dir.  Exit status 0
// iff the pair is certified; failures leave a report naming the violated
// clause.
ExitStatus run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                          std::ostream& log);

// Geometry pipeline only (no solvers); prints the geometry CSV to `os`.
ExitStatus run_geometry(const ExperimentSpec& spec, std::ostream& os);

} // namespace pxk
