#pragma once

#include <cstdint>
#include <iosfwd>

namespace pxk {

struct VerifyOptions {
    std::uint64_t seed = 7;
    // Mutation hook: perturbs the cap closed form so the battery must fail
    // at the cap-identity criterion.  Exercised by tests of the harness.
    bool corrupt_cap_formula = false;
};

// Runs the full property battery (one line per criterion, deterministic for
// a fixed seed) and returns true iff everything passed.  Wall-clock
// diagnostics are written to `timing` when non-null so the main report stays
// byte-reproducible.
bool verify_suite(const VerifyOptions& opts, std::ostream& out, std::ostream* timing = nullptr);

} // namespace pxk
