#pragma once

#include <stdexcept>
#include <string>

namespace pxk {

// Base class for all library errors.
class Error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- exponent validation ---
class NonAdmissibleExponent : public Error {
    using Error::Error;
};
class ContinuityViolation : public Error {
    using Error::Error;
};
class ExponentOutOfRange : public Error {
    using Error::Error;
};

// --- grids and fields ---
class BadGridSpec : public Error {
    using Error::Error;
};
class GridMismatch : public Error {
    using Error::Error;
};

// --- variable-exponent norms ---
class NonConvergence : public Error {
    using Error::Error;
};

// --- geometry pipeline ---
class NoAdmissibleRho : public Error {
    using Error::Error;
};
class NoDescentFound : public Error {
    using Error::Error;
};
class PositivityNotFound : public Error {
    using Error::Error;
};
class NotApplicable : public Error {
    using Error::Error;
};

// --- solvers ---
class CapExceeded : public Error {
    using Error::Error;
};

// Raised by the solution pipeline when an instance cannot be certified.
// `clause` is a short machine-readable tag naming the violated gate.
class CertificationFailed : public Error {
public:
    CertificationFailed(std::string clause, const std::string& what)
        : Error(what), clause_(std::move(clause)) {}
    const std::string& clause() const noexcept { return clause_; }

private:
    std::string clause_;
};

// --- configuration ---
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};
class ValidationError : public Error {
    using Error::Error;
};

} // namespace pxk
