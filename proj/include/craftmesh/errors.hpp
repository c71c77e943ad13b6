#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace craftmesh {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DegenerateFaceError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(std::size_t pivot)
        : Error("matrix is singular to working precision at pivot " + std::to_string(pivot)),
          pivot_(pivot) {}
    std::size_t pivot() const { return pivot_; }

private:
    std::size_t pivot_;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

}  // namespace craftmesh
