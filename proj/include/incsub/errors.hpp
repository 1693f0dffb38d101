#pragma once

#include <stdexcept>
#include <string>

namespace incsub {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct ProjectionNotConverged : Error {
    using Error::Error;
};

// Topology or transition matrix fails the connectivity / stochasticity checks.
struct ValidationError : Error {
    using Error::Error;
};

// An engine produced a NaN or infinite iterate.
struct NonFiniteIterate : Error {
    using Error::Error;
};

struct ConfigError : Error {
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace incsub
