#pragma once

#include <stdexcept>
#include <string>

namespace gnrd {

// Bad arguments, shapes, or configuration. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or truncated input files. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// NaN/inf encountered or a solver failed to make progress. Exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gnrd
