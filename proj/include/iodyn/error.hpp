#pragma once

#include <stdexcept>
#include <string>

namespace iodyn {

/// Invalid user input: bad parameters, malformed files, unsupported options.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a valid result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace iodyn
