#pragma once

#include <stdexcept>
#include <string>

namespace ppinv {

// Configuration / lookup problems: CLI maps these to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical / runtime failures inside a computation.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ppinv
