#pragma once

#include <stdexcept>
#include <string>

namespace self {

// Incompatible tensor/layer dimensions.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Bad experiment configuration, bad noise spec, unknown variant, missing file.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent data file (IDX/CSV/checkpoint).
struct LoadError : std::runtime_error {
    explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced a non-finite value; the run is aborted with diagnostics.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace self
