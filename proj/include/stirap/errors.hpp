// errors.hpp - Exception types shared by the stirap headers

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stirap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad scalar parameter (non-positive L, tau <= 0, ...)
struct InvalidParameter : Error {
    using Error::Error;
};

// Parameters that are individually fine but inconsistent with each other
struct InvalidConfiguration : Error {
    using Error::Error;
};

// State-space guard (tensor model above the supported spin count)
struct CapacityError : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct DegenerateInput : Error {
    using Error::Error;
};

struct SingularDenominator : Error {
    using Error::Error;
};

struct IntegrationFailure : Error {
    using Error::Error;
};

struct NoKnee : Error {
    using Error::Error;
};

// Config-file schema violation; key() names the offending entry.
struct ConfigError : Error {
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace stirap
