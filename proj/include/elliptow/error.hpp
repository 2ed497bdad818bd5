#pragma once

#include <stdexcept>
#include <string>

namespace elliptow {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numeric argument is outside its mathematical domain (bad N, p, radius...).
struct ParamError : Error {
    using Error::Error;
};

/// Scaling factors violate the compatibility or termination inequalities.
struct FeasibilityError : Error {
    using Error::Error;
};

/// A geometric construction cannot be realized (corkscrew balls, custom oracle...).
struct ConstructionError : Error {
    using Error::Error;
};

/// Inconsistent run configuration (mismatched field/params, unknown registry key...).
struct ConfigError : Error {
    using Error::Error;
};

/// A Monte Carlo estimate could not be formed (e.g. every run hit the step cap).
struct EstimationError : Error {
    using Error::Error;
};

}  // namespace elliptow
