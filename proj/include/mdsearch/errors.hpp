#pragma once

#include <stdexcept>
#include <string>

namespace mdsearch {

// Bad or inconsistent user configuration (file syntax, out-of-range values,
// infeasible scheme parameters). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation refused to start because it would exceed a resource cap
// (e.g. trajectory enumeration too large). CLI exit code 3.
class ResourceGuardError : public std::runtime_error {
public:
    explicit ResourceGuardError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical integration failed to reach the requested tolerance. Carries the
// tolerance that was actually achieved so callers can report it.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& msg, double achieved)
        : std::runtime_error(msg), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

}  // namespace mdsearch
