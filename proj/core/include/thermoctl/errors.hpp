// errors.hpp — exception types for solver-level failures.

#pragma once

#include <stdexcept>
#include <string>

namespace thermoctl {

/// No feasible horizon was found below the doubling cap, or the instance is
/// structurally unreachable (an uncontrolled mode carries nonzero data).
class InfeasibleHorizonError : public std::runtime_error {
public:
    explicit InfeasibleHorizonError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric subroutine (sphere descent, switching-time root finder) failed
/// to converge; the message carries restart/iteration diagnostics.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the genericity scan when no grid point is admissible.
class ScanError : public std::runtime_error {
public:
    explicit ScanError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace thermoctl
