#pragma once

#include <stdexcept>
#include <string>

namespace subscat {

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure could not reach its tolerance (ODE failure,
// truncated quadrature domain, degenerate basis, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace subscat
