#pragma once

#include <stdexcept>
#include <string>

namespace stlab {

// Invalid grid, shapes or parameters.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unsupported request (derivative order, norm index, ...).
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Factorization or root finding failed.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BlowUpError : std::runtime_error {
    BlowUpError(double t, const std::string& what)
        : std::runtime_error(what), time(t) {}
    double time;  // last time at which the state was finite
};

}  // namespace stlab
