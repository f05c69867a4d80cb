#pragma once

#include <string>
#include <vector>

#include "stlab/domain.hpp"

namespace stlab {

// Stationary stratified profile Theta(z) and its slope on the grid nodes.
struct Background {
    VerticalProfile theta;
    VerticalProfile slope;
    std::string description;

    // Theta = a + b z.
    static Background affine(const GridPtr& g, double a = 1.0, double b = -1.0);
    // Natural cubic spline through (z, theta); z increasing and covering
    // [0, height].
    static Background tabulated(const GridPtr& g, const std::vector<double>& z,
                                const std::vector<double>& theta);

    double max_slope() const;
    // sup Theta' < 0, the condition under which the stratification is stable.
    bool strictly_decreasing() const { return max_slope() < 0.0; }
};

}  // namespace stlab
