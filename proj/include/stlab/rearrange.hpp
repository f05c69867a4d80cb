#pragma once

#include <string>
#include <vector>

#include "stlab/domain.hpp"

namespace stlab {

struct RearrangementProfile {
    std::vector<double> z_nodes;
    std::vector<double> values;  // non-increasing in z
    std::string source_hash;     // git blob hash of the source values

    VerticalProfile on(const GridPtr& g) const;
};

// Area of {rho > lambda} for the piecewise-linear interpolant of rho on
// the triangulated grid (two triangles per cell). Exact for that interpolant.
double level_measure(const RealField& rho, double lambda);

// Decreasing vertical rearrangement rho*(z) = inf{lambda : |{rho > lambda}| <= 2 pi z}
// sampled at the z nodes. The field is first refined x_refine times in x by
// trigonometric interpolation. A node sort brackets each quantile; the
// exact distribution function of the interpolant then fixes it by bisection.
RearrangementProfile vertical_rearrangement(const RealField& rho0, int x_refine = 4);

// Trigonometric interpolation onto nx * factor points in x.
RealField refine_x(const RealField& f, int factor);

void write_profile_csv(const std::string& path, const RearrangementProfile& p);

}  // namespace stlab
