#pragma once

#include <cstdint>

#include "stlab/domain.hpp"

namespace stlab {

// Perturbations theta_0 of the background. s = z / height throughout.

// eps * 4^p * sin(m x) * s^p (1 - s)^p; peak amplitude eps for m != 0.
RealField bump_data(const GridPtr& g, double eps, int m, int p);

// eps * b_{n,k}(s) cos(k x) with b the unit-norm clamped eigenfunction on (0, 1).
RealField eigenfunction_data(const GridPtr& g, double eps, int n, int k);

// eps * cos(m x), constant in z: nonzero wall trace.
RealField wall_trace_data(const GridPtr& g, double eps, int m);

// Random combination of cos/sin(k x) sin(n pi s) for 1 <= k <= kmax,
// 1 <= n <= nmax with 1/(k^2 + n^2) amplitude decay, rescaled to peak
// amplitude eps. With clamped, multiplied by 16 s^2 (1 - s)^2 so the data
// and its normal derivative vanish on the walls. Bit-reproducible from seed.
RealField random_data(const GridPtr& g, double eps, int kmax, int nmax, std::uint64_t seed,
                      bool clamped = false);

}  // namespace stlab
