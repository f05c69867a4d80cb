#include "stlab/initial_data.hpp"

#include <cmath>
#include <random>

#include "stlab/errors.hpp"
#include "stlab/spectrum.hpp"

namespace stlab {

RealField bump_data(const GridPtr& g, double eps, int m, int p) {
    if (p < 0) throw ConfigError("bump exponent p must be >= 0");
    const double c = std::pow(4.0, p), h = g->height();
    return sample(g, [&](double x, double z) {
        double s = z / h;
        return eps * c * std::sin(m * x) * std::pow(s * (1.0 - s), p);
    });
}

RealField eigenfunction_data(const GridPtr& g, double eps, int n, int k) {
    if (n < 1) throw ConfigError("eigenfunction index n counts from 1");
    if (k < 0 || k >= g->nx() / 2) throw ConfigError("eigenfunction wavenumber out of range");
    auto entries = clamped_spectrum(k, n, StripMode::unit);
    const SpectrumEntry& e = entries.back();
    const double h = g->height();
    std::vector<double> prof(g->nz());
    for (int j = 0; j < g->nz(); ++j) prof[j] = e(g->z(j) / h);
    return sample(g, [&](double x, double z) {
        int j = static_cast<int>(std::lround(z / g->dz()));
        return eps * prof[j] * std::cos(k * x);
    });
}

RealField wall_trace_data(const GridPtr& g, double eps, int m) {
    return sample(g, [&](double x, double) { return eps * std::cos(m * x); });
}

RealField random_data(const GridPtr& g, double eps, int kmax, int nmax, std::uint64_t seed, bool clamped) {
    if (kmax < 1 || nmax < 1) throw ConfigError("random data needs kmax >= 1 and nmax >= 1");
    if (kmax >= g->nx() / 2) throw ConfigError("random data kmax must be below nx/2");
    std::mt19937_64 eng(seed);
    // engine bits mapped directly so the stream does not depend on the
    // standard library's distribution implementation
    auto uniform = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    std::vector<double> a(static_cast<size_t>(kmax) * nmax), b(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        a[i] = uniform();
        b[i] = uniform();
    }
    const double h = g->height();
    RealField f = sample(g, [&](double x, double z) {
        double s = z / h, v = 0.0;
        for (int k = 1; k <= kmax; ++k)
            for (int n = 1; n <= nmax; ++n) {
                size_t i = static_cast<size_t>(k - 1) * nmax + (n - 1);
                double w = 1.0 / (k * k + n * n);
                v += w * (a[i] * std::cos(k * x) + b[i] * std::sin(k * x)) * std::sin(n * M_PI * s);
            }
        if (clamped) v *= 16.0 * s * s * (1.0 - s) * (1.0 - s);
        return v;
    });
    double peak = f.max_abs();
    if (peak > 0) f *= eps / peak;
    return f;
}

}  // namespace stlab
