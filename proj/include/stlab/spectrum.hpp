#pragma once

#include <string>
#include <vector>

namespace stlab {

enum class StripMode { symmetric, unit };  // (-1, 1) or (0, 1)

// Eigenpair of (d_z^2 - k^2)^2 with clamped walls. lambda = (omega^2 + k^2)^2,
// r^2 = omega^2 + 2k^2. n counts from 1 (smallest eigenvalue for this k).
struct SpectrumEntry {
    int n = 0;
    int k = 0;
    double lambda = 0.0;
    double omega = 0.0;
    double r = 0.0;
    bool even = true;       // symmetric about the strip center
    double residual = 0.0;  // max wall |b|, |b'| of the normalized eigenfunction
    std::vector<double> z;       // sample nodes
    std::vector<double> eigfun;  // unit L2 norm on the strip

    double operator()(double z) const;  // evaluates the eigenfunction
    double derivative(double z) const;
    double norm_factor = 1.0;
    double center = 0.0, half_width = 1.0;
};

// The n_max smallest eigenpairs for wavenumber k, found by bisection on the
// wall condition of the even/odd ansatz. n_samples uniform samples of each
// eigenfunction over the strip are stored.
std::vector<SpectrumEntry> clamped_spectrum(int k, int n_max, StripMode mode, int n_samples = 257);

// Ascending eigenvalues of the finite-difference clamped operator on nz
// uniform nodes over (z0, z1), boundary unknowns eliminated.
std::vector<double> discrete_clamped_eigenvalues(int k, int nz, double z0, double z1, int fd_order);

void write_spectrum_csv(const std::string& path, const std::vector<SpectrumEntry>& entries);

}  // namespace stlab
