#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "stlab/banded.hpp"
#include "stlab/domain.hpp"

namespace stlab {

// (d_z^2 - k^2)^2 on the z nodes with clamped rows: row 0 and nz-1 impose
// psi = 0, rows 1 and nz-2 impose d_z psi = 0 at the walls using the
// one-sided first-derivative stencil. Interior rows 2..nz-3 carry the
// equation.
struct ModeOperator {
    ModeOperator(const Grid& g, int k);

    int k;
    BandedMatrix matrix;
    BandedLU lu;

    // Real right side with the boundary rows already zeroed.
    void solve(double* rhs, int nrhs = 1) const;
};

// Factorized mode operators for k = 0..nx/2 of one grid.
class StokesSolver {
public:
    explicit StokesSolver(const GridPtr& g);
    const ModeOperator& mode(int k) const { return modes_[k]; }
    const GridPtr& grid() const { return grid_; }

    // Clamped solve of (d_z^2 - k^2)^2 psi_k = rhs_k for every stored mode.
    // Boundary rows of rhs are ignored.
    SpectralField solve(const SpectralField& rhs) const;

private:
    GridPtr grid_;
    std::vector<ModeOperator> modes_;
};

// Solver cached per grid; factorizations are built once.
const StokesSolver& stokes_solver(const GridPtr& g);

// Laplacian^2 psi = f with psi = d_n psi = 0 on both walls.
RealField solve_bilaplacian(const RealField& f);
// Laplacian^2 psi = d_x theta, clamped. Mean and Nyquist modes give psi = 0.
RealField solve_stream(const RealField& theta);
SpectralField solve_stream_spectral(const SpectralField& theta_hat);
// u = (-d_z psi, d_x psi).
std::pair<RealField, RealField> velocity(const RealField& psi);
// L theta = d_x solve_stream(theta).
RealField apply_L(const RealField& theta);
RealField laplacian(const RealField& f);
// ||grad u||^2 for u = velocity(psi).
double dissipation(const RealField& psi);

}  // namespace stlab
