#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "stlab/domain.hpp"

namespace stlab {

// Exact solution operator of the discrete linearized system
// d_t theta = -Theta' d_x psi per Fourier mode. The stream solve ignores the
// two nodes next to each wall, so the interior nodes evolve under a closed
// dense block M and the wall nodes follow by integrating N theta_I in time.
// M is diagonalized once; evolve(t) costs one dense product per mode.
class LinearPropagator {
public:
    LinearPropagator(const GridPtr& g, const VerticalProfile& slope);

    RealField evolve(const RealField& theta0, double t) const;

    // Eigenvalues of the interior block for wavenumber 1 <= k < nx/2.
    const Eigen::VectorXcd& mode_eigenvalues(int k) const;
    // Interior block itself (rows and columns are nodes 2..nz-3).
    const Eigen::MatrixXd& mode_matrix(int k) const;

    const GridPtr& grid() const { return grid_; }

private:
    struct Mode {
        Eigen::MatrixXd m;        // interior block
        Eigen::VectorXcd mu;      // eigenvalues of m
        Eigen::MatrixXcd v, vinv; // eigenvectors and inverse
        Eigen::MatrixXcd nv;      // wall-node block times v
    };
    GridPtr grid_;
    std::vector<Mode> modes_;  // index k; empty for k = 0 and Nyquist
};

}  // namespace stlab
