#include "stlab/exact_linear.hpp"

#include <cmath>

#include "stlab/errors.hpp"
#include "stlab/parallel.hpp"
#include "stlab/stokes.hpp"

namespace stlab {

namespace {

// (e^{mu t} - 1) / mu, continuous at mu = 0.
cplx phi1(cplx mu, double t) {
    cplx x = mu * t;
    if (std::abs(x) < 1e-8) return t * (1.0 + 0.5 * x);
    return (std::exp(x) - 1.0) / mu;
}

}  // namespace

LinearPropagator::LinearPropagator(const GridPtr& g, const VerticalProfile& slope) : grid_(g) {
    if (!slope.grid || !slope.grid->same_as(*g)) throw ConfigError("propagator: slope lives on another grid");
    const int nz = g->nz(), ni = nz - 4;
    modes_.resize(g->nk());
    const StokesSolver& solver = stokes_solver(g);
    parallel_for(g->nx() / 2 - 1, [&](int idx) {
        const int k = idx + 1;
        // column c of A^{-1} restricted to unit vectors at interior node c + 2
        Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(nz, ni);
        for (int c = 0; c < ni; ++c) cols(c + 2, c) = 1.0;
        solver.mode(k).solve(cols.data(), ni);
        const double k2 = static_cast<double>(k) * k;
        for (int j = 0; j < nz; ++j) cols.row(j) *= k2 * slope[j];

        Mode& md = modes_[k];
        md.m = cols.middleRows(2, ni);
        Eigen::MatrixXd nb(4, ni);
        nb.row(0) = cols.row(0);
        nb.row(1) = cols.row(1);
        nb.row(2) = cols.row(nz - 2);
        nb.row(3) = cols.row(nz - 1);
        Eigen::EigenSolver<Eigen::MatrixXd> es(md.m);
        if (es.info() != Eigen::Success) throw NumericalError("propagator eigendecomposition failed");
        md.mu = es.eigenvalues();
        md.v = es.eigenvectors();
        md.vinv = md.v.partialPivLu().inverse();
        md.nv = nb.cast<cplx>() * md.v;
    });
}

RealField LinearPropagator::evolve(const RealField& theta0, double t) const {
    if (!theta0.grid->same_as(*grid_)) throw ConfigError("propagator: field lives on another grid");
    const int nz = grid_->nz(), ni = nz - 4;
    SpectralField s = to_spectral(theta0);
    parallel_for(grid_->nx() / 2 - 1, [&](int idx) {
        const int k = idx + 1;
        const Mode& md = modes_[k];
        cplx* col = s.column(k);
        Eigen::Map<Eigen::VectorXcd> interior(col + 2, ni);
        Eigen::VectorXcd y = md.vinv * interior;
        Eigen::VectorXcd ye(ni), yi(ni);
        for (int c = 0; c < ni; ++c) {
            ye(c) = std::exp(md.mu(c) * t) * y(c);
            yi(c) = phi1(md.mu(c), t) * y(c);
        }
        Eigen::VectorXcd wall = md.nv * yi;
        interior = md.v * ye;
        col[0] += wall(0);
        col[1] += wall(1);
        col[nz - 2] += wall(2);
        col[nz - 1] += wall(3);
    });
    RealField out = to_real(s);
    out.grid = theta0.grid;
    return out;
}

const Eigen::VectorXcd& LinearPropagator::mode_eigenvalues(int k) const {
    if (k < 1 || k >= grid_->nx() / 2) throw ConfigError("propagator: wavenumber out of range");
    return modes_[k].mu;
}

const Eigen::MatrixXd& LinearPropagator::mode_matrix(int k) const {
    if (k < 1 || k >= grid_->nx() / 2) throw ConfigError("propagator: wavenumber out of range");
    return modes_[k].m;
}

}  // namespace stlab
