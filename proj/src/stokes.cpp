#include "stlab/stokes.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "stlab/errors.hpp"
#include "stlab/parallel.hpp"

namespace stlab {

namespace {

BandedMatrix assemble(const Grid& g, int k) {
    const int nz = g.nz();
    const FDOperator& d1 = g.dz_op(1);
    const FDOperator& d2 = g.dz_op(2);
    const FDOperator& d4 = g.dz_op(4);
    int kl = std::max(d4.lower_bandwidth(), d2.lower_bandwidth());
    int ku = std::max(d4.upper_bandwidth(), d2.upper_bandwidth());
    // d_z rows at the walls sit one row off their node
    const Stencil& b0 = d1.row(0);
    const Stencil& b1 = d1.row(nz - 1);
    ku = std::max(ku, b0.first + static_cast<int>(b0.w.size()) - 1 - 1);
    kl = std::max(kl, (nz - 2) - b1.first);
    BandedMatrix a(nz, kl, ku);
    const double k2 = static_cast<double>(k) * k;
    for (int j = 2; j <= nz - 3; ++j) {
        const Stencil& s4 = d4.row(j);
        for (size_t m = 0; m < s4.w.size(); ++m) a.add(j, s4.first + static_cast<int>(m), s4.w[m]);
        const Stencil& s2 = d2.row(j);
        for (size_t m = 0; m < s2.w.size(); ++m) a.add(j, s2.first + static_cast<int>(m), -2.0 * k2 * s2.w[m]);
        a.add(j, j, k2 * k2);
    }
    a.set(0, 0, 1.0);
    a.set(nz - 1, nz - 1, 1.0);
    for (size_t m = 0; m < b0.w.size(); ++m) a.set(1, b0.first + static_cast<int>(m), b0.w[m]);
    for (size_t m = 0; m < b1.w.size(); ++m) a.set(nz - 2, b1.first + static_cast<int>(m), b1.w[m]);
    return a;
}

void zero_boundary_rows(double* v, int nz, int stride) {
    v[0] = v[stride] = 0.0;
    v[static_cast<long>(nz - 2) * stride] = v[static_cast<long>(nz - 1) * stride] = 0.0;
}

}  // namespace

ModeOperator::ModeOperator(const Grid& g, int k_) : k(k_), matrix(assemble(g, k_)), lu(matrix) {}

void ModeOperator::solve(double* rhs, int nrhs) const { lu.solve(rhs, nrhs); }

StokesSolver::StokesSolver(const GridPtr& g) : grid_(g) {
    modes_.reserve(g->nk());
    for (int k = 0; k < g->nk(); ++k) modes_.emplace_back(*g, k);
}

SpectralField StokesSolver::solve(const SpectralField& rhs) const {
    SpectralField out(grid_);
    const int nz = grid_->nz();
    parallel_for(grid_->nk(), [&](int k) {
        // real and imaginary parts as two right sides
        std::vector<double> b(2 * static_cast<size_t>(nz));
        const cplx* col = rhs.column(k);
        for (int j = 0; j < nz; ++j) {
            b[j] = col[j].real();
            b[nz + j] = col[j].imag();
        }
        zero_boundary_rows(b.data(), nz, 1);
        zero_boundary_rows(b.data() + nz, nz, 1);
        modes_[k].solve(b.data(), 2);
        cplx* o = out.column(k);
        for (int j = 0; j < nz; ++j) o[j] = cplx(b[j], b[nz + j]);
    });
    return out;
}

const StokesSolver& stokes_solver(const GridPtr& g) {
    static std::mutex mu;
    static std::map<const Grid*, std::pair<std::weak_ptr<const Grid>, std::shared_ptr<StokesSolver>>> cache;
    std::lock_guard lk(mu);
    for (auto it = cache.begin(); it != cache.end();) {
        if (it->second.first.expired())
            it = cache.erase(it);
        else
            ++it;
    }
    auto it = cache.find(g.get());
    if (it != cache.end()) return *it->second.second;
    auto s = std::make_shared<StokesSolver>(g);
    cache[g.get()] = {g, s};
    return *s;
}

RealField solve_bilaplacian(const RealField& f) {
    return to_real(stokes_solver(f.grid).solve(to_spectral(f)));
}

SpectralField solve_stream_spectral(const SpectralField& theta_hat) {
    const GridPtr& g = theta_hat.grid;
    SpectralField rhs(g);
    const int nz = g->nz();
    for (int k = 1; k < g->nx() / 2; ++k)
        for (int j = 0; j < nz; ++j) rhs.at(k, j) = cplx(0.0, static_cast<double>(k)) * theta_hat.at(k, j);
    return stokes_solver(g).solve(rhs);
}

RealField solve_stream(const RealField& theta) {
    if (!theta.all_finite()) throw NumericalError("solve_stream: non-finite input");
    return to_real(solve_stream_spectral(to_spectral(theta)));
}

std::pair<RealField, RealField> velocity(const RealField& psi) {
    RealField u1 = dz_n(psi, 1);
    u1 *= -1.0;
    return {std::move(u1), dx_n(psi, 1)};
}

RealField apply_L(const RealField& theta) { return dx_n(solve_stream(theta), 1); }

RealField laplacian(const RealField& f) { return dx_n(f, 2) + dz_n(f, 2); }

double dissipation(const RealField& psi) {
    auto [u1, u2] = velocity(psi);
    double acc = 0.0;
    for (const RealField* u : {&u1, &u2}) {
        double a = l2_norm(dx_n(*u, 1)), b = l2_norm(dz_n(*u, 1));
        acc += a * a + b * b;
    }
    return acc;
}

}  // namespace stlab
