#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "stlab/fd.hpp"

namespace stlab {

using cplx = std::complex<double>;

class FourierPlans;

// Channel T x (0, height): nx Fourier points in x on [0, 2pi), nz uniform
// nodes in z including both walls. Owns the x-transform plans and the
// z-derivative stencils; shared read-only by every field on it.
class Grid {
public:
    Grid(int nx, int nz, double height = 1.0, int fd_order = 4);
    ~Grid();
    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    int nx() const { return nx_; }
    int nz() const { return nz_; }
    int nk() const { return nx_ / 2 + 1; }  // stored wavenumbers 0..nx/2
    double height() const { return height_; }
    int fd_order() const { return fd_order_; }
    double dx() const { return dx_; }
    double dz() const { return dz_; }
    double x(int i) const { return i * dx_; }
    double z(int j) const { return z_[j]; }
    const std::vector<double>& z_nodes() const { return z_; }
    // Quadrature weights in z: trapezoid with fourth-order end corrections.
    const std::vector<double>& zw() const { return zw_; }
    double area() const { return 2.0 * M_PI * height_; }

    // z-derivative operator of order 1..6 at the configured accuracy.
    const FDOperator& dz_op(int order) const;
    const FourierPlans& plans() const { return *plans_; }

    bool same_as(const Grid& o) const {
        return nx_ == o.nx_ && nz_ == o.nz_ && height_ == o.height_ && fd_order_ == o.fd_order_;
    }

private:
    int nx_, nz_;
    double height_;
    int fd_order_;
    double dx_, dz_;
    std::vector<double> z_, zw_;
    std::vector<FDOperator> dz_ops_;  // index order-1; empty when nz is too small
    std::unique_ptr<FourierPlans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int nx, int nz, double height = 1.0, int fd_order = 4);

// Function of z only, sampled on the grid nodes.
struct VerticalProfile {
    GridPtr grid;
    std::vector<double> values;

    VerticalProfile() = default;
    VerticalProfile(GridPtr g, std::vector<double> v);
    explicit VerticalProfile(GridPtr g) : VerticalProfile(g, std::vector<double>(g->nz(), 0.0)) {}
    double operator[](int j) const { return values[j]; }
};

// Physical-space field, values[i * nz + j] for x index i and z index j.
struct RealField {
    GridPtr grid;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(GridPtr g);
    RealField(GridPtr g, std::vector<double> v);

    double& operator()(int i, int j) { return values[static_cast<size_t>(i) * grid->nz() + j]; }
    double operator()(int i, int j) const { return values[static_cast<size_t>(i) * grid->nz() + j]; }

    RealField& operator+=(const RealField& o);
    RealField& operator-=(const RealField& o);
    RealField& operator*=(double a);
    void axpy(double a, const RealField& o);  // this += a * o
    bool all_finite() const;
    double max_abs() const;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double a, RealField f);

// Fourier coefficients in x: f(x, z) = sum_k fhat_k(z) e^{ikx} for
// k in {-nx/2+1, ..., nx/2}. Only k = 0..nx/2 are stored; negative modes
// are the conjugates.
struct SpectralField {
    GridPtr grid;
    std::vector<cplx> modes;  // modes[k * nz + j], k = 0..nx/2

    SpectralField() = default;
    explicit SpectralField(GridPtr g);

    cplx& at(int k, int j) { return modes[static_cast<size_t>(k) * grid->nz() + j]; }
    cplx at(int k, int j) const { return modes[static_cast<size_t>(k) * grid->nz() + j]; }
    // Any k in {-nx/2+1, ..., nx/2}.
    cplx mode(int k, int j) const;
    cplx* column(int k) { return modes.data() + static_cast<size_t>(k) * grid->nz(); }
    const cplx* column(int k) const { return modes.data() + static_cast<size_t>(k) * grid->nz(); }
};

struct MeanFluctPair {
    VerticalProfile mean;
    RealField fluct;
};

enum class Axis { x, z };

SpectralField to_spectral(const RealField& f);
RealField to_real(const SpectralField& s);

// Spectral in x, finite differences in z. order 1..4.
RealField differentiate(const RealField& f, Axis axis, int order);
// Same without the public order limit (x: any order, z: 1..6).
RealField dx_n(const RealField& f, int order);
RealField dz_n(const RealField& f, int order);
SpectralField dx_n(const SpectralField& s, int order);
std::vector<double> dz_profile(const VerticalProfile& p, int order);

MeanFluctPair split_mean_fluct(const RealField& f);
RealField broadcast(const VerticalProfile& p);

// Trapezoid in z, exact spectral quadrature in x.
double integrate(const RealField& f);
double inner(const RealField& a, const RealField& b);
double l2_norm(const RealField& f);
double l2_norm_spectral(const SpectralField& s);
// Profile norms on (0, height) without the 2pi factor.
double integrate_z(const GridPtr& g, const std::vector<double>& v);
double l2_norm_z(const GridPtr& g, const std::vector<double>& v);
double h_norm_z(const VerticalProfile& p, int s);

// (sum over |alpha| <= s of ||d^alpha f||^2)^{1/2}, mixed derivatives included.
double sobolev_norm(const RealField& f, int s);

// Field from a callable f(x, z).
template <class F>
RealField sample(const GridPtr& g, F&& f) {
    RealField r(g);
    for (int i = 0; i < g->nx(); ++i)
        for (int j = 0; j < g->nz(); ++j) r(i, j) = f(g->x(i), g->z(j));
    return r;
}

}  // namespace stlab
