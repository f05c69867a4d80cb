#include "stlab/domain.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "stlab/errors.hpp"

namespace stlab {

namespace {
std::mutex g_planner_mutex;  // the FFTW planner is not thread safe
}

// Batched 1D transforms along x for every z column (stride nz, distance 1).
class FourierPlans {
public:
    FourierPlans(int nx, int nz) : nx_(nx), nz_(nz) {
        std::lock_guard lk(g_planner_mutex);
        std::vector<double> r(static_cast<size_t>(nx) * nz);
        std::vector<cplx> c(static_cast<size_t>(nx / 2 + 1) * nz);
        int n[1] = {nx};
        auto* cp = reinterpret_cast<fftw_complex*>(c.data());
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fwd_ = fftw_plan_many_dft_r2c(1, n, nz, r.data(), nullptr, nz, 1, cp, nullptr, nz, 1, flags);
        bwd_ = fftw_plan_many_dft_c2r(1, n, nz, cp, nullptr, nz, 1, r.data(), nullptr, nz, 1, flags);
        if (!fwd_ || !bwd_) throw NumericalError("FFTW planning failed");
    }
    ~FourierPlans() {
        std::lock_guard lk(g_planner_mutex);
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    void forward(const double* in, cplx* out) const {
        fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    }
    // Destroys `in`.
    void backward(cplx* in, double* out) const {
        fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out);
    }

private:
    int nx_, nz_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

Grid::Grid(int nx, int nz, double height, int fd_order)
    : nx_(nx), nz_(nz), height_(height), fd_order_(fd_order) {
    if (nx < 8 || nx % 2 != 0) throw ConfigError("nx must be even and >= 8 (got " + std::to_string(nx) + ")");
    if (nz < 9) throw ConfigError("nz must be >= 9 (got " + std::to_string(nz) + ")");
    if (!(height > 0.0)) throw ConfigError("height must be positive");
    if (fd_order != 2 && fd_order != 4 && fd_order != 6)
        throw ConfigError("fd_order must be 2, 4 or 6 (got " + std::to_string(fd_order) + ")");
    dx_ = 2.0 * M_PI / nx;
    dz_ = height / (nz - 1);
    z_.resize(nz);
    zw_.assign(nz, dz_);
    for (int j = 0; j < nz; ++j) z_[j] = j * dz_;
    z_[nz - 1] = height;
    // Trapezoid with fourth-order end corrections (extended Simpson form).
    const double ends[4] = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
    for (int m = 0; m < 4; ++m) zw_[m] = zw_[nz - 1 - m] = ends[m] * dz_;
    dz_ops_.resize(6);
    for (int d = 1; d <= 6; ++d)
        if (nz >= one_sided_width(d, fd_order)) dz_ops_[d - 1] = FDOperator(nz, dz_, d, fd_order);
    plans_ = std::make_unique<FourierPlans>(nx, nz);
}

Grid::~Grid() = default;

const FDOperator& Grid::dz_op(int order) const {
    if (order < 1 || order > 6) throw UnsupportedError("z-derivative order must be in 1..6");
    const FDOperator& op = dz_ops_[order - 1];
    if (op.size() == 0)
        throw ConfigError("nz = " + std::to_string(nz_) + " too small for a z-derivative of order " +
                          std::to_string(order));
    return op;
}

GridPtr make_grid(int nx, int nz, double height, int fd_order) {
    return std::make_shared<const Grid>(nx, nz, height, fd_order);
}

VerticalProfile::VerticalProfile(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid->nz()) throw ConfigError("profile length does not match nz");
}

RealField::RealField(GridPtr g) : grid(std::move(g)), values(static_cast<size_t>(grid->nx()) * grid->nz(), 0.0) {}

RealField::RealField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != static_cast<size_t>(grid->nx()) * grid->nz())
        throw ConfigError("field shape does not match the grid");
}

static void check_same(const RealField& a, const RealField& b) {
    if (!a.grid || !b.grid || !(a.grid == b.grid || a.grid->same_as(*b.grid)))
        throw ConfigError("fields live on different grids");
}

RealField& RealField::operator+=(const RealField& o) {
    check_same(*this, o);
    for (size_t n = 0; n < values.size(); ++n) values[n] += o.values[n];
    return *this;
}

RealField& RealField::operator-=(const RealField& o) {
    check_same(*this, o);
    for (size_t n = 0; n < values.size(); ++n) values[n] -= o.values[n];
    return *this;
}

RealField& RealField::operator*=(double a) {
    for (auto& v : values) v *= a;
    return *this;
}

void RealField::axpy(double a, const RealField& o) {
    check_same(*this, o);
    for (size_t n = 0; n < values.size(); ++n) values[n] += a * o.values[n];
}

bool RealField::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double RealField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double a, RealField f) { return f *= a; }

SpectralField::SpectralField(GridPtr g)
    : grid(std::move(g)), modes(static_cast<size_t>(grid->nk()) * grid->nz(), cplx(0.0, 0.0)) {}

cplx SpectralField::mode(int k, int j) const {
    const int nx = grid->nx();
    if (k <= -nx / 2 || k > nx / 2) throw ConfigError("wavenumber outside the resolved range");
    return k >= 0 ? at(k, j) : std::conj(at(-k, j));
}

SpectralField to_spectral(const RealField& f) {
    if (!f.grid || f.values.size() != static_cast<size_t>(f.grid->nx()) * f.grid->nz())
        throw ConfigError("field shape does not match the grid");
    SpectralField s(f.grid);
    f.grid->plans().forward(f.values.data(), s.modes.data());
    const double inv = 1.0 / f.grid->nx();
    for (auto& c : s.modes) c *= inv;
    // The k = 0 and Nyquist modes of a real field are real.
    const int nz = f.grid->nz(), kn = f.grid->nx() / 2;
    for (int j = 0; j < nz; ++j) {
        s.at(0, j).imag(0.0);
        s.at(kn, j).imag(0.0);
    }
    return s;
}

RealField to_real(const SpectralField& s) {
    RealField f(s.grid);
    std::vector<cplx> tmp(s.modes);
    const int nz = s.grid->nz(), kn = s.grid->nx() / 2;
    for (int j = 0; j < nz; ++j) {
        tmp[j].imag(0.0);
        tmp[static_cast<size_t>(kn) * nz + j].imag(0.0);
    }
    s.grid->plans().backward(tmp.data(), f.values.data());
    return f;
}

SpectralField dx_n(const SpectralField& s, int order) {
    SpectralField r = s;
    const int nz = s.grid->nz(), kn = s.grid->nx() / 2;
    for (int k = 0; k < s.grid->nk(); ++k) {
        cplx fac = std::pow(cplx(0.0, static_cast<double>(k)), order);
        if (k == kn && order % 2 == 1) fac = 0.0;
        if (order == 0) fac = 1.0;
        for (int j = 0; j < nz; ++j) r.at(k, j) *= fac;
    }
    return r;
}

RealField dx_n(const RealField& f, int order) {
    if (order < 0) throw UnsupportedError("negative derivative order");
    if (order == 0) return f;
    return to_real(dx_n(to_spectral(f), order));
}

RealField dz_n(const RealField& f, int order) {
    if (order == 0) return f;
    const FDOperator& op = f.grid->dz_op(order);
    RealField r(f.grid);
    const int nx = f.grid->nx(), nz = f.grid->nz();
    for (int i = 0; i < nx; ++i)
        op.apply(f.values.data() + static_cast<size_t>(i) * nz, r.values.data() + static_cast<size_t>(i) * nz);
    return r;
}

std::vector<double> dz_profile(const VerticalProfile& p, int order) {
    if (order == 0) return p.values;
    std::vector<double> r(p.values.size());
    p.grid->dz_op(order).apply(p.values.data(), r.data());
    return r;
}

RealField differentiate(const RealField& f, Axis axis, int order) {
    if (order < 1 || order > 4)
        throw UnsupportedError("differentiate supports orders 1..4 (got " + std::to_string(order) + ")");
    return axis == Axis::x ? dx_n(f, order) : dz_n(f, order);
}

MeanFluctPair split_mean_fluct(const RealField& f) {
    const int nx = f.grid->nx(), nz = f.grid->nz();
    std::vector<double> mean(nz, 0.0);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) mean[j] += f(i, j);
    for (auto& m : mean) m /= nx;
    RealField fl(f.grid);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) fl(i, j) = f(i, j) - mean[j];
    return {VerticalProfile(f.grid, std::move(mean)), std::move(fl)};
}

RealField broadcast(const VerticalProfile& p) {
    RealField r(p.grid);
    const int nx = p.grid->nx(), nz = p.grid->nz();
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) r(i, j) = p.values[j];
    return r;
}

double integrate(const RealField& f) {
    const int nx = f.grid->nx(), nz = f.grid->nz();
    const auto& w = f.grid->zw();
    double acc = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) acc += w[j] * f(i, j);
    return acc * f.grid->dx();
}

double inner(const RealField& a, const RealField& b) {
    check_same(a, b);
    const int nx = a.grid->nx(), nz = a.grid->nz();
    const auto& w = a.grid->zw();
    double acc = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) acc += w[j] * a(i, j) * b(i, j);
    return acc * a.grid->dx();
}

double l2_norm(const RealField& f) { return std::sqrt(inner(f, f)); }

double l2_norm_spectral(const SpectralField& s) {
    const int nz = s.grid->nz(), kn = s.grid->nx() / 2;
    const auto& w = s.grid->zw();
    double acc = 0.0;
    for (int k = 0; k <= kn; ++k) {
        double mult = (k == 0 || k == kn) ? 1.0 : 2.0;
        for (int j = 0; j < nz; ++j) acc += mult * w[j] * std::norm(s.at(k, j));
    }
    return std::sqrt(2.0 * M_PI * acc);
}

double integrate_z(const GridPtr& g, const std::vector<double>& v) {
    double acc = 0.0;
    for (int j = 0; j < g->nz(); ++j) acc += g->zw()[j] * v[j];
    return acc;
}

double l2_norm_z(const GridPtr& g, const std::vector<double>& v) {
    double acc = 0.0;
    for (int j = 0; j < g->nz(); ++j) acc += g->zw()[j] * v[j] * v[j];
    return std::sqrt(acc);
}

double h_norm_z(const VerticalProfile& p, int s) {
    double acc = 0.0;
    for (int d = 0; d <= s; ++d) {
        double n = l2_norm_z(p.grid, dz_profile(p, d));
        acc += n * n;
    }
    return std::sqrt(acc);
}

double sobolev_norm(const RealField& f, int s) {
    if (s < 0 || s > 6) throw UnsupportedError("sobolev_norm supports s in 0..6 (got " + std::to_string(s) + ")");
    const GridPtr& g = f.grid;
    const int nz = g->nz(), kn = g->nx() / 2;
    const auto& w = g->zw();
    double total = 0.0;
    for (int b = 0; b <= s; ++b) {
        SpectralField sh = to_spectral(dz_n(f, b));
        for (int k = 0; k <= kn; ++k) {
            double mult = (k == 0 || k == kn) ? 1.0 : 2.0;
            double col = 0.0;
            for (int j = 0; j < nz; ++j) col += w[j] * std::norm(sh.at(k, j));
            double weight = 0.0;  // sum over a <= s - b of k^{2a}
            double k2 = static_cast<double>(k) * k, p = 1.0;
            for (int a = 0; a <= s - b; ++a) {
                // odd x-derivatives drop the Nyquist mode
                if (!(k == kn && a % 2 == 1)) weight += p;
                p *= k2;
            }
            total += mult * weight * col;
        }
    }
    return std::sqrt(2.0 * M_PI * total);
}

}  // namespace stlab
