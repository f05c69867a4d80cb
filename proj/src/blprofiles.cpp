#include "stlab/blprofiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "stlab/banded.hpp"
#include "stlab/errors.hpp"
#include "stlab/fd.hpp"
#include "stlab/parallel.hpp"

namespace stlab {

namespace {

constexpr int kStencil = 7;  // first-derivative stencil width; wider one-sided stencils go unstable
constexpr int kInterp = 8;    // interpolation / quadrature stencil width

// exp(-1/u) for u > 0, else 0.
double bump_half(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// 1 for s <= 0, 0 for s >= 1, smooth in between.
double smooth_step_down(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    double a = bump_half(1.0 - s), b = bump_half(s);
    return a / (a + b);
}

int window_start(int i, int width, int n) { return std::clamp(i - width / 2, 0, n - width); }

std::vector<double> slice(const std::vector<double>& v, int first, int width) {
    return std::vector<double>(v.begin() + first, v.begin() + first + width);
}

// First-derivative weights at every node, kStencil nodes each.
struct NodeStencils {
    std::vector<int> first;
    std::vector<double> w;  // w[i * kStencil + m]

    double weight(int i, int m) const { return w[static_cast<size_t>(i) * kStencil + m]; }
    double apply(int i, const std::vector<double>& f) const {
        double s = 0.0;
        for (int m = 0; m < kStencil; ++m) s += weight(i, m) * f[first[i] + m];
        return s;
    }
};

NodeStencils build_stencils(const std::vector<double>& z) {
    const int n = static_cast<int>(z.size());
    NodeStencils st;
    st.first.resize(n);
    st.w.resize(static_cast<size_t>(n) * kStencil);
    for (int i = 0; i < n; ++i) {
        int f = window_start(i, kStencil, n);
        st.first[i] = f;
        std::vector<double> c = fornberg_weights(z[i], slice(z, f, kStencil), 1);
        std::copy(c.begin() + kStencil, c.end(), st.w.begin() + static_cast<size_t>(i) * kStencil);
    }
    return st;
}

// Truncated Taylor series (value and derivatives / k!) up to order 5.
using Jet = std::array<double, 6>;

Jet jet_mul(const Jet& a, const Jet& b) {
    Jet r{};
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k <= i; ++k) r[i] += a[k] * b[i - k];
    return r;
}

Jet jet_exp(const Jet& a) {
    Jet r{};
    r[0] = std::exp(a[0]);
    for (int i = 1; i < 6; ++i) {
        double s = 0.0;
        for (int k = 1; k <= i; ++k) s += k * a[k] * r[i - k];
        r[i] = s / i;
    }
    return r;
}

// Derivatives 0..5 of exp(-Z^6) sum_r g_r Z^{d_r} / d_r! at Z.
std::array<double, 6> lifting_jet(double Z, const std::array<int, 3>& ord, const std::array<double, 3>& g) {
    Jet x{Z, 1.0, 0, 0, 0, 0};
    Jet x6 = jet_mul(jet_mul(jet_mul(x, x), jet_mul(x, x)), jet_mul(x, x));
    for (double& v : x6) v = -v;
    Jet eta = jet_exp(x6);
    Jet poly{};
    for (int r = 0; r < 3; ++r) {
        // Z^d / d! expanded around Z
        const int d = ord[r];
        for (int k = 0; k <= std::min(d, 5); ++k) {
            double c = 1.0;
            for (int q = 0; q < k; ++q) c /= (q + 1);
            double fac = 1.0;
            for (int q = 2; q <= d - k; ++q) fac *= q;
            poly[k] += g[r] * c * std::pow(Z, d - k) / fac;
        }
    }
    Jet l = jet_mul(eta, poly);
    std::array<double, 6> out{};
    double fac = 1.0;
    for (int k = 0; k < 6; ++k) {
        if (k > 0) fac *= k;
        out[k] = l[k] * fac;
    }
    return out;
}

void fit_decay_into(BLProfile& p) {
    auto cp = fit_stretched_decay(p.z, p.d[0], p.z_max() / 4, 3 * p.z_max() / 4);
    p.decay_c = cp[0];
    p.decay_exponent = cp[1];
}

}  // namespace

std::array<int, 3> bc_orders(BCVariant v) {
    switch (v) {
        case BCVariant::i: return {0, 1, 4};
        case BCVariant::ii: return {0, 3, 4};
        case BCVariant::iii: return {0, 2, 3};
        case BCVariant::iv: return {0, 1, 2};
    }
    return {0, 1, 4};
}

void ProfileODEProblem::validate() const {
    if (!(m > 0.0)) throw ConfigError("profile ODE: m must be positive");
    if (j < 0 || j > 4) throw ConfigError("profile ODE: j must lie in {0,...,4}");
    if (!(z_max >= 20.0)) throw ConfigError("profile ODE: z_max must be >= 20");
    if (n_points < 100) throw ConfigError("profile ODE: n_points must be >= 100");
}

std::vector<double> stretched_nodes(double z_max, int n) {
    const double b = (z_max - 10.0) / (z_max - 5.0), a = z_max * (1.0 - b);
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) {
        double xi = static_cast<double>(i) / (n - 1);
        z[i] = a * xi / (1.0 - b * xi);
    }
    z[n - 1] = z_max;
    return z;
}

double BLProfile::max_abs() const {
    double m = 0.0;
    for (double v : d[0]) m = std::max(m, std::abs(v));
    return m;
}

double BLProfile::eval(double Z, int order) const {
    if (order < 0 || order > 5) throw UnsupportedError("profile derivative order must be 0..5");
    if (Z < 0.0) throw ConfigError("profile evaluated at negative Z");
    if (Z >= z.back()) return 0.0;
    const int n = static_cast<int>(z.size());
    int i = static_cast<int>(std::upper_bound(z.begin(), z.end(), Z) - z.begin()) - 1;
    int f = std::clamp(i - kInterp / 2 + 1, 0, n - kInterp);
    std::vector<double> w = fornberg_weights(Z, slice(z, f, kInterp), 0);
    double s = 0.0;
    for (int m = 0; m < kInterp; ++m) s += w[m] * d[order][f + m];
    return s;
}

BLProfile solve_profile_ode(const ProfileODEProblem& p) {
    p.validate();
    const int n = p.n_points, nu = 5 * n;
    BLProfile out;
    out.z = stretched_nodes(p.z_max, n);
    const std::vector<double>& z = out.z;

    std::vector<double> src(n, 0.0);
    if (p.source) {
        double smax = 0.0;
        for (int i = 0; i < n; ++i) {
            src[i] = p.source(z[i]);
            smax = std::max(smax, std::abs(src[i]));
        }
        if (smax > 0.0 && std::abs(src[n - 1]) >= 1e-10 * smax)
            throw ConfigError("profile ODE: source does not decay by z_max");
    }

    const std::array<int, 3> ord = bc_orders(p.bc);
    // Lifting l = exp(-Z^6) P(Z): carries the boundary data, so the unknown
    // w = Psi - l has homogeneous conditions and source S - L l.
    std::vector<std::array<double, 6>> lift(n);
    for (int i = 0; i < n; ++i) {
        lift[i] = lifting_jet(z[i], ord, p.bc_values);
        src[i] -= z[i] * lift[i][5] - p.j * lift[i][4] + p.m * lift[i][0];
    }

    const NodeStencils st = build_stencils(z);
    // Unknown Y_c at node i sits at 5 i + c, Y_c = w^(c). Row 5 i + c holds
    // D Y_c = Y_{c+1} (c < 4) or Z D Y_4 - j Y_4 + m Y_0 = S (c = 4), except
    // for the slots taken by the conditions: (0, 2..4) at Z = 0 and
    // (n-1, 0..1) at z_max. The degenerate equation at Z = 0 is never imposed.
    struct Entry { int row, col; double v; };
    std::vector<Entry> entries;
    std::vector<double> rhs(nu, 0.0);
    for (int r = 0; r < 3; ++r) entries.push_back({2 + r, ord[r], 1.0});
    entries.push_back({5 * (n - 1) + 0, 5 * (n - 1) + 0, 1.0});
    entries.push_back({5 * (n - 1) + 1, 5 * (n - 1) + 1, 1.0});
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 5; ++c) {
            if (i == 0 && c >= 2) continue;
            if (i == n - 1 && c <= 1) continue;
            const int row = 5 * i + c;
            const double f = c < 4 ? 1.0 : z[i];
            for (int m = 0; m < kStencil; ++m)
                entries.push_back({row, 5 * (st.first[i] + m) + c, f * st.weight(i, m)});
            if (c < 4) {
                entries.push_back({row, 5 * i + c + 1, -1.0});
            } else {
                entries.push_back({row, 5 * i + 4, -static_cast<double>(p.j)});
                entries.push_back({row, 5 * i, p.m});
                rhs[row] = src[i];
            }
        }
    }

    std::vector<double> scale(nu, 0.0);
    int kl = 0, ku = 0;
    for (const Entry& e : entries) {
        scale[e.row] = std::max(scale[e.row], std::abs(e.v));
        kl = std::max(kl, e.row - e.col);
        ku = std::max(ku, e.col - e.row);
    }
    BandedMatrix a(nu, kl, ku);
    for (const Entry& e : entries) a.add(e.row, e.col, e.v / scale[e.row]);
    for (int r = 0; r < nu; ++r) rhs[r] /= scale[r];

    std::vector<double> y;
    try {
        y = BandedLU(a).solve(rhs);
    } catch (const NumericalError&) {
        throw NumericalError("profile ODE: singular collocation matrix (boundary variant inconsistent)");
    }

    for (int c = 0; c < 5; ++c) {
        out.d[c].resize(n);
        for (int i = 0; i < n; ++i) out.d[c][i] = y[5 * i + c] + lift[i][c];
    }
    out.d[5].resize(n);
    for (int i = 0; i < n; ++i) out.d[5][i] = st.apply(i, out.d[4]);

    out.residual_at.resize(n);
    out.residual = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = p.source ? p.source(z[i]) : 0.0;
        out.residual_at[i] = z[i] * out.d[5][i] - p.j * out.d[4][i] + p.m * out.d[0][i] - s;
        if (i > 0) out.residual = std::max(out.residual, std::abs(out.residual_at[i]));
    }
    const double scale_v = out.max_abs();
    out.residual_ok = scale_v == 0.0 || out.residual < 1e-7 * scale_v;
    if (scale_v > 0.0) fit_decay_into(out);
    return out;
}

BLProfile build_chi_profile(int j, double z_max, int n_points) {
    ProfileODEProblem p;
    p.j = 0;
    p.m = 4.0;
    p.z_max = z_max;
    p.n_points = n_points;
    if (j == 0) {
        p.bc = BCVariant::i;
        p.bc_values = {0.0, 0.0, 1.0};
        return solve_profile_ode(p);
    }
    if (j != 1) throw UnsupportedError("chi profiles exist for j = 0, 1 only");

    // phi = chi_1' solves the j = 0 equation with phi(0) = phi'''(0) = 0,
    // phi^(4)(0) = 1.
    p.bc = BCVariant::ii;
    p.bc_values = {0.0, 0.0, 1.0};
    BLProfile phi = solve_profile_ode(p);
    const int n = static_cast<int>(phi.z.size());

    BLProfile chi;
    chi.z = phi.z;
    std::vector<double> F = cumulative_integral(phi.z, phi.d[0]);
    chi.d[0].resize(n);
    for (int i = 0; i < n; ++i) chi.d[0][i] = F[i] - F[n - 1];
    for (int d = 1; d <= 5; ++d) chi.d[d] = phi.d[d - 1];
    chi.residual_at.resize(n);
    chi.residual = 0.0;
    for (int i = 0; i < n; ++i) {
        chi.residual_at[i] = chi.z[i] * chi.d[5][i] - chi.d[4][i] + 4.0 * chi.d[0][i];
        if (i > 0) chi.residual = std::max(chi.residual, std::abs(chi.residual_at[i]));
    }
    chi.residual_ok = chi.residual < 1e-7 * chi.max_abs();
    fit_decay_into(chi);
    return chi;
}

const BLProfile& chi_profile(int j) {
    if (j == 0) {
        static const BLProfile c0 = build_chi_profile(0);
        return c0;
    }
    if (j == 1) {
        static const BLProfile c1 = build_chi_profile(1);
        return c1;
    }
    throw UnsupportedError("chi profiles exist for j = 0, 1 only");
}

std::vector<double> cumulative_integral(const std::vector<double>& z, const std::vector<double>& f) {
    static const double gx[3] = {0.2386191860831909, 0.6612093864662645, 0.9324695142031521};
    static const double gw[3] = {0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
    const int n = static_cast<int>(z.size());
    if (n < kInterp || static_cast<int>(f.size()) != n) throw ConfigError("cumulative_integral: need >= 8 matching samples");
    std::vector<double> out(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        int first = std::clamp(i - kInterp / 2 + 1, 0, n - kInterp);
        std::vector<double> nodes = slice(z, first, kInterp);
        double mid = 0.5 * (z[i] + z[i + 1]), half = 0.5 * (z[i + 1] - z[i]), s = 0.0;
        for (int g = 0; g < 3; ++g)
            for (int sign : {-1, 1}) {
                std::vector<double> w = fornberg_weights(mid + sign * half * gx[g], nodes, 0);
                double v = 0.0;
                for (int m = 0; m < kInterp; ++m) v += w[m] * f[first + m];
                s += gw[g] * v;
            }
        out[i + 1] = out[i] + half * s;
    }
    return out;
}

double weighted_norm(const BLProfile& p, int k, double c) {
    if (k < 0 || k > 5) throw UnsupportedError("weighted_norm: derivative order must be 0..5");
    std::vector<double> f(p.z.size());
    for (size_t i = 0; i < f.size(); ++i) f[i] = p.d[k][i] * p.d[k][i] * std::exp(c * std::pow(p.z[i], 0.8));
    return cumulative_integral(p.z, f).back();
}

std::array<double, 2> fit_stretched_decay(const std::vector<double>& z, const std::vector<double>& v,
                                          double z_lo, double z_hi) {
    std::vector<double> zs, ls;
    const int n = static_cast<int>(z.size());
    for (int i = 1; i + 1 < n; ++i) {
        if (z[i] < z_lo || z[i] > z_hi) continue;
        double a = std::abs(v[i]);
        if (a > 0.0 && a >= std::abs(v[i - 1]) && a >= std::abs(v[i + 1])) {
            zs.push_back(z[i]);
            ls.push_back(std::log(a));
        }
    }
    if (zs.size() < 4) {
        zs.clear();
        ls.clear();
        for (int i = 0; i < n; ++i)
            if (z[i] >= z_lo && z[i] <= z_hi && v[i] != 0.0) {
                zs.push_back(z[i]);
                ls.push_back(std::log(std::abs(v[i])));
            }
    }
    if (zs.size() < 2) throw NumericalError("decay fit: not enough samples");

    // least squares of ls on zs^p: returns {slope, sse}
    auto fit = [&](double p) {
        const size_t m = zs.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < m; ++i) {
            double x = std::pow(zs[i], p);
            sx += x;
            sy += ls[i];
            sxx += x * x;
            sxy += x * ls[i];
        }
        double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        double icpt = (sy - slope * sx) / m, sse = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double r = ls[i] - icpt - slope * std::pow(zs[i], p);
            sse += r * r;
        }
        return std::array<double, 2>{slope, sse};
    };
    double best_p = 0.8, best_sse = INFINITY;
    for (int q = 200; q <= 1600; ++q) {
        double p = q * 1e-3;
        double sse = fit(p)[1];
        if (sse < best_sse) {
            best_sse = sse;
            best_p = p;
        }
    }
    return {-fit(0.8)[0], best_p};
}

void write_profile_csv(const BLProfile& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << "Z,psi,d1,d2,d3,d4,residual\n" << std::setprecision(17);
    for (size_t i = 0; i < p.z.size(); ++i) {
        os << p.z[i];
        for (int d = 0; d <= 4; ++d) os << ',' << p.d[d][i];
        os << ',' << (p.residual_at.empty() ? 0.0 : p.residual_at[i]) << '\n';
    }
    if (!os) throw ConfigError("failed writing " + path);
}

double wall_cutoff(double dist, double height) {
    return smooth_step_down((dist - 0.25 * height) / (0.25 * height));
}

BLFieldPrediction assemble_bl_linear(const RealField& theta0, double t, BLSide side, BLOrder order) {
    if (!(t >= 1.0)) throw ConfigError("boundary-layer prediction needs t >= 1");
    const GridPtr& g = theta0.grid;
    const int nz = g->nz(), kmax = g->nx() / 2;
    const double h = g->height();
    const BLProfile& c0 = chi_profile(0);
    const BLProfile& c1 = chi_profile(1);

    RealField fl = split_mean_fluct(theta0).fluct;
    SpectralField tr = to_spectral(fl);
    SpectralField dtr = to_spectral(dz_n(fl, 1));
    SpectralField th(g), ps(g);

    const double stretch = std::pow(1.0 + t, 0.25);
    const double a1 = std::pow(1.0 + t, -0.25), ap0 = 1.0 / (1.0 + t), ap1 = std::pow(1.0 + t, -1.25);
    const bool next = order == BLOrder::leading_plus_one;
    const cplx I(0.0, 1.0);

    parallel_for(kmax, [&](int idx) {
        const int k = idx + 1;
        const double kk = k, sk = std::sqrt(kk);
        const bool nyquist = k == kmax;
        for (int pass = 0; pass < 2; ++pass) {
            const bool bottom = pass == 0;
            if (bottom && side == BLSide::top) continue;
            if (!bottom && side == BLSide::bottom) continue;
            const int jw = bottom ? 0 : nz - 1;
            const cplx tw = tr.at(k, jw);
            const cplx gw = bottom ? dtr.at(k, 0) : -dtr.at(k, nz - 1);
            if (tw == 0.0 && (!next || gw == 0.0)) continue;
            for (int j = 0; j < nz; ++j) {
                double dist = bottom ? g->z(j) : h - g->z(j);
                double cut = wall_cutoff(dist, h);
                if (cut == 0.0) continue;
                double Z = sk * stretch * dist;
                cplx tv = tw * c0.eval(Z, 4);
                cplx pv = nyquist ? cplx(0.0) : ap0 * std::pow(kk, -2.0) * (I * kk * tw) * c0.eval(Z, 0);
                if (next) {
                    tv += a1 / sk * gw * c1.eval(Z, 4);
                    if (!nyquist) pv += ap1 * std::pow(kk, -2.5) * (I * kk * gw) * c1.eval(Z, 0);
                }
                th.at(k, j) += cut * tv;
                ps.at(k, j) += cut * pv;
            }
        }
    });

    BLFieldPrediction out;
    out.time = t;
    out.side = side;
    out.order = order;
    out.theta_bl = to_real(th);
    out.theta_bl.grid = g;
    out.psi_bl = to_real(ps);
    out.psi_bl.grid = g;
    return out;
}

}  // namespace stlab
