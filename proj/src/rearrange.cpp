#include "stlab/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "stlab/errors.hpp"
#include "stlab/io.hpp"

namespace stlab {

namespace {

struct Tri {
    double a, b, c;  // sorted vertex values
    double area;
};

std::vector<Tri> triangulate(const RealField& f) {
    const GridPtr& g = f.grid;
    const int nx = g->nx(), nz = g->nz();
    std::vector<Tri> tris;
    tris.reserve(2 * static_cast<size_t>(nx) * (nz - 1));
    auto make = [](double p, double q, double r, double area) {
        double v[3] = {p, q, r};
        std::sort(v, v + 3);
        return Tri{v[0], v[1], v[2], area};
    };
    for (int i = 0; i < nx; ++i) {
        int ip = (i + 1) % nx;
        for (int j = 0; j + 1 < nz; ++j) {
            double half = 0.5 * g->dx() * (g->z(j + 1) - g->z(j));
            double f00 = f(i, j), f10 = f(ip, j), f01 = f(i, j + 1), f11 = f(ip, j + 1);
            tris.push_back(make(f00, f10, f11, half));
            tris.push_back(make(f00, f11, f01, half));
        }
    }
    return tris;
}

// Area of {u > lambda} for u linear on the triangle.
double tri_measure(const Tri& t, double lam) {
    if (lam >= t.c) return 0.0;
    if (lam < t.a) return t.area;
    if (lam >= t.b) return t.area * (t.c - lam) * (t.c - lam) / ((t.c - t.a) * (t.c - t.b));
    return t.area * (1.0 - (lam - t.a) * (lam - t.a) / ((t.b - t.a) * (t.c - t.a)));
}

double measure(const std::vector<Tri>& tris, double lam) {
    double acc = 0.0;
    for (const Tri& t : tris) acc += tri_measure(t, lam);
    return acc;
}

}  // namespace

VerticalProfile RearrangementProfile::on(const GridPtr& g) const {
    if (static_cast<int>(values.size()) != g->nz()) throw ConfigError("rearrangement profile does not match nz");
    return VerticalProfile(g, values);
}

double level_measure(const RealField& rho, double lambda) { return measure(triangulate(rho), lambda); }

RealField refine_x(const RealField& f, int factor) {
    if (factor < 1) throw ConfigError("refinement factor must be >= 1");
    if (factor == 1) return f;
    const GridPtr& g = f.grid;
    auto fine = make_grid(g->nx() * factor, g->nz(), g->height(), g->fd_order());
    SpectralField s = to_spectral(f), t(fine);
    const int nz = g->nz(), kn = g->nx() / 2;
    for (int k = 0; k <= kn; ++k)
        for (int j = 0; j < nz; ++j) t.at(k, j) = s.at(k, j) * (k == kn ? 0.5 : 1.0);
    // the old Nyquist mode splits evenly between +kn and -kn
    return to_real(t);
}

RearrangementProfile vertical_rearrangement(const RealField& rho_in, int x_refine) {
    const RealField rho0 = refine_x(rho_in, x_refine);
    const GridPtr& g = rho0.grid;
    const int nx = g->nx(), nz = g->nz();
    auto tris = triangulate(rho0);
    const double total = g->area();
    const double vmax = *std::max_element(rho0.values.begin(), rho0.values.end());
    const double vmin = *std::min_element(rho0.values.begin(), rho0.values.end());

    // Node values sorted in decreasing order (stable on index) with their
    // cell-area share give the first guess for every quantile.
    std::vector<int> order(rho0.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int p, int q) { return rho0.values[p] > rho0.values[q]; });
    std::vector<double> cum(order.size());
    double acc = 0.0;
    for (size_t n = 0; n < order.size(); ++n) {
        int j = order[n] % nz;
        double w = g->dx() * (j == 0 ? 0.5 * (g->z(1) - g->z(0))
                              : j == nz - 1 ? 0.5 * (g->z(nz - 1) - g->z(nz - 2))
                                            : 0.5 * (g->z(j + 1) - g->z(j - 1)));
        acc += w;
        cum[n] = acc;
    }

    RearrangementProfile out;
    out.z_nodes = rho_in.grid->z_nodes();
    out.values.resize(nz);
    std::vector<Tri> active;
    for (int j = 0; j < nz; ++j) {
        const double target = 2.0 * M_PI * g->z(j);
        if (j == 0 || target <= 0.0) {
            out.values[j] = vmax;
            continue;
        }
        if (j == nz - 1 || target >= total) {
            out.values[j] = vmin;
            continue;
        }
        size_t n = std::lower_bound(cum.begin(), cum.end(), target) - cum.begin();
        const int pad = 2 * nx;
        double hi = rho0.values[order[n >= static_cast<size_t>(pad) ? n - pad : 0]];
        double lo = rho0.values[order[std::min(order.size() - 1, n + pad)]];
        // predicate measure(lam) <= target holds at hi, fails below lo
        if (measure(tris, hi) > target) hi = vmax;
        if (lo > vmin && measure(tris, lo) <= target) lo = vmin;
        if (lo <= vmin) lo = std::nextafter(vmin, -INFINITY);
        // Only triangles straddling [lo, hi] change inside the bracket.
        active.clear();
        double fixed = 0.0;
        for (const Tri& t : tris) {
            if (t.a > hi)
                fixed += t.area;
            else if (t.c > lo)
                active.push_back(t);
        }
        auto mu = [&](double lam) {
            double s = fixed;
            for (const Tri& t : active) s += tri_measure(t, lam);
            return s;
        };
        for (int it = 0; it < 200 && hi > lo; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (mu(mid) <= target)
                hi = mid;
            else
                lo = mid;
        }
        out.values[j] = hi;
    }
    // enforce monotonicity against bisection round-off
    for (int j = 1; j < nz; ++j) out.values[j] = std::min(out.values[j], out.values[j - 1]);

    std::string bytes(reinterpret_cast<const char*>(rho_in.values.data()), rho_in.values.size() * sizeof(double));
    out.source_hash = git_blob_hash(bytes);
    return out;
}

void write_profile_csv(const std::string& path, const RearrangementProfile& p) {
    std::vector<std::vector<double>> rows;
    for (size_t j = 0; j < p.z_nodes.size(); ++j) rows.push_back({p.z_nodes[j], p.values[j]});
    write_csv(path, {"z", "value"}, rows);
}

}  // namespace stlab
