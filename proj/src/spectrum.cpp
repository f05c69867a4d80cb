#include "stlab/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "stlab/errors.hpp"
#include "stlab/fd.hpp"
#include "stlab/io.hpp"

namespace stlab {

namespace {

// Wall conditions b'(a) = 0 with b(a) = 0 built into the ansatz.
double even_condition(double w, double r, double a) {
    return w * std::sin(w * a) + r * std::cos(w * a) * std::tanh(r * a);
}

double odd_condition(double w, double r, double a) {
    return w * std::cos(w * a) * std::tanh(r * a) - r * std::sin(w * a);
}

// cosh(r s) / cosh(r a) and sinh(r s) / sinh(r a) without overflow.
double cosh_ratio(double r, double s, double a) {
    double as = std::abs(s);
    return std::exp(r * (as - a)) * (1.0 + std::exp(-2.0 * r * as)) / (1.0 + std::exp(-2.0 * r * a));
}

double sinh_ratio(double r, double s, double a) {
    double as = std::abs(s);
    double v = std::exp(r * (as - a)) * (-std::expm1(-2.0 * r * as)) / (-std::expm1(-2.0 * r * a));
    return s < 0 ? -v : v;
}

struct Shape {
    double w, r, a;
    bool even;
    double value(double s) const {
        return even ? std::cos(w * s) - std::cos(w * a) * cosh_ratio(r, s, a)
                    : std::sin(w * s) - std::sin(w * a) * sinh_ratio(r, s, a);
    }
    double slope(double s) const {
        // cosh(rs)/cosh(ra) has derivative r tanh(rs) times itself;
        // sinh(rs)/sinh(ra) has derivative r cosh(rs)/sinh(ra).
        if (even) return -w * std::sin(w * s) - std::cos(w * a) * r * std::tanh(r * s) * cosh_ratio(r, s, a);
        return w * std::cos(w * s) - std::sin(w * a) * r * cosh_ratio(r, s, a) / std::tanh(r * a);
    }
};

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double SpectrumEntry::operator()(double zz) const {
    Shape sh{omega, r, half_width, even};
    return norm_factor * sh.value(zz - center);
}

double SpectrumEntry::derivative(double zz) const {
    Shape sh{omega, r, half_width, even};
    return norm_factor * sh.slope(zz - center);
}

std::vector<SpectrumEntry> clamped_spectrum(int k, int n_max, StripMode mode, int n_samples) {
    if (n_max < 1) throw ConfigError("clamped_spectrum: n_max must be >= 1");
    if (n_samples < 2) throw ConfigError("clamped_spectrum: need at least 2 samples");
    const double a = mode == StripMode::symmetric ? 1.0 : 0.5;
    const double center = mode == StripMode::symmetric ? 0.0 : 0.5;
    const double k2 = static_cast<double>(k) * k;
    auto rr = [&](double w) { return std::sqrt(w * w + 2.0 * k2); };

    struct Root {
        double w;
        bool even;
    };
    std::vector<Root> roots;
    // Consecutive roots are about pi/(2a) apart; scan well below that.
    const double step = M_PI / (a * 64.0);
    double w_max = (n_max + 2) * M_PI / a;
    // omega^2 = lambda^{1/2} - k^2 exceeds the Dirichlet value (pi / 2a)^2;
    // starting above zero skips the trivial root at omega = 0.
    double lo = 0.5 / a;
    while (static_cast<int>(roots.size()) < n_max) {
        double flo_e = even_condition(lo, rr(lo), a), flo_o = odd_condition(lo, rr(lo), a);
        for (double w = lo + step; w <= w_max; w += step) {
            double fe = even_condition(w, rr(w), a), fo = odd_condition(w, rr(w), a);
            if ((fe < 0) != (flo_e < 0))
                roots.push_back({bisect([&](double x) { return even_condition(x, rr(x), a); }, w - step, w), true});
            if ((fo < 0) != (flo_o < 0))
                roots.push_back({bisect([&](double x) { return odd_condition(x, rr(x), a); }, w - step, w), false});
            flo_e = fe;
            flo_o = fo;
            lo = w;
        }
        if (static_cast<int>(roots.size()) < n_max) {
            if (w_max > 1e4 * (n_max + 2) / a)
                throw NumericalError("clamped_spectrum: no bracket for (n=" + std::to_string(roots.size() + 1) +
                                     ", k=" + std::to_string(k) + ")");
            w_max *= 2.0;
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Root& p, const Root& q) { return p.w < q.w; });
    roots.resize(n_max);

    std::vector<SpectrumEntry> out;
    for (int n = 0; n < n_max; ++n) {
        SpectrumEntry e;
        e.n = n + 1;
        e.k = k;
        e.omega = roots[n].w;
        e.r = rr(e.omega);
        e.even = roots[n].even;
        double s2 = e.omega * e.omega + k2;
        e.lambda = s2 * s2;
        e.center = center;
        e.half_width = a;
        Shape sh{e.omega, e.r, a, e.even};
        // Unit L2 norm by composite Simpson on a fine grid.
        const int m = 8192;
        double h = 2.0 * a / m, acc = 0.0;
        for (int i = 0; i <= m; ++i) {
            double v = sh.value(-a + i * h);
            double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += wgt * v * v;
        }
        double nrm = std::sqrt(acc * h / 3.0);
        // fix the sign: positive at the center (even) or rising there (odd)
        double ref = e.even ? sh.value(0.0) : sh.slope(0.0);
        e.norm_factor = (ref < 0 ? -1.0 : 1.0) / nrm;
        e.residual = std::max({std::abs(e(center - a)), std::abs(e(center + a)), std::abs(e.derivative(center - a)),
                               std::abs(e.derivative(center + a))});
        e.z.resize(n_samples);
        e.eigfun.resize(n_samples);
        for (int i = 0; i < n_samples; ++i) {
            double zz = center - a + 2.0 * a * i / (n_samples - 1);
            e.z[i] = zz;
            e.eigfun[i] = e(zz);
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<double> discrete_clamped_eigenvalues(int k, int nz, double z0, double z1, int fd_order) {
    const double h = (z1 - z0) / (nz - 1);
    FDOperator d1(nz, h, 1, fd_order), d2(nz, h, 2, fd_order), d4(nz, h, 4, fd_order);
    const double k2 = static_cast<double>(k) * k;
    using Mat = Eigen::MatrixXd;
    // Full operator rows on equation nodes 2..nz-3.
    const int ni = nz - 4;
    Mat A = Mat::Zero(ni, nz);
    for (int j = 2; j <= nz - 3; ++j) {
        const Stencil& s4 = d4.row(j);
        for (size_t m = 0; m < s4.w.size(); ++m) A(j - 2, s4.first + m) += s4.w[m];
        const Stencil& s2 = d2.row(j);
        for (size_t m = 0; m < s2.w.size(); ++m) A(j - 2, s2.first + m) -= 2.0 * k2 * s2.w[m];
        A(j - 2, j) += k2 * k2;
    }
    // Clamped constraints G psi = 0, boundary unknowns {0, 1, nz-2, nz-1}.
    Mat G = Mat::Zero(4, nz);
    G(0, 0) = 1.0;
    G(3, nz - 1) = 1.0;
    for (size_t m = 0; m < d1.row(0).w.size(); ++m) G(1, d1.row(0).first + m) = d1.row(0).w[m];
    for (size_t m = 0; m < d1.row(nz - 1).w.size(); ++m) G(2, d1.row(nz - 1).first + m) = d1.row(nz - 1).w[m];
    const int bidx[4] = {0, 1, nz - 2, nz - 1};
    Mat GB(4, 4), GI(4, ni), AB(ni, 4), AI(ni, ni);
    for (int c = 0; c < 4; ++c) {
        GB.col(c) = G.col(bidx[c]);
        AB.col(c) = A.col(bidx[c]);
    }
    GI = G.middleCols(2, ni);
    AI = A.middleCols(2, ni);
    Mat K = AI - AB * GB.fullPivLu().solve(GI);
    Eigen::EigenSolver<Mat> es(K, false);
    std::vector<double> ev(ni);
    for (int i = 0; i < ni; ++i) ev[i] = es.eigenvalues()[i].real();
    std::sort(ev.begin(), ev.end());
    return ev;
}

void write_spectrum_csv(const std::string& path, const std::vector<SpectrumEntry>& entries) {
    std::vector<std::vector<double>> rows;
    for (const auto& e : entries)
        rows.push_back({double(e.n), double(e.k), e.lambda, e.omega, e.r, e.residual});
    write_csv(path, {"n", "k", "lambda", "omega", "r", "residual"}, rows);
}

}  // namespace stlab
