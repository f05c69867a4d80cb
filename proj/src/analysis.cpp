#include "stlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stlab/errors.hpp"

namespace stlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LineFit {
    double slope, intercept, r2;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit: all abscissae coincide");
    double slope = sxy / sxx;
    double r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    return {slope, my - slope * mx, r2};
}

// Root of the cubic through 4 samples around the first crossing of level.
double crossing(const std::vector<double>& d, const std::vector<double>& r, int j, double level) {
    // r[j-1] > level >= r[j]
    const int n = static_cast<int>(d.size());
    int f = std::clamp(j - 2, 0, n - 4);
    std::vector<double> xs(d.begin() + f, d.begin() + f + 4);
    auto value = [&](double x) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            for (int b = 0; b < 4; ++b)
                if (b != a) l *= (x - xs[b]) / (xs[a] - xs[b]);
            s += l * r[f + a];
        }
        return s - level;
    };
    double lo = d[j - 1], hi = d[j];
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (value(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v, double t_min,
                          double t_max) {
    if (t.size() != v.size()) throw ConfigError("fit_power_law: times and values differ in length");
    if (t.empty()) throw ConfigError("fit_power_law: empty series");
    if (!(t_min >= 1.0) || !(t_max > t_min)) throw ConfigError("fit_power_law: window must satisfy 1 <= t_min < t_max");
    auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    const double tol = 1e-9 * std::max(1.0, *hi);
    if (t_min < *lo - tol || t_max > *hi + tol) throw ConfigError("fit_power_law: window outside the series range");
    std::vector<double> x, y;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_min - tol || t[i] > t_max + tol) continue;
        if (!(v[i] > 0.0)) throw ConfigError("fit_power_law: nonpositive value at t = " + std::to_string(t[i]));
        x.push_back(std::log1p(t[i]));
        y.push_back(std::log(v[i]));
    }
    if (x.size() < 8)
        throw ConfigError("fit_power_law: " + std::to_string(x.size()) + " samples in window, need >= 8");
    LineFit lf = least_squares(x, y);
    PowerLawFit out;
    out.exponent = -lf.slope;
    out.prefactor = std::exp(lf.intercept);
    out.t_min = t_min;
    out.t_max = t_max;
    out.r_squared = lf.r2;
    out.n_samples = static_cast<int>(x.size());
    return out;
}

double log_log_exponent(const std::vector<double>& t, const std::vector<double>& v) {
    std::vector<double> x, y;
    for (size_t i = 0; i < t.size(); ++i) {
        if (!(v[i] > 0.0) || !(t[i] > 0.0) || !std::isfinite(v[i])) continue;
        x.push_back(std::log(t[i]));
        y.push_back(std::log(v[i]));
    }
    if (x.size() < 2) return kNaN;
    return -least_squares(x, y).slope;
}

std::vector<double> rms_profile(const RealField& theta) {
    const GridPtr& g = theta.grid;
    RealField fl = split_mean_fluct(theta).fluct;
    std::vector<double> r(g->nz(), 0.0);
    for (int j = 0; j < g->nz(); ++j) {
        double s = 0.0;
        for (int i = 0; i < g->nx(); ++i) s += fl(i, j) * fl(i, j);
        r[j] = std::sqrt(s / g->nx());
    }
    return r;
}

double l2_norm_band(const RealField& f, double z0, double z1) {
    const GridPtr& g = f.grid;
    double s = 0.0;
    for (int j = 0; j + 1 < g->nz(); ++j) {
        double a = g->z(j), b = g->z(j + 1);
        if (a < z0 - 1e-12 || b > z1 + 1e-12) continue;
        double ca = 0.0, cb = 0.0;
        for (int i = 0; i < g->nx(); ++i) {
            ca += f(i, j) * f(i, j);
            cb += f(i, j + 1) * f(i, j + 1);
        }
        s += 0.5 * (b - a) * (ca + cb) * g->dx();
    }
    return std::sqrt(s);
}

BLMeasurement extract_bl(const std::vector<TimedField>& snapshots, BLSide side) {
    if (side == BLSide::both) throw ConfigError("extract_bl: choose the top or the bottom wall");
    BLMeasurement m;
    m.side = side;
    for (const TimedField& s : snapshots) {
        if (s.time < 10.0) continue;
        const GridPtr& g = s.theta.grid;
        const int nz = g->nz();
        const double h = g->height();
        std::vector<double> r = rms_profile(s.theta), d(nz), rr(nz);
        for (int j = 0; j < nz; ++j) {
            int jj = side == BLSide::bottom ? j : nz - 1 - j;
            d[j] = side == BLSide::bottom ? g->z(jj) : h - g->z(jj);
            rr[j] = r[jj];
        }
        double width = kNaN;
        const double level = rr[0] / std::exp(1.0);
        if (rr[0] > 0.0) {
            for (int j = 1; j < nz && d[j - 1] < 0.5 * h; ++j)
                if (rr[j] <= level) {
                    width = crossing(d, rr, j, level);
                    break;
                }
        }
        RealField fl = split_mean_fluct(s.theta).fluct;
        double amp = side == BLSide::bottom ? l2_norm_band(fl, 0.0, h / 3) : l2_norm_band(fl, 2 * h / 3, h);
        m.times.push_back(s.time);
        m.widths.push_back(width);
        m.amplitudes.push_back(amp);
    }
    if (m.times.size() < 4)
        throw ConfigError("extract_bl: need at least 4 snapshots at t >= 10, got " + std::to_string(m.times.size()));
    m.width_exponent = log_log_exponent(m.times, m.widths);
    m.amplitude_exponent = log_log_exponent(m.times, m.amplitudes);
    return m;
}

ValidationReport validate_prediction(const RealField& simulated, double time, const BLFieldPrediction& predicted,
                                     const VerticalProfile& mean_offset, double strip_width) {
    const GridPtr& g = simulated.grid;
    if (!predicted.theta_bl.grid || !predicted.theta_bl.grid->same_as(*g) || !mean_offset.grid ||
        !mean_offset.grid->same_as(*g))
        throw ConfigError("validate_prediction: grids differ");
    if (std::abs(time - predicted.time) > 1e-9 * std::max(1.0, time))
        throw ConfigError("validate_prediction: prediction time differs from the simulated time");
    ValidationReport rep;
    rep.time = time;
    rep.strip_width = strip_width > 0.0 ? strip_width : 4.0 * std::pow(1.0 + time, -0.25);
    rep.strip_width = std::min(rep.strip_width, 0.5 * g->height());
    RealField dev = simulated - broadcast(mean_offset);
    RealField res = dev - predicted.theta_bl;
    rep.l2_residual = l2_norm(res);
    rep.l2_sim_fluct = l2_norm(dev);
    rep.l2_predicted = l2_norm(predicted.theta_bl);
    rep.l2_bottom_strip = l2_norm_band(res, 0.0, rep.strip_width);
    rep.l2_top_strip = l2_norm_band(res, g->height() - rep.strip_width, g->height());
    return rep;
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

const char* side_name(BLSide s) {
    switch (s) {
        case BLSide::top: return "top";
        case BLSide::bottom: return "bottom";
        case BLSide::both: return "both";
    }
    return "both";
}

}  // namespace

nlohmann::json to_json(const PowerLawFit& f) {
    return {{"exponent", num(f.exponent)}, {"prefactor", num(f.prefactor)},
            {"window", {f.t_min, f.t_max}}, {"r_squared", num(f.r_squared)},
            {"n_samples", f.n_samples}};
}

nlohmann::json to_json(const BLMeasurement& m) {
    nlohmann::json w = nlohmann::json::array(), a = nlohmann::json::array();
    for (double v : m.widths) w.push_back(num(v));
    for (double v : m.amplitudes) a.push_back(num(v));
    return {{"side", side_name(m.side)}, {"times", m.times}, {"widths", w}, {"amplitudes", a},
            {"width_exponent", num(m.width_exponent)}, {"amplitude_exponent", num(m.amplitude_exponent)}};
}

nlohmann::json to_json(const ValidationReport& r) {
    return {{"time", r.time}, {"strip_width", r.strip_width}, {"l2_residual", num(r.l2_residual)},
            {"l2_bottom_strip", num(r.l2_bottom_strip)}, {"l2_top_strip", num(r.l2_top_strip)},
            {"l2_sim_fluct", num(r.l2_sim_fluct)}, {"l2_predicted", num(r.l2_predicted)}};
}

}  // namespace stlab
