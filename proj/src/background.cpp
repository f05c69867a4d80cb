#include "stlab/background.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <memory>

#include "stlab/errors.hpp"

namespace stlab {

Background Background::affine(const GridPtr& g, double a, double b) {
    Background out;
    std::vector<double> t(g->nz()), s(g->nz(), b);
    for (int j = 0; j < g->nz(); ++j) t[j] = a + b * g->z(j);
    out.theta = VerticalProfile(g, std::move(t));
    out.slope = VerticalProfile(g, std::move(s));
    out.description = "affine(" + std::to_string(a) + ", " + std::to_string(b) + ")";
    return out;
}

Background Background::tabulated(const GridPtr& g, const std::vector<double>& z,
                                 const std::vector<double>& theta) {
    if (z.size() != theta.size()) throw ConfigError("background table: z and theta differ in length");
    if (z.size() < 3) throw ConfigError("background table needs at least 3 points");
    for (size_t i = 1; i < z.size(); ++i)
        if (!(z[i] > z[i - 1])) throw ConfigError("background table: z must be strictly increasing");
    const double tol = 1e-12 * g->height();
    if (z.front() > tol || z.back() < g->height() - tol)
        throw ConfigError("background table must cover [0, height]");

    gsl_set_error_handler_off();
    std::unique_ptr<gsl_interp_accel, void (*)(gsl_interp_accel*)> acc(gsl_interp_accel_alloc(),
                                                                       gsl_interp_accel_free);
    std::unique_ptr<gsl_spline, void (*)(gsl_spline*)> sp(gsl_spline_alloc(gsl_interp_cspline, z.size()),
                                                          gsl_spline_free);
    if (gsl_spline_init(sp.get(), z.data(), theta.data(), z.size()) != GSL_SUCCESS)
        throw NumericalError("background spline construction failed");

    Background out;
    std::vector<double> t(g->nz()), s(g->nz());
    for (int j = 0; j < g->nz(); ++j) {
        double zz = std::clamp(g->z(j), z.front(), z.back());
        t[j] = gsl_spline_eval(sp.get(), zz, acc.get());
        s[j] = gsl_spline_eval_deriv(sp.get(), zz, acc.get());
    }
    out.theta = VerticalProfile(g, std::move(t));
    out.slope = VerticalProfile(g, std::move(s));
    out.description = "tabulated(" + std::to_string(z.size()) + " points)";
    return out;
}

double Background::max_slope() const {
    return *std::max_element(slope.values.begin(), slope.values.end());
}

}  // namespace stlab
