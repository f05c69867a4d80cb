#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "stlab/domain.hpp"

namespace stlab {

// Sets of three derivative orders imposed at Z = 0:
//   i: {0, 1, 4}   ii: {0, 3, 4}   iii: {0, 2, 3}   iv: {0, 1, 2}
enum class BCVariant { i, ii, iii, iv };

std::array<int, 3> bc_orders(BCVariant v);

// Z Psi^(5) - j Psi^(4) + m Psi = S on (0, z_max) with the variant's three
// conditions at 0 and Psi = Psi' = 0 at z_max. Profiles decay only like
// exp(-0.49 Z^{4/5}), hence the large default radius.
struct ProfileODEProblem {
    double m = 4.0;
    int j = 0;
    std::function<double(double)> source;  // empty means S = 0
    BCVariant bc = BCVariant::i;
    std::array<double, 3> bc_values{0.0, 0.0, 0.0};  // in the order of bc_orders
    double z_max = 120.0;
    int n_points = 6000;

    void validate() const;
};

// Stretched nodes on [0, z_max]; half of them lie in [0, 5].
std::vector<double> stretched_nodes(double z_max, int n);

struct BLProfile {
    std::vector<double> z;
    std::array<std::vector<double>, 6> d;  // d[0] = Psi, d[k] = Psi^(k); d[5] by differentiating d[4]
    std::vector<double> residual_at;       // pointwise ODE residual
    double residual = 0.0;                 // max over interior nodes
    bool residual_ok = true;               // residual < 1e-7 max|Psi|
    double decay_c = 0.0;                  // fit of log env ~ a - c Z^{4/5}
    double decay_exponent = 0.0;           // best p in log env ~ a - c Z^p

    double z_max() const { return z.back(); }
    double max_abs() const;
    // Psi^(order)(Z) by local interpolation; 0 beyond z_max.
    double eval(double Z, int order = 0) const;
};

// Collocation of the first-order system for (Psi, ..., Psi^(4)) with 7-point
// stencils on the stretched grid.
BLProfile solve_profile_ode(const ProfileODEProblem& p);

// chi_0: j = 0, chi(0) = chi'(0) = 0, chi^(4)(0) = 1.
// chi_1: j = 1, chi'(0) = chi^(4)(0) = 0, chi^(5)(0) = 1, built as
// -int_Z^inf phi with phi the variant (ii) solution, phi^(4)(0) = 1.
BLProfile build_chi_profile(int j, double z_max = 120.0, int n_points = 6000);
// Cached build_chi_profile(j) with the default grid.
const BLProfile& chi_profile(int j);

// Discrete int |Psi^(k)|^2 exp(c Z^{4/5}) dZ.
double weighted_norm(const BLProfile& p, int k, double c);

// F_i = int_0^{z_i} f with per-interval 8-point Lagrange quadrature.
std::vector<double> cumulative_integral(const std::vector<double>& z, const std::vector<double>& f);

// Fits log env|v| ~ a - c Z^p on [z_lo, z_hi], env being the local maxima of
// |v|. Returns {c for p = 4/5, best p from a grid search}.
std::array<double, 2> fit_stretched_decay(const std::vector<double>& z, const std::vector<double>& v,
                                          double z_lo, double z_hi);

void write_profile_csv(const BLProfile& p, const std::string& path);

enum class BLSide { top, bottom, both };
enum class BLOrder { leading, leading_plus_one };

struct BLFieldPrediction {
    double time = 0.0;
    RealField theta_bl;
    RealField psi_bl;
    BLSide side = BLSide::both;
    BLOrder order = BLOrder::leading;
};

// Smooth cutoff in the distance to a wall: 1 on [0, h/4], 0 beyond h/2.
double wall_cutoff(double dist, double height);

// Boundary-layer fields lifting the wall traces of theta0' (and of d_z theta0'
// at the next order) at time t >= 1.
BLFieldPrediction assemble_bl_linear(const RealField& theta0, double t, BLSide side,
                                     BLOrder order = BLOrder::leading);

}  // namespace stlab
