#include <gtest/gtest.h>

#include <cmath>

#include "stlab/errors.hpp"
#include "stlab/stokes.hpp"
#include "test_util.hpp"

using namespace stlab;
using stlab::test::Rng;

namespace {

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// psi* = q(z) e^z sin x with q = z^2 (1-z)^2; Laplacian^2 psi* = e^z (4q'' + 4q''' + q'''') sin x.
double q0(double z) { return z * z * (1 - z) * (1 - z); }
double f_exp(double z) {
    double q2 = 2 - 12 * z + 12 * z * z, q3 = -12 + 24 * z, q4 = 24;
    return std::exp(z) * (4 * q2 + 4 * q3 + q4);
}
// psi* = q(z) sin x; Laplacian^2 psi* = (q'''' - 2q'' + q) sin x.
double f_poly(double z) { return 24 - 2 * (2 - 12 * z + 12 * z * z) + q0(z); }

double smooth_step(double s) {
    auto e = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
    return e(s) / (e(s) + e(1 - s));
}

}  // namespace

TEST(ModeOperator, FactorizationReproducesProduct) {
    Rng rng(1);
    for (int nz : {17, 65, 257}) {
        auto g = make_grid(16, nz);
        for (int k : {0, 1, 5, 8}) {
            ModeOperator op(*g, k);
            std::vector<double> x(nz);
            for (auto& v : x) v = rng.uniform(-1, 1);
            // matrix * solve(matrix * x) against matrix * x
            auto b = op.matrix.multiply(x);
            auto y = op.matrix.multiply(op.lu.solve(b));
            double num = 0, den = 0;
            for (int j = 0; j < nz; ++j) {
                num += (y[j] - b[j]) * (y[j] - b[j]);
                den += b[j] * b[j];
            }
            EXPECT_LT(std::sqrt(num / den), 1e-10) << "nz " << nz << " k " << k;
        }
    }
}

TEST(SolveStream, StratifiedAndZeroGiveNoFlow) {
    auto g = make_grid(32, 65);
    auto strat = sample(g, [](double, double z) { return std::sin(3 * z) + z * z; });
    EXPECT_EQ(solve_stream(strat).max_abs(), 0.0);
    EXPECT_EQ(solve_stream(RealField(g)).max_abs(), 0.0);
}

TEST(SolveStream, QuarticManufacturedIsReproducedExactly) {
    // Every stencil is exact on quartics, so the only error is round-off.
    for (int nz : {65, 129, 257}) {
        auto g = make_grid(16, nz);
        auto theta = sample(g, [](double x, double z) { return -std::cos(x) * f_poly(z); });
        auto exact = sample(g, [](double x, double z) { return q0(z) * std::sin(x); });
        EXPECT_LT(l2_norm(solve_stream(theta) - exact), 1e-9 * l2_norm(exact));
    }
}

TEST(SolveStream, ManufacturedConvergenceOrder) {
    // Sixth order reaches round-off beyond nz = 129, so it uses coarser grids.
    for (int p : {2, 4, 6}) {
        std::vector<double> h, err;
        for (int nz : p == 6 ? std::vector<int>{17, 33, 65} : std::vector<int>{65, 129, 257}) {
            auto g = make_grid(16, nz, 1.0, p);
            auto theta = sample(g, [](double x, double z) { return -std::cos(x) * f_exp(z); });
            auto exact = sample(g, [](double x, double z) { return q0(z) * std::exp(z) * std::sin(x); });
            h.push_back(g->dz());
            err.push_back(l2_norm(solve_stream(theta) - exact));
        }
        EXPECT_NEAR(slope_loglog(h, err), p, 0.3) << "accuracy " << p;
    }
}

TEST(Velocity, AnalyticExample) {
    auto g = make_grid(16, 129);
    auto psi = sample(g, [](double x, double z) { return q0(z) * std::sin(x); });
    auto [u1, u2] = velocity(psi);
    for (int i = 0; i < g->nx(); ++i)
        for (int j = 0; j < g->nz(); ++j) {
            double x = g->x(i), z = g->z(j);
            EXPECT_NEAR(u1(i, j), -(2 * z * (1 - z) * (1 - z) - 2 * z * z * (1 - z)) * std::sin(x), 1e-12);
            EXPECT_NEAR(u2(i, j), q0(z) * std::cos(x), 1e-13);
        }
    auto [z1, z2] = velocity(RealField(g));
    EXPECT_EQ(z1.max_abs() + z2.max_abs(), 0.0);
}

TEST(Velocity, WallValuesAndDivergence) {
    Rng rng(4);
    auto g = make_grid(32, 129);
    auto theta = stlab::test::random_smooth_field(g, rng, 5);
    auto psi = solve_stream(theta);
    auto [u1, u2] = velocity(psi);
    double wall = 0.0;
    for (int i = 0; i < g->nx(); ++i)
        for (int j : {0, g->nz() - 1}) wall = std::max({wall, std::abs(u1(i, j)), std::abs(u2(i, j))});
    EXPECT_LT(wall, 1e-10 * std::max(1.0, u1.max_abs()));
    auto div = dx_n(u1, 1) + dz_n(u2, 1);
    double grad = std::hypot(l2_norm(dx_n(psi, 1)), l2_norm(dz_n(psi, 1)));
    EXPECT_LT(l2_norm(div), 1e-8 * grad);
}

TEST(StokesProperty, SelfAdjointPositivity) {
    Rng rng(31);
    auto g = make_grid(32, 129);
    for (int c = 0; c < 50; ++c) {
        auto th = split_mean_fluct(stlab::test::random_smooth_field(g, rng, 5, true)).fluct;
        auto psi = solve_stream(th);
        double lhs = -inner(dx_n(psi, 1), th);
        double rhs = std::pow(l2_norm(laplacian(psi)), 2);
        ASSERT_NEAR(lhs, rhs, 1e-6 * rhs) << "case " << c;
    }
}

TEST(StokesProperty, Linearity) {
    Rng rng(32);
    for (int c = 0; c < 50; ++c) {
        auto g = make_grid(8 * rng.integer(1, 4), rng.integer(17, 90));
        auto t1 = stlab::test::random_smooth_field(g, rng, 3);
        auto t2 = stlab::test::random_smooth_field(g, rng, 3);
        double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        auto lhs = solve_stream(a * t1 + b * t2);
        auto rhs = a * solve_stream(t1) + b * solve_stream(t2);
        // round-off amplified by the h^-4 conditioning of the mode operators
        ASSERT_LE((lhs - rhs).max_abs(), 1e-9 * rhs.max_abs());
    }
}

// ||Laplacian^{-2}(f(x, (1+t)^{1/4} z) cutoff(z))|| ~ (1+t)^{-3/4}, and
// (1+t)^{-1} once the second and third Z-moments of f vanish.
TEST(StokesProperty, ThinLayerInverseScaling) {
    auto g = make_grid(8, 513);
    auto run = [&](auto&& prof) {
        std::vector<double> t, n;
        for (int i = 0; i < 9; ++i) {
            double tt = 10.0 * std::pow(1e3, i / 8.0);
            double s = std::pow(1 + tt, 0.25);
            auto f = sample(g, [&](double x, double z) {
                double cut = 1.0 - smooth_step((z - 0.25) / 0.25);
                return std::cos(x) * prof(s * z) * cut;
            });
            t.push_back(1 + tt);
            n.push_back(l2_norm(solve_bilaplacian(f)));
        }
        return -slope_loglog(t, n);
    };
    double plain = run([](double Z) { return std::exp(-Z); });
    double moments = run([](double Z) { return (1 - 2 * Z / 3 + Z * Z / 12) * std::exp(-Z); });
    EXPECT_GE(plain, 0.70);
    EXPECT_LE(plain, 0.80);
    EXPECT_GE(moments, 0.95);
    EXPECT_LE(moments, 1.05);
    std::printf("thin-layer exponents: plain %.4f, with moments %.4f\n", plain, moments);
}
