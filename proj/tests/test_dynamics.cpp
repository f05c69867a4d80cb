#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "stlab/dynamics.hpp"
#include "stlab/errors.hpp"
#include "stlab/exact_linear.hpp"
#include "stlab/initial_data.hpp"
#include "stlab/io.hpp"
#include "stlab/spectrum.hpp"
#include "stlab/stokes.hpp"
#include "test_util.hpp"

using namespace stlab;
using stlab::test::Rng;
namespace fs = std::filesystem;

namespace {

std::string scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("stlab_dyn_" + name);
    fs::remove_all(p);
    return p.string();
}

double max_diff(const RealField& a, const RealField& b) { return (a - b).max_abs(); }

// Projection of f on the profile of g, relative to g.
double amplitude(const RealField& f, const RealField& g) { return inner(f, g) / inner(g, g); }

// Cells whose corners straddle lambda, times the longest cell side.
double interface_length(const RealField& rho, double lam) {
    const GridPtr& g = rho.grid;
    int crossed = 0;
    for (int i = 0; i < g->nx(); ++i)
        for (int j = 0; j + 1 < g->nz(); ++j) {
            int ip = (i + 1) % g->nx();
            double v[4] = {rho(i, j), rho(ip, j), rho(i, j + 1), rho(ip, j + 1)};
            bool above = false, below = false;
            for (double x : v) (x > lam ? above : below) = true;
            crossed += above && below;
        }
    return crossed * std::max(g->dx(), g->dz());
}

StepperConfig fixed(Mode mode, double dt, double t_final) {
    StepperConfig c;
    c.mode = mode;
    c.auto_dt = false;
    c.dt = dt;
    c.t_final = t_final;
    return c;
}

}  // namespace

TEST(Dynamics, StratifiedStateIsSteady) {
    auto g = make_grid(16, 33);
    auto bg = Background::affine(g);
    // a z-only perturbation is another stratified profile
    RealField mean_only = sample(g, [](double, double z) { return 0.3 * z * z - 0.1 * std::sin(3 * z); });
    for (Mode m : {Mode::linear, Mode::nonlinear})
        for (const RealField& th : {RealField(g), mean_only}) {
            State s = make_state(bg, th);
            for (double dt : {0.5, 7.0, 300.0}) {
                State t = step(s, fixed(m, dt, 1.0), dt);
                EXPECT_LT(max_diff(t.rho, s.rho), 1e-14);
                EXPECT_NEAR(t.time, dt, 1e-15);
            }
        }
}

TEST(Dynamics, DiagnoseAnalyticValues) {
    auto g = make_grid(32, 65);
    State s = make_state(Background::affine(g), RealField(g));
    auto r = diagnose(s, {0.5});
    EXPECT_NEAR(r.potential_energy, M_PI / 3, 1e-13);
    EXPECT_NEAR(r.level_measures[0], M_PI, 1e-12);
    EXPECT_NEAR(r.mass, M_PI, 1e-13);
    EXPECT_EQ(r.dissipation, 0.0);
    EXPECT_NEAR(r.min_dz_rho, -1.0, 1e-12);
}

TEST(Dynamics, PropagatorMatchesDenseClampedSpectrum) {
    auto g = make_grid(16, 65);
    LinearPropagator prop(g, Background::affine(g).slope);
    for (int k : {1, 3}) {
        auto lam = discrete_clamped_eigenvalues(k, g->nz(), 0.0, 1.0, g->fd_order());
        std::vector<double> rates;
        for (auto mu : prop.mode_eigenvalues(k)) {
            EXPECT_LT(std::abs(mu.imag()), 1e-10 * std::abs(mu.real()));
            rates.push_back(-mu.real());
        }
        std::sort(rates.rbegin(), rates.rend());
        ASSERT_EQ(rates.size(), lam.size());
        for (size_t n = 0; n < 5; ++n) EXPECT_NEAR(rates[n], k * k / lam[n], 1e-9 * rates[n]);
    }
}

TEST(Dynamics, LinearEigenfunctionDecay) {
    auto g = make_grid(16, 129);
    auto bg = Background::affine(g);
    for (int k : {1, 2}) {
        const double lam = k * k / discrete_clamped_eigenvalues(k, g->nz(), 0.0, 1.0, g->fd_order())[0];
        RealField th0 = eigenfunction_data(g, 1e-2, 1, k);
        const double t = 5.0 / lam;
        LinearPropagator prop(g, bg.slope);
        EXPECT_NEAR(amplitude(prop.evolve(th0, t), th0), std::exp(-lam * t), 1e-4 * std::exp(-lam * t));

        StepperConfig c = fixed(Mode::linear, t / 2000, t);
        State s = make_state(bg, th0);
        for (int n = 0; n < 2000; ++n) s = step(s, c, c.dt);
        EXPECT_NEAR(amplitude(s.theta(), th0), std::exp(-lam * t), 1e-4 * std::exp(-lam * t));
    }
}

TEST(Dynamics, ExactLinearAgreesWithStepping) {
    auto g = make_grid(16, 65);
    auto bg = Background::affine(g);
    Rng rng(11);
    RealField th0 = stlab::test::random_smooth_field(g, rng, 3);
    LinearPropagator prop(g, bg.slope);
    const RealField exact = prop.evolve(th0, 200.0);
    std::vector<double> err;
    for (int n : {100, 200, 400}) {
        State s = make_state(bg, th0);
        StepperConfig c = fixed(Mode::linear, 200.0 / n, 200.0);
        for (int i = 0; i < n; ++i) s = step(s, c, c.dt);
        err.push_back(max_diff(s.theta(), exact));
    }
    // stepping converges to the propagator at third order
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::log2(err[i] / err[i + 1]), 3.0, 0.3);
    EXPECT_LT(err.back(), 1e-9 * th0.max_abs());
    // zero time is the identity
    EXPECT_LT(max_diff(prop.evolve(th0, 0.0), th0), 1e-12 * th0.max_abs());
}

TEST(Dynamics, StepDoublingOrder) {
    auto g = make_grid(32, 65);
    auto bg = Background::affine(g);
    RealField th0 = stlab::random_data(g, 0.5, 3, 3, 21, true);
    State s = make_state(bg, th0);
    std::vector<double> diffs;
    for (double dt : {80.0, 40.0, 20.0}) {
        StepperConfig c = fixed(Mode::nonlinear, dt, dt);
        State one = step(s, c, dt);
        State two = step(step(s, c, dt / 2), c, dt / 2);
        diffs.push_back(max_diff(one.rho, two.rho));
    }
    for (size_t i = 0; i + 1 < diffs.size(); ++i) {
        double order = std::log2(diffs[i] / diffs[i + 1]);
        // local error of a third-order method: dt^4
        EXPECT_GT(order, 3.0) << diffs[i] << " " << diffs[i + 1];
        EXPECT_LT(order, 5.0);
    }
}

TEST(Dynamics, AutoDtRespectsCflAndCaps) {
    auto g = make_grid(32, 65);
    auto bg = Background::affine(g);
    StepperConfig c;
    c.t_final = 1;
    State calm = make_state(bg, bump_data(g, 1e-3, 1, 3));
    EXPECT_DOUBLE_EQ(stable_dt(calm, c), c.dt_max);
    State wild = make_state(bg, stlab::random_data(g, 1e4, 4, 4, 3));
    auto [u1, u2] = velocity(wild.psi);
    double dt = stable_dt(wild, c);
    EXPECT_LE(dt * u1.max_abs(), c.cfl * g->dx() * (1 + 1e-12));
    EXPECT_LE(dt * u2.max_abs(), c.cfl * g->dz() * (1 + 1e-12));
    EXPECT_GE(dt, c.dt_min);
}

TEST(Dynamics, EnergyIdentityStab) {
    auto g = make_grid(64, 129);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = bump_data(g, 0.01, 1, 3);
    spec.stepper.t_final = 20;
    spec.stepper.diag_every = 0.5;
    auto res = run(spec);
    ASSERT_GT(res.records.size(), 10u);
    for (size_t i = 1; i + 1 < res.records.size(); ++i) {
        const auto &a = res.records[i - 1], &b = res.records[i + 1];
        double de = (b.potential_energy - a.potential_energy) / (b.time - a.time);
        double d = res.records[i].dissipation;
        EXPECT_LT(std::abs(de + d), 1e-5 * d) << "t = " << res.records[i].time;
    }
}

TEST(Run, StratifiedScenarioIsConstant) {
    auto g = make_grid(16, 33);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = RealField(g);
    spec.stepper.t_final = 50;
    spec.stepper.diag_every = 5;
    spec.lambdas = {0.25, 0.5};
    auto res = run(spec);
    ASSERT_EQ(res.records.size(), 11u);
    auto ref = diagnostics_row(res.records[0]);
    for (const auto& r : res.records) {
        auto row = diagnostics_row(r);
        for (size_t c = 1; c < row.size(); ++c) EXPECT_NEAR(row[c], ref[c], 1e-10);
    }
}

TEST(Run, StabEnergyStrictlyDecreasing) {
    auto g = make_grid(64, 129);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = bump_data(g, 0.01, 1, 3);
    spec.stepper.t_final = 100;
    spec.stepper.diag_every = 5;
    auto res = run(spec);
    for (size_t i = 1; i < res.records.size(); ++i)
        EXPECT_LT(res.records[i].potential_energy, res.records[i - 1].potential_energy);
}

TEST(Run, LinearTraceDecaysSlowly) {
    auto g = make_grid(16, 129);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = wall_trace_data(g, 0.01, 1);
    spec.stepper.mode = Mode::linear;
    spec.stepper.t_final = 1000;
    spec.exact_linear = true;
    auto res = run(spec);
    double a0 = res.records.front().l2_theta_fluct, a1 = res.records.back().l2_theta_fluct;
    EXPECT_LT(a1, a0);
    EXPECT_GT(a1, 0.2 * a0);
}

TEST(Run, OutputTimesAndFiles) {
    auto g = make_grid(16, 33);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = bump_data(g, 0.01, 1, 2);
    spec.stepper.t_final = 10;
    spec.stepper.diag_every = 2.5;
    spec.stepper.snapshot_every = 5;
    spec.stepper.diag_times = {1.0};
    spec.out_dir = scratch_dir("files");
    spec.keep_snapshots = true;
    auto res = run(spec);
    std::vector<double> times;
    for (const auto& r : res.records) times.push_back(r.time);
    EXPECT_EQ(times, (std::vector<double>{0, 1, 2.5, 5, 7.5, 10}));
    ASSERT_EQ(res.snapshots.size(), 2u);
    EXPECT_EQ(res.snapshots[1].time, 10.0);
    EXPECT_EQ(res.files.size(), 3u);
    for (const auto& f : res.files) EXPECT_TRUE(fs::exists(fs::path(spec.out_dir) / f)) << f;
    std::ifstream in(fs::path(spec.out_dir) / "timeseries.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 7);
}

TEST(Run, DeterministicTimeSeries) {
    auto g = make_grid(16, 33);
    std::string out[2];
    for (int r = 0; r < 2; ++r) {
        RunSpec spec;
        spec.background = Background::affine(g);
        spec.theta0 = stlab::random_data(g, 0.05, 3, 3, 99);
        spec.stepper.t_final = 20;
        spec.stepper.diag_every = 2;
        spec.lambdas = {0.5};
        spec.out_dir = scratch_dir("det" + std::to_string(r));
        run(spec);
        out[r] = read_file(spec.out_dir + "/timeseries.csv");
    }
    EXPECT_EQ(out[0], out[1]);
}

TEST(Run, BlowUpKeepsValidPrefix) {
    auto g = make_grid(16, 33);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = bump_data(g, 0.01, 1, 3);
    spec.stepper = fixed(Mode::linear, 2e4, 1e8);
    spec.stepper.diag_every = 2e4;
    spec.out_dir = scratch_dir("blowup");
    double when = -1;
    try {
        run(spec);
    } catch (const BlowUpError& e) {
        when = e.time;
    }
    ASSERT_GT(when, 0.0);
    std::ifstream in(spec.out_dir + "/timeseries.csv");
    std::string line, last;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    EXPECT_GT(rows, 2);
    EXPECT_LE(std::stod(last.substr(0, last.find(','))), when);
}

TEST(Run, RejectsBadConfigurations) {
    auto g = make_grid(16, 33);
    RunSpec spec;
    spec.background = Background::affine(g);
    spec.theta0 = RealField(g);
    spec.stepper.t_final = 0;
    EXPECT_THROW(run(spec), ConfigError);
    spec.stepper.t_final = 1;
    spec.exact_linear = true;
    EXPECT_THROW(run(spec), ConfigError);
}

TEST(Background, TabulatedSplineReproducesAffine) {
    auto g = make_grid(16, 33);
    auto bg = Background::tabulated(g, {0, 0.25, 0.5, 1}, {1, 0.75, 0.5, 0});
    for (int j = 0; j < g->nz(); ++j) {
        EXPECT_NEAR(bg.theta[j], 1 - g->z(j), 1e-14);
        EXPECT_NEAR(bg.slope[j], -1, 1e-13);
    }
    EXPECT_TRUE(bg.strictly_decreasing());
    EXPECT_THROW(Background::tabulated(g, {0, 0.5}, {1, 0}), ConfigError);
    EXPECT_THROW(Background::tabulated(g, {0, 0.5, 0.9}, {1, 0.5, 0.1}), ConfigError);
    auto bad = Background::tabulated(g, {0, 0.5, 1}, {1, 1.2, 0});
    EXPECT_FALSE(bad.strictly_decreasing());
}

TEST(InitialData, ConstructorsAndReproducibility) {
    auto g = make_grid(32, 65);
    EXPECT_NEAR(bump_data(g, 0.01, 1, 3).max_abs(), 0.01, 1e-5);
    auto a = stlab::random_data(g, 0.1, 4, 4, 5), b = stlab::random_data(g, 0.1, 4, 4, 5), c = stlab::random_data(g, 0.1, 4, 4, 6);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    EXPECT_NEAR(a.max_abs(), 0.1, 1e-15);
    auto cl = stlab::random_data(g, 0.1, 4, 4, 5, true);
    for (int i = 0; i < g->nx(); ++i)
        for (int j : {0, g->nz() - 1}) EXPECT_NEAR(cl(i, j), 0.0, 1e-15);
    // the normal derivative vanishes analytically; its one-sided estimate
    // converges at fourth order
    auto fine = make_grid(32, 257);
    double coarse_dz = dz_n(cl, 1).values[0], fine_dz = dz_n(stlab::random_data(fine, 0.1, 4, 4, 5, true), 1).values[0];
    EXPECT_GT(std::abs(coarse_dz / fine_dz), 100.0);
    auto e = eigenfunction_data(g, 1.0, 1, 2);
    EXPECT_NEAR(e(0, 0), 0.0, 1e-9);
    EXPECT_THROW(eigenfunction_data(g, 1.0, 0, 1), ConfigError);
}

// Randomized invariants of the evolution.

namespace {

struct Case {
    GridPtr g;
    RealField th0;
    double eps;
};

Case random_case(Rng& rng, bool clamped) {
    auto g = make_grid(8 * rng.integer(2, 4), rng.integer(33, 65));
    double eps = rng.uniform(0.01, 0.5);
    auto th0 = stlab::random_data(g, eps, rng.integer(1, g->nx() / 3 - 1), rng.integer(1, 4),
                           static_cast<std::uint64_t>(rng.integer(0, 1 << 30)), clamped);
    return {g, th0, eps};
}

}  // namespace

TEST(DynamicsProperty, MassEnergyAndLevelSets) {
    Rng rng(2024);
    for (int c = 0; c < 50; ++c) {
        Case cs = random_case(rng, false);
        RunSpec spec;
        spec.background = Background::affine(cs.g);
        spec.theta0 = cs.th0;
        spec.stepper.mode = c % 2 ? Mode::linear : Mode::nonlinear;
        spec.stepper.t_final = 100;
        spec.stepper.diag_every = 10;
        spec.lambdas = {0.25, 0.5, 0.75};
        auto res = run(spec);
        const auto& r0 = res.records.front();
        const double cell = cs.g->dx() * cs.g->dz();
        State s0 = make_state(spec.background, cs.th0);
        for (size_t i = 0; i < res.records.size(); ++i) {
            const auto& r = res.records[i];
            ASSERT_LT(std::abs(r.mass - r0.mass), 1e-8 * r0.mass) << "case " << c;
            if (i) ASSERT_LE(r.potential_energy, res.records[i - 1].potential_energy + 1e-9) << "case " << c;
            if (spec.stepper.mode == Mode::nonlinear)
                for (size_t l = 0; l < 3; ++l) {
                    double len = interface_length(s0.rho, spec.lambdas[l]);
                    ASSERT_LT(std::abs(r.level_measures[l] - r0.level_measures[l]), 2 * cell * len + 1e-12)
                        << "case " << c << " lambda " << spec.lambdas[l];
                }
        }
    }
}

TEST(DynamicsProperty, L2ConservedByDealiasedTransport) {
    Rng rng(2025);
    for (int c = 0; c < 50; ++c) {
        Case cs = random_case(rng, true);
        RunSpec spec;
        spec.background = Background::affine(cs.g);
        spec.theta0 = cs.th0;
        spec.stepper.t_final = 100;
        spec.stepper.diag_every = 25;
        auto res = run(spec);
        double l0 = res.records.front().l2_rho;
        for (const auto& r : res.records) ASSERT_LT(std::abs(r.l2_rho - l0), 1e-3 * l0) << "case " << c;
    }
}

TEST(DynamicsProperty, LinearSuperposition) {
    Rng rng(2026);
    for (int c = 0; c < 50; ++c) {
        Case f = random_case(rng, false);
        RealField gth = stlab::random_data(f.g, 0.2, 2, 3, static_cast<std::uint64_t>(c) + 7);
        double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        RealField mix = a * f.th0 + b * gth;
        auto bg = Background::affine(f.g);
        StepperConfig cfg = fixed(Mode::linear, rng.uniform(0.5, 3.0), 30);
        State sf = make_state(bg, f.th0), sg = make_state(bg, gth), sm = make_state(bg, mix);
        for (int n = 0; n < 10; ++n) {
            sf = step(sf, cfg, cfg.dt);
            sg = step(sg, cfg, cfg.dt);
            sm = step(sm, cfg, cfg.dt);
        }
        RealField expect = a * sf.theta() + b * sg.theta();
        ASSERT_LT(max_diff(sm.theta(), expect), 1e-10 * std::max(1.0, mix.max_abs())) << "case " << c;
    }
}

TEST(DynamicsProperty, WallTracesStayZero) {
    Rng rng(2027);
    for (int c = 0; c < 50; ++c) {
        // random x-harmonics on the quartic 16 s^2 (1-s)^2, whose discrete
        // normal derivative vanishes exactly at t = 0
        // small-data regime, as in the stability scenarios
        auto g = make_grid(8 * rng.integer(2, 4), rng.integer(65, 129));
        std::vector<double> a(5), b(5);
        for (int m = 0; m < 5; ++m) {
            a[m] = rng.uniform(-0.005, 0.005);
            b[m] = rng.uniform(-0.005, 0.005);
        }
        RunSpec spec;
        spec.background = Background::affine(g);
        spec.theta0 = sample(g, [&](double x, double z) {
            double v = 0;
            for (int m = 0; m < 5; ++m) v += a[m] * std::cos(m * x) + b[m] * std::sin(m * x);
            return 16 * v * z * z * (1 - z) * (1 - z);
        });
        spec.stepper.t_final = 50;
        spec.stepper.diag_every = 10;
        auto res = run(spec);
        for (const auto& r : res.records) {
            ASSERT_LT(r.wall_theta, 1e-6) << "case " << c;
            ASSERT_LT(r.wall_dz_theta, 1e-6) << "case " << c;
        }
    }
}
