#include "stlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>

#include "stlab/errors.hpp"
#include "stlab/exact_linear.hpp"
#include "stlab/io.hpp"
#include "stlab/snapshot.hpp"
#include "stlab/stokes.hpp"

namespace stlab {

namespace fs = std::filesystem;

void StepperConfig::validate() const {
    if (!(t_final > 0)) throw ConfigError("t_final must be positive");
    if (!auto_dt && !(dt > 0)) throw ConfigError("dt must be positive");
    if (!(cfl > 0 && cfl <= 1)) throw ConfigError("cfl must lie in (0, 1]");
    if (!(dt_max > 0) || !(dt_min > 0) || dt_min > dt_max) throw ConfigError("need 0 < dt_min <= dt_max");
    if (snapshot_every < 0 || diag_every < 0) throw ConfigError("cadences must be non-negative");
    if (filter < 0) throw ConfigError("filter coefficient must be non-negative");
    for (double t : diag_times)
        if (!(t >= 0 && t <= t_final)) throw ConfigError("diagnostics time outside [0, t_final]");
    for (double t : snapshot_times)
        if (!(t >= 0 && t <= t_final)) throw ConfigError("snapshot time outside [0, t_final]");
}

RealField State::theta() const { return rho - broadcast(background); }

namespace {

State assemble_state(const VerticalProfile& bg, const VerticalProfile& slope, RealField theta, double time) {
    State s;
    s.time = time;
    s.background = bg;
    s.background_slope = slope;
    s.psi = solve_stream(theta);
    s.theta_pair = split_mean_fluct(theta);
    s.rho = std::move(theta);
    s.rho += broadcast(bg);
    return s;
}

RealField scale_rows(const RealField& f, const VerticalProfile& p) {
    RealField out = f;
    const int nx = f.grid->nx(), nz = f.grid->nz();
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) out(i, j) *= p[j];
    return out;
}

// Rate bound for the linear part: clamped eigenvalues dominate the simply
// supported ones, (pi^2/h^2 + k^2)^2, so k^2 / that bounds |k^2 / lambda_1(k)|.
double linear_rate_bound(const Grid& g, const VerticalProfile& slope) {
    double smax = 0.0;
    for (double v : slope.values) smax = std::max(smax, std::abs(v));
    const double q = M_PI * M_PI / (g.height() * g.height());
    double best = 0.0;
    for (int k = 1; k < g.nx() / 2; ++k) {
        double k2 = static_cast<double>(k) * k;
        best = std::max(best, k2 / ((q + k2) * (q + k2)));
    }
    return smax * best;
}

// The transport term integrates to zero exactly; its discrete integral is a
// truncation-level defect. Remove it along s^2 (1-s)^2, which leaves wall
// values and wall normal derivatives untouched.
void remove_mass_defect(RealField& adv) {
    const GridPtr& g = adv.grid;
    const int nx = g->nx(), nz = g->nz();
    std::vector<double> q(nz);
    for (int j = 0; j < nz; ++j) {
        double s = g->z(j) / g->height();
        q[j] = s * s * (1 - s) * (1 - s);
    }
    double defect = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) defect += g->zw()[j] * adv(i, j);
    defect /= nx * integrate_z(g, q);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) adv(i, j) -= defect * q[j];
}

void check_finite(const RealField& f, double t) {
    if (!f.all_finite()) throw BlowUpError(t, "non-finite values after the step from t = " + fmt_double(t));
}

}  // namespace

State make_state(const Background& bg, const RealField& theta, double time) {
    if (!bg.theta.grid || !bg.theta.grid->same_as(*theta.grid))
        throw ConfigError("background and perturbation live on different grids");
    return assemble_state(bg.theta, bg.slope, theta, time);
}

RealField theta_rate(const RealField& theta, const VerticalProfile& slope, const StepperConfig& cfg) {
    const GridPtr& g = theta.grid;
    RealField psi = solve_stream(theta);
    auto [u1, u2] = velocity(psi);
    RealField rate = scale_rows(u2, slope);
    rate *= -1.0;
    if (cfg.mode == Mode::nonlinear) {
        // transport term; u is divergence free and vanishes on the walls
        RealField adv(g);
        if (cfg.advection != Advection::advective) {
            RealField fx = u1, fz = u2;
            for (size_t n = 0; n < fx.values.size(); ++n) {
                fx.values[n] *= theta.values[n];
                fz.values[n] *= theta.values[n];
            }
            adv = dx_n(fx, 1);
            adv += dz_n(fz, 1);
        }
        if (cfg.advection != Advection::flux) {
            RealField a = dx_n(theta, 1), b = dz_n(theta, 1);
            for (size_t n = 0; n < a.values.size(); ++n)
                a.values[n] = u1.values[n] * a.values[n] + u2.values[n] * b.values[n];
            if (cfg.advection == Advection::skew) {
                adv *= 0.5;
                adv.axpy(0.5, a);
            } else {
                adv = std::move(a);
            }
        }
        // no-slip: the transport tendency on the walls is exactly zero, the
        // one-sided flux stencil there only adds truncation error
        const int nz = g->nz();
        for (int i = 0; i < g->nx(); ++i) adv(i, 0) = adv(i, nz - 1) = 0.0;
        remove_mass_defect(adv);
        rate -= adv;
    }
    if (cfg.filter > 0) {
        RealField d6 = dz_n(split_mean_fluct(theta).fluct, 6);
        const double c = cfg.filter * std::pow(g->dz(), 6);
        const int nz = g->nz();
        for (int i = 0; i < g->nx(); ++i)
            for (int j = 3; j < nz - 3; ++j) rate(i, j) += c * d6(i, j);
    }
    if (cfg.mode == Mode::nonlinear && cfg.dealias) {
        SpectralField s = to_spectral(rate);
        const int kc = g->nx() / 3;
        for (int k = kc + 1; k < g->nk(); ++k)
            for (int j = 0; j < g->nz(); ++j) s.at(k, j) = 0.0;
        rate = to_real(s);
    }
    return rate;
}

double stable_dt(const State& s, const StepperConfig& cfg) {
    const Grid& g = *s.rho.grid;
    double dt = cfg.dt_max;
    double lam = linear_rate_bound(g, s.background_slope);
    if (lam > 0) dt = std::min(dt, 0.5 / lam);
    if (cfg.mode == Mode::nonlinear) {
        auto [u1, u2] = velocity(s.psi);
        double a = u1.max_abs(), b = u2.max_abs();
        if (a > 0) dt = std::min(dt, cfg.cfl * g.dx() / a);
        if (b > 0) dt = std::min(dt, cfg.cfl * g.dz() / b);
    }
    return std::max(dt, cfg.dt_min);
}

State step(const State& s, const StepperConfig& cfg, double dt) {
    const VerticalProfile& slope = s.background_slope;
    RealField th = s.theta();
    RealField t1 = th;
    t1.axpy(dt, theta_rate(th, slope, cfg));
    check_finite(t1, s.time);
    RealField t2 = t1;
    t2.axpy(dt, theta_rate(t1, slope, cfg));
    t2 *= 0.25;
    t2.axpy(0.75, th);
    check_finite(t2, s.time);
    RealField t3 = t2;
    t3.axpy(dt, theta_rate(t2, slope, cfg));
    t3 *= 2.0 / 3.0;
    t3.axpy(1.0 / 3.0, th);
    check_finite(t3, s.time);
    return assemble_state(s.background, slope, std::move(t3), s.time + dt);
}

State step(const State& s, const StepperConfig& cfg) {
    return step(s, cfg, cfg.auto_dt ? stable_dt(s, cfg) : cfg.dt);
}

bool DiagnosticsRecord::all_finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    bool r = ok(time) && ok(potential_energy) && ok(dissipation) && ok(l2_theta_fluct) && ok(l2_dx3_fluct) &&
             ok(h4_dx_fluct) && ok(h2_G) && ok(mass) && ok(l2_rho) && ok(min_dz_rho) && ok(wall_theta) &&
             ok(wall_dz_theta) && ok(dist_rearranged);
    for (double v : h_theta_fluct) r = r && ok(v);
    for (double v : level_measures) r = r && ok(v);
    return r;
}

DiagnosticsRecord diagnose(const State& s, const std::vector<double>& lambdas, const RearrangementProfile* rho_star) {
    const GridPtr& g = s.rho.grid;
    const int nx = g->nx(), nz = g->nz();
    DiagnosticsRecord r;
    r.time = s.time;
    RealField zr = s.rho;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) zr(i, j) *= g->z(j);
    r.potential_energy = integrate(zr);
    r.dissipation = dissipation(s.psi);
    const RealField& f = s.theta_pair.fluct;
    r.l2_theta_fluct = l2_norm(f);
    for (int q = 1; q <= 4; ++q) r.h_theta_fluct[q - 1] = sobolev_norm(f, q);
    r.l2_dx3_fluct = l2_norm(dx_n(f, 3));
    r.h4_dx_fluct = sobolev_norm(dx_n(f, 1), 4);
    VerticalProfile G(g, dz_profile(s.theta_pair.mean, 1));
    r.h2_G = h_norm_z(G, 2);
    r.mass = integrate(s.rho);
    r.l2_rho = l2_norm(s.rho);
    for (double lam : lambdas) r.level_measures.push_back(level_measure(s.rho, lam));
    RealField dzr = dz_n(s.rho, 1);
    r.min_dz_rho = *std::min_element(dzr.values.begin(), dzr.values.end());
    RealField th = s.theta();
    RealField dzt = dz_n(th, 1);
    for (int i = 0; i < nx; ++i)
        for (int j : {0, nz - 1}) {
            r.wall_theta = std::max(r.wall_theta, std::abs(th(i, j)));
            r.wall_dz_theta = std::max(r.wall_dz_theta, std::abs(dzt(i, j)));
        }
    if (rho_star) r.dist_rearranged = l2_norm(s.rho - broadcast(rho_star->on(g)));
    return r;
}

std::vector<std::string> diagnostics_header(const std::vector<double>& lambdas) {
    std::vector<std::string> h = {"time[-]", "potential_energy[-]", "dissipation[-]", "l2_theta_fluct[-]",
                                  "h1_theta_fluct[-]", "h2_theta_fluct[-]", "h3_theta_fluct[-]",
                                  "h4_theta_fluct[-]", "l2_dx3_fluct[-]", "h4_dx_fluct[-]", "h2_G[-]",
                                  "mass[-]", "l2_rho[-]"};
    for (double l : lambdas) h.push_back("level_measure_" + fmt_double(l) + "[area]");
    for (const char* n : {"min_dz_rho[-]", "wall_theta[-]", "wall_dz_theta[-]", "dist_rearranged[-]"}) h.push_back(n);
    return h;
}

std::vector<double> diagnostics_row(const DiagnosticsRecord& r) {
    std::vector<double> v = {r.time, r.potential_energy, r.dissipation, r.l2_theta_fluct};
    for (double x : r.h_theta_fluct) v.push_back(x);
    for (double x : {r.l2_dx3_fluct, r.h4_dx_fluct, r.h2_G, r.mass, r.l2_rho}) v.push_back(x);
    for (double x : r.level_measures) v.push_back(x);
    for (double x : {r.min_dz_rho, r.wall_theta, r.wall_dz_theta, r.dist_rearranged}) v.push_back(x);
    return v;
}

namespace {

std::vector<double> cadence(double every, double t_final) {
    std::vector<double> out;
    if (every <= 0) return out;
    for (long n = 1;; ++n) {
        double t = n * every;
        if (t > t_final * (1 + 1e-12)) break;
        out.push_back(std::min(t, t_final));
    }
    return out;
}

std::vector<double> merge_times(std::vector<double> t, double t_final) {
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    const double tol = 1e-9 * std::max(1.0, t_final);
    for (double v : t)
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    return out;
}

bool contains(const std::vector<double>& sorted, double t, double tol) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), t - tol);
    return it != sorted.end() && *it <= t + tol;
}

std::string join_row(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt_double(v[i]);
    }
    return s;
}

std::vector<double> snapshot_list(const StepperConfig& cfg) {
    std::vector<double> t = cadence(cfg.snapshot_every, cfg.t_final);
    t.insert(t.end(), cfg.snapshot_times.begin(), cfg.snapshot_times.end());
    return merge_times(t, cfg.t_final);
}

std::vector<double> diag_list(const StepperConfig& cfg) {
    std::vector<double> t = cadence(cfg.diag_every, cfg.t_final);
    t.insert(t.end(), cfg.diag_times.begin(), cfg.diag_times.end());
    t.push_back(0.0);
    t.push_back(cfg.t_final);
    return merge_times(t, cfg.t_final);
}

}  // namespace

std::vector<double> output_times(const StepperConfig& cfg) {
    std::vector<double> t = diag_list(cfg), s = snapshot_list(cfg);
    t.insert(t.end(), s.begin(), s.end());
    return merge_times(t, cfg.t_final);
}

RunResult run(const RunSpec& spec) {
    const StepperConfig& cfg = spec.stepper;
    cfg.validate();
    if (spec.exact_linear && cfg.mode != Mode::linear) throw ConfigError("exact-linear stepping requires linear mode");
    const GridPtr& g = spec.theta0.grid;
    State state = make_state(spec.background, spec.theta0, 0.0);

    RunResult res;
    if (spec.compare_rearrangement) res.rho_star = vertical_rearrangement(state.rho);
    const RearrangementProfile* rstar = res.rho_star ? &*res.rho_star : nullptr;

    std::unique_ptr<LinearPropagator> prop;
    if (spec.exact_linear) prop = std::make_unique<LinearPropagator>(g, spec.background.slope);

    const std::vector<double> diag = diag_list(cfg), snaps = snapshot_list(cfg), all = output_times(cfg);
    const double tol = 1e-9 * std::max(1.0, cfg.t_final);

    std::ofstream csv;
    fs::path out = spec.out_dir;
    if (!spec.out_dir.empty()) {
        fs::create_directories(out);
        if (!snaps.empty()) fs::create_directories(out / "snapshots");
        csv.open(out / "timeseries.csv", std::ios::binary);
        if (!csv) throw ConfigError("cannot write " + (out / "timeseries.csv").string());
        std::string head;
        for (const auto& h : diagnostics_header(spec.lambdas)) head += (head.empty() ? "" : ",") + h;
        csv << head << '\n';
        res.files.push_back("timeseries.csv");
    }

    int snap_index = 0;
    auto emit = [&](const State& s, double t) {
        if (contains(diag, t, tol)) {
            DiagnosticsRecord r = diagnose(s, spec.lambdas, rstar);
            if (!r.all_finite()) throw BlowUpError(t, "non-finite diagnostics at t = " + fmt_double(t));
            res.records.push_back(r);
            if (csv.is_open()) csv << join_row(diagnostics_row(r)) << '\n' << std::flush;
        }
        if (contains(snaps, t, tol)) {
            RealField th = s.theta();
            if (!spec.out_dir.empty()) {
                char name[64];
                std::snprintf(name, sizeof name, "snapshots/theta_%05d.bin", snap_index);
                write_snapshot((out / name).string(), th, t);
                res.files.push_back(name);
            }
            if (spec.keep_snapshots) res.snapshots.push_back({t, std::move(th)});
            ++snap_index;
        }
    };

    for (double t_out : all) {
        if (t_out > 0) {
            if (prop) {
                state = make_state(spec.background, prop->evolve(spec.theta0, t_out), t_out);
            } else {
                while (state.time < t_out - tol) {
                    double dt = cfg.auto_dt ? stable_dt(state, cfg) : cfg.dt;
                    double left = t_out - state.time;
                    // land on the output time without leaving a sliver step
                    if (dt >= left) dt = left;
                    else if (dt > 0.5 * left) dt = 0.5 * left;
                    state = step(state, cfg, dt);
                    ++res.steps;
                }
                state.time = t_out;
            }
        }
        emit(state, t_out);
    }
    return res;
}

}  // namespace stlab
