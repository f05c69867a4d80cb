// Acceptance suite: one PASS/FAIL line per criterion, plus a JSON report.
//
//   acceptance [--out DIR]
//
// Exit status is 1 when any enforced criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stlab/blprofiles.hpp"
#include "stlab/domain.hpp"
#include "stlab/errors.hpp"
#include "stlab/io.hpp"
#include "stlab/rearrange.hpp"
#include "stlab/scenario.hpp"
#include "stlab/spectrum.hpp"
#include "stlab/stokes.hpp"

using namespace stlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    bool enforced = true;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

const AcceptanceCheck* find_check(const ScenarioOutcome& o, const std::string& name) {
    for (const auto& c : o.checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool check_passed(const ScenarioOutcome& o, const std::string& name) {
    const AcceptanceCheck* c = find_check(o, name);
    return c && c->pass;
}

std::string check_str(const ScenarioOutcome& o, const std::string& name) {
    const AcceptanceCheck* c = find_check(o, name);
    if (!c) return name + " missing";
    return name + " " + num(c->value) + " (" + c->bound + ")";
}

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

ScenarioOutcome run_bundled(const std::string& name, const fs::path& out) {
    Scenario sc = load_scenario(std::string(STLAB_SCENARIO_DIR) + "/" + name + ".cfg");
    return run_scenario(sc, {(out / name).string(), false, true});
}

// C1: manufactured psi* = z^2 (1-z)^2 sin x, L2 error order across nz.
Outcome c1() {
    auto t0 = std::chrono::steady_clock::now();
    auto q = [](double z) { return z * z * (1 - z) * (1 - z); };
    auto f = [&](double z) { return 24 - 2 * (2 - 12 * z + 12 * z * z) + q(z); };
    std::vector<double> h, err;
    for (int nz : {65, 129, 257}) {
        auto g = make_grid(16, nz);
        auto theta = sample(g, [&](double x, double z) { return -std::cos(x) * f(z); });
        auto exact = sample(g, [&](double x, double z) { return q(z) * std::sin(x); });
        h.push_back(g->dz());
        err.push_back(l2_norm(solve_stream(theta) - exact));
    }
    double order = slope_loglog(h, err), secs = seconds_since(t0);
    bool ok = std::abs(order - 4.0) <= 0.3 && secs < 10.0;
    return {ok, "fitted order " + num(order) + " (4 +- 0.3), errors " + num(err[0], 2) + ", " + num(err[1], 2) + ", " +
                    num(err[2], 2) + "; " + num(secs, 3) + " s"};
}

// C2: strip spectrum against the dense discrete eigensolve, and the ratio band.
Outcome c2() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int k = 0; k <= 4; ++k) {
        auto es = clamped_spectrum(k, 4, StripMode::symmetric);
        auto dense = discrete_clamped_eigenvalues(k, 257, -1.0, 1.0, 4);
        for (int n = 0; n < 4; ++n) worst = std::max(worst, std::abs(es[n].lambda - dense[n]) / es[n].lambda);
    }
    double lo = INFINITY, hi = 0.0;
    for (int k = 0; k <= 20; ++k) {
        auto es = clamped_spectrum(k, 20, StripMode::symmetric);
        for (const auto& e : es) {
            double r = e.lambda / std::pow(double(e.n * e.n + k * k), 2);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    double decades = std::log10(hi / lo), secs = seconds_since(t0);
    bool ok = worst < 1e-5 && decades < 1.0 && secs < 60.0;
    return {ok, "dense match " + num(worst, 2) + " (< 1e-5); ratio in [" + num(lo) + ", " + num(hi) + "] = " +
                    num(decades, 3) + " decades (< 1); " + num(secs, 3) + " s"};
}

Outcome c3(const fs::path& out) {
    ScenarioOutcome o = run_bundled("linear-eigen", out);
    return {check_passed(o, "eigen_decay"), check_str(o, "eigen_decay")};
}

// C4-C6 share the stab run.
struct StabResults {
    ScenarioOutcome o;
    double secs = 0.0;
    double level_worst = 0.0, level_tol = 0.0;
    bool rho_star_monotone = true;
};

StabResults stab_run(const fs::path& out) {
    StabResults s;
    auto t0 = std::chrono::steady_clock::now();
    s.o = run_bundled("stab", out);
    s.secs = seconds_since(t0);
    // equimeasurability along the run: level-set areas keep their initial values
    Scenario sc = load_scenario(std::string(STLAB_SCENARIO_DIR) + "/stab.cfg");
    const auto& recs = s.o.run.records;
    auto g = make_grid(sc.nx, sc.nz);
    double len = 2.0 * M_PI;  // level sets of a small perturbation of 1 - z are nearly flat
    s.level_tol = 2.0 * g->dx() * g->dz() * len;
    for (const auto& r : recs)
        for (size_t l = 0; l < r.level_measures.size(); ++l)
            s.level_worst = std::max(s.level_worst, std::abs(r.level_measures[l] - recs.front().level_measures[l]));
    const auto& rs = s.o.run.rho_star;
    if (!rs) s.rho_star_monotone = false;
    else
        for (size_t j = 1; j < rs->values.size(); ++j) s.rho_star_monotone &= rs->values[j] <= rs->values[j - 1];
    return s;
}

Outcome c4(const StabResults& s) {
    bool ok = check_passed(s.o, "fit_exponent") && check_passed(s.o, "h4_growth") && s.secs < 1800.0;
    return {ok, check_str(s.o, "fit_exponent") + "; " + check_str(s.o, "h4_growth") + "; " + num(s.secs, 3) + " s"};
}

Outcome c5(const StabResults& s) {
    bool ok = check_passed(s.o, "rearranged_ratio") && check_passed(s.o, "rearranged_final_decade_monotone") &&
              s.level_worst < s.level_tol && s.rho_star_monotone;
    return {ok, check_str(s.o, "rearranged_ratio") + "; " + check_str(s.o, "rearranged_final_decade_monotone") +
                    "; level-set drift " + num(s.level_worst, 2) + " (< " + num(s.level_tol, 2) + ")" +
                    (s.rho_star_monotone ? "" : "; rearrangement not monotone")};
}

Outcome c6(const StabResults& s) {
    bool ok = check_passed(s.o, "energy_identity") && check_passed(s.o, "energy_monotone");
    return {ok, check_str(s.o, "energy_identity") + "; " + check_str(s.o, "energy_monotone")};
}

Outcome c7() {
    auto t0 = std::chrono::steady_clock::now();
    BLProfile c0 = build_chi_profile(0), c1 = build_chi_profile(1);
    double secs = seconds_since(t0);
    double r5 = std::abs(c0.d[5][0]) / c0.max_abs(), r0 = std::abs(c1.d[0][0]) / c1.max_abs();
    double res0 = c0.residual / c0.max_abs(), res1 = c1.residual / c1.max_abs();
    double p0 = c0.decay_exponent, p1 = c1.decay_exponent;
    bool ok = r5 < 1e-5 && r0 < 1e-5 && res0 < 1e-7 && res1 < 1e-7 && p0 >= 0.7 && p0 <= 0.9 && p1 >= 0.7 &&
              p1 <= 0.9 && secs < 10.0;
    return {ok, "chi0^(5)(0) " + num(r5, 2) + ", chi1(0) " + num(r0, 2) + " (< 1e-5); residuals " + num(res0, 2) +
                    ", " + num(res1, 2) + " (< 1e-7); decay p " + num(p0, 3) + ", " + num(p1, 3) + " in [0.7, 0.9]; " +
                    num(secs, 3) + " s"};
}

Outcome c8(const fs::path& out) {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioOutcome o = run_bundled("linear-trace", out);
    double secs = seconds_since(t0);
    bool ok = check_passed(o, "bl_width_exponent") && check_passed(o, "bl_amplitude_exponent") &&
              check_passed(o, "bl_residual_exponent") && secs < 1200.0;
    return {ok, check_str(o, "bl_width_exponent") + "; " + check_str(o, "bl_amplitude_exponent") + "; " +
                    check_str(o, "bl_residual_exponent") + "; " + num(secs, 3) + " s"};
}

// Exploratory: measured and reported, never a hard failure.
Outcome c9(const fs::path& out) {
    ScenarioOutcome o = run_bundled("nonlinear-bl", out);
    const AcceptanceCheck* c = find_check(o, "fit_exponent");
    bool reported = c && std::isfinite(c->value);
    std::string where = reported ? (c->pass ? "inside" : "outside") : "missing";
    return {reported, "report only: exponent " + (c ? num(c->value) : std::string("n/a")) + " " + where +
                          " [0.9, 1.4], target 1.125", false};
}

// C10: every property suite under its fixed seeds.
Outcome c10() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> failed;
    for (const std::string bin : {STLAB_PROPERTY_BINARIES}) {
        std::string cmd = bin + " --gtest_filter='*Property*' --gtest_brief=1 >/dev/null 2>&1";
        int raw = std::system(cmd.c_str());
        if (!(WIFEXITED(raw) && WEXITSTATUS(raw) == 0)) failed.push_back(fs::path(bin).filename().string());
    }
    double secs = seconds_since(t0);
    std::string list;
    for (const auto& f : failed) list += (list.empty() ? "" : ", ") + f;
    return {failed.empty() && secs < 600.0,
            (failed.empty() ? std::string("all property suites pass") : "failing suites: " + list) + "; " +
                num(secs, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    std::string out = (fs::temp_directory_path() / "stlab_acceptance").string();
    app.add_option("--out", out, "directory for run outputs and acceptance.json");
    CLI11_PARSE(app, argc, argv);
    fs::create_directories(out);

    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
    StabResults stab;
    bool stab_done = false;
    auto with_stab = [&](Outcome (*f)(const StabResults&)) {
        return [&, f]() {
            if (!stab_done) {
                stab = stab_run(out);
                stab_done = true;
            }
            return f(stab);
        };
    };
    criteria.push_back({"C1 bilaplacian convergence order", c1});
    criteria.push_back({"C2 clamped spectrum", c2});
    criteria.push_back({"C3 linear eigen-decay", [&] { return c3(out); }});
    criteria.push_back({"C4 nonlinear stability rate", with_stab(c4)});
    criteria.push_back({"C5 rearrangement limit", with_stab(c5)});
    criteria.push_back({"C6 energy identity", with_stab(c6)});
    criteria.push_back({"C7 chi profiles", c7});
    criteria.push_back({"C8 linear boundary layer", [&] { return c8(out); }});
    criteria.push_back({"C9 nonlinear boundary-layer scaling", [&] { return c9(out); }});
    criteria.push_back({"C10 property suites", c10});

    nlohmann::json report = nlohmann::json::array();
    bool all = true;
    for (auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        report.push_back({{"criterion", name}, {"pass", o.pass}, {"enforced", o.enforced}, {"detail", o.detail}});
        if (o.enforced && !o.pass) all = false;
    }
    write_file((fs::path(out) / "acceptance.json").string(), report.dump(2) + "\n");
    return all ? 0 : 1;
}
