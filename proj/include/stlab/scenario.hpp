#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stlab/analysis.hpp"
#include "stlab/dynamics.hpp"

namespace stlab {

// Scenario files are plain text:
//
//   # comment
//   name = stab
//   [grid]
//   nx = 64
//   nz = 129
//
// A key under [section] is addressed as section.key; "grid.nz = 129" at top
// level is equivalent. Lists are comma separated. Every key, its type and
// default is listed in scenario_schema().

enum class KeyType { string, integer, real, boolean, real_list, choice };

struct KeySpec {
    std::string key;
    KeyType type;
    std::string default_value;  // "" means unset (optional) unless required
    bool required = false;
    std::vector<std::string> choices;
    std::string doc;
};

const std::vector<KeySpec>& scenario_schema();
// Markdown table of the schema (key, type, default, meaning).
std::string schema_markdown();

struct RawEntry {
    std::string value;
    int line = 0;  // 0 for defaults
};

struct Scenario {
    std::string name;
    std::string source;  // file name used in error messages
    std::string text;    // verbatim config, hashed into the manifest

    int nx = 64, nz = 129, fd_order = 4;
    double height = 1.0;

    Mode mode = Mode::nonlinear;
    std::string background = "affine";
    double background_a = 1.0, background_b = -1.0;
    std::vector<double> background_z, background_theta;

    std::string initial = "bump";
    double eps = 0.01;
    int m = 1, p = 3, n = 1, k = 1, kmax = 4, nmax = 4;
    std::optional<std::uint64_t> seed;
    bool clamped = false;

    StepperConfig stepper;
    bool exact_linear = false;

    std::string out_dir;
    std::vector<double> lambdas;

    std::string fit_quantity = "none";
    double fit_t_min = 10.0, fit_t_max = 0.0;  // 0: t_final
    bool rearrangement = false;
    std::string bl_extract = "none";
    bool bl_predict = false;
    bool eigen_check = false;
    bool wall_strip = false;

    // Acceptance thresholds; unset ones are not checked.
    std::optional<std::pair<double, double>> accept_fit_exponent;
    std::optional<double> accept_h4_growth;
    std::optional<double> accept_rearranged_ratio;
    std::optional<double> accept_energy_identity;
    bool accept_energy_monotone = false;
    std::optional<double> accept_constant_diagnostics;
    std::optional<std::pair<double, double>> accept_width_exponent;
    std::optional<std::pair<double, double>> accept_amplitude_exponent;
    std::optional<double> accept_residual_exponent_min;
    std::optional<double> accept_eigen_decay;
    std::vector<double> accept_l2_ratio_at;  // {t, lo, hi}
    bool accept_enforce = true;

    std::map<std::string, RawEntry> entries;  // resolved values, defaults included

    nlohmann::json echo() const;
};

// Throws ConfigError with "source:line: message" for schema violations.
Scenario parse_scenario(const std::string& text, const std::string& source = "<config>");
Scenario load_scenario(const std::string& path);

struct RunOptions {
    std::string out_dir;        // overrides output.dir when non-empty
    bool exact_linear = false;  // forces exact-linear stepping
    bool accept = false;
};

struct AcceptanceCheck {
    std::string name;
    double value = 0.0;
    std::string bound;
    bool pass = false;
    bool enforced = true;
};

struct ScenarioOutcome {
    RunResult run;
    nlohmann::json report;
    std::vector<AcceptanceCheck> checks;
    std::vector<std::string> warnings;
    std::string out_dir;
    bool accepted() const;  // every enforced check passed
};

// Runs the dynamics, the requested analyses and the acceptance checks and
// writes timeseries.csv, snapshots, report.json and manifest.json.
ScenarioOutcome run_scenario(const Scenario& sc, const RunOptions& opt = {});

}  // namespace stlab
