#include "stlab/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "stlab/background.hpp"
#include "stlab/blprofiles.hpp"
#include "stlab/errors.hpp"
#include "stlab/exact_linear.hpp"
#include "stlab/initial_data.hpp"
#include "stlab/io.hpp"
#include "stlab/rearrange.hpp"

namespace stlab {

namespace fs = std::filesystem;

const std::vector<KeySpec>& scenario_schema() {
    using K = KeyType;
    static const std::vector<KeySpec> schema = {
        {"name", K::string, "", true, {}, "scenario name; default output directory is runs/<name>"},
        {"grid.nx", K::integer, "64", false, {}, "x nodes, even, >= 8"},
        {"grid.nz", K::integer, "129", false, {}, "z nodes including both walls, >= 9"},
        {"grid.height", K::real, "1", false, {}, "channel height"},
        {"grid.fd_order", K::integer, "4", false, {}, "z finite-difference order: 2, 4 or 6"},
        {"physics.mode", K::choice, "nonlinear", false, {"nonlinear", "linear"}, "transport equation"},
        {"physics.background", K::choice, "affine", false, {"affine", "tabulated"}, "background profile"},
        {"physics.background_a", K::real, "1", false, {}, "affine background a + b z: a"},
        {"physics.background_b", K::real, "-1", false, {}, "affine background a + b z: b"},
        {"physics.background_z", K::real_list, "", false, {}, "tabulated background: z nodes"},
        {"physics.background_theta", K::real_list, "", false, {}, "tabulated background: values"},
        {"initial.type", K::choice, "bump", false, {"bump", "eigenfunction", "wall_trace", "random", "zero"},
         "initial perturbation"},
        {"initial.eps", K::real, "0.01", false, {}, "amplitude"},
        {"initial.m", K::integer, "1", false, {}, "x wavenumber (bump, wall_trace)"},
        {"initial.p", K::integer, "3", false, {}, "bump exponent in s^p (1-s)^p"},
        {"initial.n", K::integer, "1", false, {}, "eigenfunction index, from 1"},
        {"initial.k", K::integer, "1", false, {}, "eigenfunction wavenumber"},
        {"initial.kmax", K::integer, "4", false, {}, "random data: largest x wavenumber"},
        {"initial.nmax", K::integer, "4", false, {}, "random data: largest z mode"},
        {"initial.seed", K::integer, "", false, {}, "random data seed (mandatory for random)"},
        {"initial.clamped", K::boolean, "false", false, {}, "random data vanishing with its normal derivative at the walls"},
        {"stepper.t_final", K::real, "", true, {}, "final time"},
        {"stepper.dt", K::real, "0", false, {}, "fixed step; 0 selects the automatic step"},
        {"stepper.cfl", K::real, "0.5", false, {}, "CFL number of the automatic step"},
        {"stepper.dt_max", K::real, "2", false, {}, "cap of the automatic step"},
        {"stepper.dt_min", K::real, "1e-6", false, {}, "floor of the automatic step"},
        {"stepper.dealias", K::boolean, "true", false, {}, "2/3 rule on the transport term"},
        {"stepper.advection", K::choice, "advective", false, {"advective", "flux", "skew"}, "transport discretization"},
        {"stepper.filter", K::real, "0", false, {}, "coefficient of the dz^6 d_z^6 filter"},
        {"stepper.exact_linear", K::boolean, "false", false, {}, "per-mode matrix exponentials (linear mode)"},
        {"output.dir", K::string, "", false, {}, "output directory"},
        {"output.diag_every", K::real, "0", false, {}, "diagnostics cadence; 0: only t = 0 and t_final"},
        {"output.diag_times", K::real_list, "", false, {}, "extra diagnostics times"},
        {"output.snapshot_every", K::real, "0", false, {}, "snapshot cadence; 0 disables"},
        {"output.snapshot_times", K::real_list, "", false, {}, "extra snapshot times"},
        {"output.lambdas", K::real_list, "0.25, 0.5, 0.75", false, {}, "levels for the level-set measures"},
        {"analysis.fit", K::choice, "none", false,
         {"none", "l2_theta_fluct", "dist_rearranged", "h4_theta_fluct", "dissipation"},
         "diagnostic fitted to a (1+t)^-p law"},
        {"analysis.fit_t_min", K::real, "10", false, {}, "fit window start"},
        {"analysis.fit_t_max", K::real, "0", false, {}, "fit window end; 0: t_final"},
        {"analysis.rearrangement", K::boolean, "false", false, {}, "track the distance to the rearranged initial state"},
        {"analysis.bl_extract", K::choice, "none", false, {"none", "bottom", "top"},
         "boundary-layer width and amplitude from the snapshots"},
        {"analysis.bl_predict", K::boolean, "false", false, {}, "compare snapshots with the linear layer prediction"},
        {"analysis.eigen_check", K::boolean, "false", false, {}, "eigenfunction decay over 5 e-folds (linear mode)"},
        {"analysis.wall_strip", K::boolean, "false", false, {}, "wall-strip norms of the bilaplacian of theta'"},
        {"accept.fit_exponent", K::real_list, "", false, {}, "lo, hi for the fitted exponent"},
        {"accept.h4_growth", K::real, "", false, {}, "bound on max H^4 norm of theta' over its initial value"},
        {"accept.rearranged_ratio", K::real, "", false, {},
         "bound on final over initial distance to the rearrangement; also non-increasing over the final decade"},
        {"accept.energy_identity", K::real, "", false, {}, "relative bound on |dE/dt + |grad u|^2|"},
        {"accept.energy_monotone", K::boolean, "false", false, {}, "E non-increasing between records"},
        {"accept.constant_diagnostics", K::real, "", false, {}, "bound on the change of every diagnostic"},
        {"accept.width_exponent", K::real_list, "", false, {}, "lo, hi for the layer width exponent"},
        {"accept.amplitude_exponent", K::real_list, "", false, {}, "lo, hi for the layer amplitude exponent"},
        {"accept.residual_exponent_min", K::real, "", false, {}, "lower bound on the prediction residual exponent"},
        {"accept.eigen_decay", K::real, "", false, {}, "relative bound on the eigenfunction amplitude error"},
        {"accept.l2_ratio_at", K::real_list, "", false, {}, "t, lo, hi: lo < |theta'(t)| / |theta'(0)| < hi"},
        {"accept.enforce", K::boolean, "true", false, {}, "false: checks are reported but never fail the run"},
    };
    return schema;
}

std::string schema_markdown() {
    static const char* names[] = {"string", "integer", "real", "boolean", "list of reals", "choice"};
    std::string out = "| key | type | default | meaning |\n|---|---|---|---|\n";
    for (const KeySpec& k : scenario_schema()) {
        std::string type = names[static_cast<int>(k.type)];
        if (k.type == KeyType::choice) {
            type.clear();
            for (const auto& c : k.choices) type += (type.empty() ? "" : " \\| ") + c;
        }
        std::string def = k.required ? "required" : (k.default_value.empty() ? "unset" : "`" + k.default_value + "`");
        out += "| `" + k.key + "` | " + type + " | " + def + " | " + k.doc + " |\n";
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

const KeySpec* find_key(const std::string& key) {
    for (const KeySpec& k : scenario_schema())
        if (k.key == key) return &k;
    return nullptr;
}

class Reader {
public:
    Reader(std::string source, const std::map<std::string, RawEntry>& e) : source_(std::move(source)), e_(e) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        auto it = e_.find(key);
        int line = it == e_.end() ? 0 : it->second.line;
        std::string where = line > 0 ? source_ + ":" + std::to_string(line) : source_;
        throw ConfigError(where + ": " + key + ": " + msg);
    }

    bool has(const std::string& key) const { return !raw(key).empty(); }
    const std::string& raw(const std::string& key) const { return e_.at(key).value; }
    int line(const std::string& key) const { return e_.at(key).line; }

    std::string str(const std::string& key) const { return raw(key); }

    long long integer(const std::string& key) const {
        const std::string& v = raw(key);
        long long out = 0;
        auto r = std::from_chars(v.data(), v.data() + v.size(), out);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(key, "expected an integer, got '" + v + "'");
        return out;
    }

    double real(const std::string& key) const { return parse_real(key, raw(key)); }

    bool boolean(const std::string& key) const {
        std::string v = raw(key);
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        fail(key, "expected true or false, got '" + raw(key) + "'");
    }

    std::vector<double> list(const std::string& key, size_t exact = 0) const {
        std::vector<double> out;
        std::stringstream ss(raw(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
        if (exact && out.size() != exact)
            fail(key, "expected " + std::to_string(exact) + " values, got " + std::to_string(out.size()));
        return out;
    }

    std::optional<double> opt_real(const std::string& key) const {
        return has(key) ? std::optional<double>(real(key)) : std::nullopt;
    }
    std::optional<std::pair<double, double>> opt_range(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        auto v = list(key, 2);
        if (!(v[0] <= v[1])) fail(key, "range must satisfy lo <= hi");
        return std::make_pair(v[0], v[1]);
    }

private:
    double parse_real(const std::string& key, const std::string& v) const {
        double out = 0.0;
        auto r = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
            fail(key, "expected a finite number, got '" + v + "'");
        return out;
    }

    std::string source_;
    const std::map<std::string, RawEntry>& e_;
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
    std::map<std::string, RawEntry> entries;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line.substr(0, line.find('#')));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail("unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (key.empty()) fail("missing key");
        if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const KeySpec* spec = find_key(key);
        if (!spec) fail("unknown key '" + key + "'");
        if (entries.count(key))
            fail("duplicate key '" + key + "' (first set on line " + std::to_string(entries[key].line) + ")");
        if (spec->type == KeyType::choice &&
            std::find(spec->choices.begin(), spec->choices.end(), value) == spec->choices.end()) {
            std::string opts;
            for (const auto& c : spec->choices) opts += (opts.empty() ? "" : ", ") + c;
            fail(key + ": '" + value + "' is not one of " + opts);
        }
        entries[key] = {value, lineno};
    }
    for (const KeySpec& k : scenario_schema()) {
        if (entries.count(k.key)) continue;
        if (k.required) throw ConfigError(source + ": missing required key '" + k.key + "'");
        entries[k.key] = {k.default_value, 0};
    }

    Reader r(source, entries);
    Scenario sc;
    sc.source = source;
    sc.text = text;
    sc.entries = entries;
    sc.name = r.str("name");
    if (sc.name.empty()) r.fail("name", "must not be empty");

    long long nx = r.integer("grid.nx"), nz = r.integer("grid.nz"), fd = r.integer("grid.fd_order");
    if (nx < 8 || nx % 2 != 0) r.fail("grid.nx", "constraint nx >= 8 and even violated (got " + std::to_string(nx) + ")");
    if (nz < 9) r.fail("grid.nz", "constraint nz >= 9 violated (got " + std::to_string(nz) + ")");
    if (fd != 2 && fd != 4 && fd != 6) r.fail("grid.fd_order", "must be 2, 4 or 6");
    sc.nx = static_cast<int>(nx);
    sc.nz = static_cast<int>(nz);
    sc.fd_order = static_cast<int>(fd);
    sc.height = r.real("grid.height");
    if (!(sc.height > 0.0)) r.fail("grid.height", "must be positive");

    sc.mode = r.str("physics.mode") == "linear" ? Mode::linear : Mode::nonlinear;
    sc.background = r.str("physics.background");
    sc.background_a = r.real("physics.background_a");
    sc.background_b = r.real("physics.background_b");
    if (sc.background == "tabulated") {
        if (!r.has("physics.background_z") || !r.has("physics.background_theta"))
            r.fail("physics.background", "tabulated needs background_z and background_theta");
        sc.background_z = r.list("physics.background_z");
        sc.background_theta = r.list("physics.background_theta");
        if (sc.background_z.size() != sc.background_theta.size())
            r.fail("physics.background_theta", "length differs from background_z");
    }

    sc.initial = r.str("initial.type");
    sc.eps = r.real("initial.eps");
    sc.m = static_cast<int>(r.integer("initial.m"));
    sc.p = static_cast<int>(r.integer("initial.p"));
    sc.n = static_cast<int>(r.integer("initial.n"));
    sc.k = static_cast<int>(r.integer("initial.k"));
    sc.kmax = static_cast<int>(r.integer("initial.kmax"));
    sc.nmax = static_cast<int>(r.integer("initial.nmax"));
    sc.clamped = r.boolean("initial.clamped");
    if (r.has("initial.seed")) {
        long long seed = r.integer("initial.seed");
        if (seed < 0) r.fail("initial.seed", "must be nonnegative");
        sc.seed = static_cast<std::uint64_t>(seed);
    }
    if (sc.initial == "random" && !sc.seed) r.fail("initial.type", "random data requires initial.seed");
    if (sc.initial == "eigenfunction" && sc.n < 1) r.fail("initial.n", "must be >= 1");
    if (sc.initial == "bump" && sc.p < 2) r.fail("initial.p", "must be >= 2");

    StepperConfig& st = sc.stepper;
    st.t_final = r.real("stepper.t_final");
    if (!(st.t_final > 0.0)) r.fail("stepper.t_final", "must be positive");
    st.dt = r.real("stepper.dt");
    st.auto_dt = st.dt == 0.0;
    if (st.dt < 0.0) r.fail("stepper.dt", "must be nonnegative");
    st.cfl = r.real("stepper.cfl");
    if (!(st.cfl > 0.0 && st.cfl <= 1.0)) r.fail("stepper.cfl", "must lie in (0, 1]");
    st.dt_max = r.real("stepper.dt_max");
    st.dt_min = r.real("stepper.dt_min");
    if (!(st.dt_min > 0.0 && st.dt_max >= st.dt_min)) r.fail("stepper.dt_min", "need 0 < dt_min <= dt_max");
    st.dealias = r.boolean("stepper.dealias");
    std::string adv = r.str("stepper.advection");
    st.advection = adv == "flux" ? Advection::flux : adv == "skew" ? Advection::skew : Advection::advective;
    st.filter = r.real("stepper.filter");
    if (st.filter < 0.0) r.fail("stepper.filter", "must be nonnegative");
    st.mode = sc.mode;
    sc.exact_linear = r.boolean("stepper.exact_linear");
    if (sc.exact_linear && sc.mode != Mode::linear) r.fail("stepper.exact_linear", "requires physics.mode = linear");

    sc.out_dir = r.has("output.dir") ? r.str("output.dir") : "runs/" + sc.name;
    st.diag_every = r.real("output.diag_every");
    st.snapshot_every = r.real("output.snapshot_every");
    if (st.diag_every < 0.0) r.fail("output.diag_every", "must be nonnegative");
    if (st.snapshot_every < 0.0) r.fail("output.snapshot_every", "must be nonnegative");
    if (r.has("output.diag_times")) st.diag_times = r.list("output.diag_times");
    if (r.has("output.snapshot_times")) st.snapshot_times = r.list("output.snapshot_times");
    for (const char* key : {"output.diag_times", "output.snapshot_times"})
        if (r.has(key))
            for (double t : r.list(key))
                if (t < 0.0 || t > st.t_final) r.fail(key, "times must lie in [0, t_final]");
    if (r.has("output.lambdas")) sc.lambdas = r.list("output.lambdas");

    sc.fit_quantity = r.str("analysis.fit");
    sc.fit_t_min = r.real("analysis.fit_t_min");
    sc.fit_t_max = r.real("analysis.fit_t_max");
    if (sc.fit_quantity != "none") {
        double hi = sc.fit_t_max > 0.0 ? sc.fit_t_max : st.t_final;
        if (!(sc.fit_t_min >= 1.0 && hi > sc.fit_t_min && hi <= st.t_final))
            r.fail("analysis.fit_t_min", "fit window must satisfy 1 <= t_min < t_max <= t_final");
    }
    sc.rearrangement = r.boolean("analysis.rearrangement");
    sc.bl_extract = r.str("analysis.bl_extract");
    sc.bl_predict = r.boolean("analysis.bl_predict");
    sc.eigen_check = r.boolean("analysis.eigen_check");
    sc.wall_strip = r.boolean("analysis.wall_strip");
    if ((sc.bl_extract != "none" || sc.bl_predict || sc.wall_strip) && st.snapshot_every == 0.0 &&
        st.snapshot_times.empty())
        r.fail("output.snapshot_times", "the requested layer analyses need snapshots");
    if (sc.eigen_check && (sc.mode != Mode::linear || sc.initial != "eigenfunction"))
        r.fail("analysis.eigen_check", "requires linear mode and eigenfunction initial data");
    if (sc.bl_predict && sc.mode != Mode::linear) r.fail("analysis.bl_predict", "requires linear mode");

    sc.accept_fit_exponent = r.opt_range("accept.fit_exponent");
    sc.accept_h4_growth = r.opt_real("accept.h4_growth");
    sc.accept_rearranged_ratio = r.opt_real("accept.rearranged_ratio");
    sc.accept_energy_identity = r.opt_real("accept.energy_identity");
    sc.accept_energy_monotone = r.boolean("accept.energy_monotone");
    sc.accept_constant_diagnostics = r.opt_real("accept.constant_diagnostics");
    sc.accept_width_exponent = r.opt_range("accept.width_exponent");
    sc.accept_amplitude_exponent = r.opt_range("accept.amplitude_exponent");
    sc.accept_residual_exponent_min = r.opt_real("accept.residual_exponent_min");
    sc.accept_eigen_decay = r.opt_real("accept.eigen_decay");
    if (r.has("accept.l2_ratio_at")) sc.accept_l2_ratio_at = r.list("accept.l2_ratio_at", 3);
    sc.accept_enforce = r.boolean("accept.enforce");
    if (sc.accept_fit_exponent && sc.fit_quantity == "none") r.fail("accept.fit_exponent", "needs analysis.fit");
    if ((sc.accept_width_exponent || sc.accept_amplitude_exponent) && sc.bl_extract == "none")
        r.fail(sc.accept_width_exponent ? "accept.width_exponent" : "accept.amplitude_exponent",
               "needs analysis.bl_extract");
    if (sc.accept_residual_exponent_min && !sc.bl_predict)
        r.fail("accept.residual_exponent_min", "needs analysis.bl_predict");
    if (sc.accept_eigen_decay && !sc.eigen_check) r.fail("accept.eigen_decay", "needs analysis.eigen_check");

    try {
        st.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read scenario file " + path);
    return parse_scenario(read_file(path), path);
}

nlohmann::json Scenario::echo() const {
    nlohmann::json out = nlohmann::json::object();
    for (const KeySpec& k : scenario_schema()) {
        auto it = entries.find(k.key);
        if (it == entries.end() || it->second.value.empty()) continue;
        const std::string& v = it->second.value;
        switch (k.type) {
            case KeyType::integer: out[k.key] = std::stoll(v); break;
            case KeyType::real: out[k.key] = std::stod(v); break;
            case KeyType::boolean: {
                std::string l = v;
                std::transform(l.begin(), l.end(), l.begin(), ::tolower);
                out[k.key] = l == "true" || l == "yes" || l == "1" || l == "on";
                break;
            }
            case KeyType::real_list: {
                nlohmann::json a = nlohmann::json::array();
                std::stringstream ss(v);
                std::string item;
                while (std::getline(ss, item, ',')) a.push_back(std::stod(trim(item)));
                out[k.key] = a;
                break;
            }
            default: out[k.key] = v;
        }
    }
    return out;
}

bool ScenarioOutcome::accepted() const {
    return std::all_of(checks.begin(), checks.end(), [](const AcceptanceCheck& c) { return c.pass || !c.enforced; });
}

namespace {

Background make_background(const Scenario& sc, const GridPtr& g) {
    if (sc.background == "tabulated") return Background::tabulated(g, sc.background_z, sc.background_theta);
    return Background::affine(g, sc.background_a, sc.background_b);
}

RealField make_initial(const Scenario& sc, const GridPtr& g) {
    if (sc.initial == "bump") return bump_data(g, sc.eps, sc.m, sc.p);
    if (sc.initial == "eigenfunction") return eigenfunction_data(g, sc.eps, sc.n, sc.k);
    if (sc.initial == "wall_trace") return wall_trace_data(g, sc.eps, sc.m);
    if (sc.initial == "random") return random_data(g, sc.eps, sc.kmax, sc.nmax, *sc.seed, sc.clamped);
    return RealField(g);
}

double quantity(const DiagnosticsRecord& r, const std::string& q) {
    if (q == "l2_theta_fluct") return r.l2_theta_fluct;
    if (q == "dist_rearranged") return r.dist_rearranged;
    if (q == "h4_theta_fluct") return r.h_theta_fluct[3];
    return r.dissipation;
}

std::string range_str(std::pair<double, double> r) { return "[" + fmt_double(r.first) + ", " + fmt_double(r.second) + "]"; }

AcceptanceCheck in_range(const std::string& name, double v, std::pair<double, double> r) {
    return {name, v, range_str(r), std::isfinite(v) && v >= r.first && v <= r.second, true};
}

// Bilaplacian of theta' on the grid.
RealField bilaplacian(const RealField& f) {
    RealField xx = dx_n(f, 2);
    return dx_n(xx, 2) + 2.0 * dz_n(xx, 2) + dz_n(f, 4);
}

}  // namespace

ScenarioOutcome run_scenario(const Scenario& sc, const RunOptions& opt) {
    GridPtr g = make_grid(sc.nx, sc.nz, sc.height, sc.fd_order);
    Background bg = make_background(sc, g);
    RealField th0 = make_initial(sc, g);

    ScenarioOutcome out;
    if (!bg.strictly_decreasing())
        out.warnings.push_back("background is not strictly decreasing (max slope " + fmt_double(bg.max_slope()) +
                               "); the stratification is not expected to be stable");

    RunSpec spec;
    spec.background = bg;
    spec.theta0 = th0;
    spec.stepper = sc.stepper;
    spec.lambdas = sc.lambdas;
    spec.exact_linear = sc.exact_linear || opt.exact_linear;
    if (spec.exact_linear && sc.mode != Mode::linear)
        throw ConfigError(sc.source + ": exact-linear stepping requires physics.mode = linear");
    spec.out_dir = opt.out_dir.empty() ? sc.out_dir : opt.out_dir;
    spec.compare_rearrangement =
        sc.rearrangement || sc.fit_quantity == "dist_rearranged" || sc.accept_rearranged_ratio.has_value();
    spec.keep_snapshots = sc.bl_extract != "none" || sc.bl_predict || sc.wall_strip;
    out.out_dir = spec.out_dir;

    out.run = run(spec);
    const RunResult& res = out.run;
    const auto& recs = res.records;
    const fs::path dir = spec.out_dir;
    std::vector<std::string> files = res.files;

    nlohmann::json& rep = out.report;
    rep["name"] = sc.name;
    rep["steps"] = res.steps;
    rep["records"] = recs.size();
    rep["t_final"] = sc.stepper.t_final;
    rep["exact_linear"] = spec.exact_linear;
    rep["grid"] = {{"nx", sc.nx}, {"nz", sc.nz}, {"height", sc.height}, {"fd_order", sc.fd_order}};

    // energy: monotonicity and the dissipation identity by centered differences
    double e_increase = -INFINITY, e_identity = 0.0;
    for (size_t i = 0; i + 1 < recs.size(); ++i)
        e_increase = std::max(e_increase, recs[i + 1].potential_energy - recs[i].potential_energy);
    for (size_t i = 1; i + 1 < recs.size(); ++i) {
        double de = (recs[i + 1].potential_energy - recs[i - 1].potential_energy) / (recs[i + 1].time - recs[i - 1].time);
        double d = recs[i].dissipation;
        e_identity = std::max(e_identity, std::abs(de + d) / std::max(d, 1e-12));
    }
    const double e_scale = recs.empty() ? 1.0 : std::max(1.0, std::abs(recs.front().potential_energy));
    rep["energy"] = {{"max_increase", recs.size() > 1 ? nlohmann::json(e_increase) : nlohmann::json(nullptr)},
                     {"identity_worst_relative", e_identity}};

    if (sc.fit_quantity != "none") {
        std::vector<double> t, v;
        for (const auto& r : recs) {
            t.push_back(r.time);
            v.push_back(quantity(r, sc.fit_quantity));
        }
        double hi = sc.fit_t_max > 0.0 ? sc.fit_t_max : sc.stepper.t_final;
        PowerLawFit fit = fit_power_law(t, v, sc.fit_t_min, hi);
        rep["decay_fit"] = to_json(fit);
        rep["decay_fit"]["quantity"] = sc.fit_quantity;
        if (sc.accept_fit_exponent) out.checks.push_back(in_range("fit_exponent", fit.exponent, *sc.accept_fit_exponent));
    }

    if (!recs.empty()) {
        double h0 = recs.front().h_theta_fluct[3], hmax = 0.0;
        for (const auto& r : recs) hmax = std::max(hmax, r.h_theta_fluct[3]);
        double growth = h0 > 0.0 ? hmax / h0 : NAN;
        rep["h4_growth"] = std::isfinite(growth) ? nlohmann::json(growth) : nlohmann::json(nullptr);
        if (sc.accept_h4_growth)
            out.checks.push_back({"h4_growth", growth, "< " + fmt_double(*sc.accept_h4_growth),
                                  std::isfinite(growth) && growth < *sc.accept_h4_growth, true});
    }

    if (res.rho_star) {
        write_profile_csv((dir / "rho_star.csv").string(), *res.rho_star);
        files.push_back("rho_star.csv");
        double d0 = recs.front().dist_rearranged, d1 = recs.back().dist_rearranged;
        double worst_rise = -INFINITY;
        const double t_dec = sc.stepper.t_final / 10.0;
        for (size_t i = 0; i + 1 < recs.size(); ++i)
            if (recs[i].time >= t_dec - 1e-12)
                worst_rise = std::max(worst_rise, (recs[i + 1].dist_rearranged - recs[i].dist_rearranged) / d0);
        rep["rearrangement"] = {{"initial_distance", d0},
                                {"final_distance", d1},
                                {"ratio", d1 / d0},
                                {"final_decade_max_relative_rise", std::isfinite(worst_rise) ? nlohmann::json(worst_rise)
                                                                                             : nlohmann::json(nullptr)}};
        if (sc.accept_rearranged_ratio) {
            out.checks.push_back({"rearranged_ratio", d1 / d0, "< " + fmt_double(*sc.accept_rearranged_ratio),
                                  d1 / d0 < *sc.accept_rearranged_ratio, true});
            out.checks.push_back({"rearranged_final_decade_monotone", worst_rise, "<= 0", worst_rise <= 0.0, true});
        }
    }

    if (sc.accept_energy_identity)
        out.checks.push_back({"energy_identity", e_identity, "< " + fmt_double(*sc.accept_energy_identity),
                              recs.size() > 2 && e_identity < *sc.accept_energy_identity, true});
    if (sc.accept_energy_monotone)
        out.checks.push_back({"energy_monotone", e_increase / e_scale, "<= 1e-12",
                              recs.size() > 1 && e_increase <= 1e-12 * e_scale, true});

    if (sc.accept_constant_diagnostics && !recs.empty()) {
        std::vector<double> r0 = diagnostics_row(recs.front());
        double worst = 0.0;
        for (const auto& r : recs) {
            std::vector<double> ri = diagnostics_row(r);
            for (size_t c = 1; c < ri.size(); ++c) worst = std::max(worst, std::abs(ri[c] - r0[c]));
        }
        rep["max_diagnostic_change"] = worst;
        out.checks.push_back({"constant_diagnostics", worst, "< " + fmt_double(*sc.accept_constant_diagnostics),
                              worst < *sc.accept_constant_diagnostics, true});
    }

    if (sc.accept_l2_ratio_at.size() == 3) {
        const double t = sc.accept_l2_ratio_at[0];
        double ratio = NAN;
        for (const auto& r : recs)
            if (std::abs(r.time - t) <= 1e-9 * std::max(1.0, t)) ratio = r.l2_theta_fluct / recs.front().l2_theta_fluct;
        std::pair<double, double> rg{sc.accept_l2_ratio_at[1], sc.accept_l2_ratio_at[2]};
        rep["l2_ratio_at"] = {{"time", t}, {"ratio", std::isfinite(ratio) ? nlohmann::json(ratio) : nlohmann::json(nullptr)}};
        AcceptanceCheck c = in_range("l2_ratio_at_t", ratio, rg);
        c.bound = "(" + fmt_double(rg.first) + ", " + fmt_double(rg.second) + ")";
        c.pass = std::isfinite(ratio) && ratio > rg.first && ratio < rg.second;
        out.checks.push_back(c);
    }

    if (sc.bl_extract != "none") {
        BLMeasurement m = extract_bl(res.snapshots, sc.bl_extract == "top" ? BLSide::top : BLSide::bottom);
        rep["boundary_layer"] = to_json(m);
        if (sc.accept_width_exponent)
            out.checks.push_back(in_range("bl_width_exponent", m.width_exponent, *sc.accept_width_exponent));
        if (sc.accept_amplitude_exponent)
            out.checks.push_back(in_range("bl_amplitude_exponent", m.amplitude_exponent, *sc.accept_amplitude_exponent));
    }

    if (sc.bl_predict) {
        VerticalProfile mean = split_mean_fluct(th0).mean;
        nlohmann::json list = nlohmann::json::array();
        std::vector<double> ts, r0s, r1s;
        double worst_order = 0.0;
        for (const TimedField& s : res.snapshots) {
            if (s.time < 1.0) continue;
            ValidationReport r0 =
                validate_prediction(s.theta, s.time, assemble_bl_linear(th0, s.time, BLSide::both, BLOrder::leading), mean);
            ValidationReport r1 = validate_prediction(
                s.theta, s.time, assemble_bl_linear(th0, s.time, BLSide::both, BLOrder::leading_plus_one), mean);
            list.push_back({{"time", s.time}, {"leading", to_json(r0)}, {"leading_plus_one", to_json(r1)}});
            ts.push_back(s.time);
            r0s.push_back(r0.l2_residual);
            r1s.push_back(r1.l2_residual);
            if (r0.l2_residual > 0.0) worst_order = std::max(worst_order, r1.l2_residual / r0.l2_residual);
        }
        double e0 = log_log_exponent(ts, r0s), e1 = log_log_exponent(ts, r1s);
        rep["bl_validation"] = {{"snapshots", list},
                                {"residual_exponent_leading", std::isfinite(e0) ? nlohmann::json(e0) : nlohmann::json(nullptr)},
                                {"residual_exponent_leading_plus_one",
                                 std::isfinite(e1) ? nlohmann::json(e1) : nlohmann::json(nullptr)},
                                {"max_residual_ratio_next_over_leading", worst_order}};
        if (sc.accept_residual_exponent_min) {
            out.checks.push_back({"bl_residual_exponent", e0, ">= " + fmt_double(*sc.accept_residual_exponent_min),
                                  std::isfinite(e0) && e0 >= *sc.accept_residual_exponent_min, true});
            // equal residuals when the corrector vanishes, up to round-off
            out.checks.push_back(
                {"bl_next_order_not_worse", worst_order, "<= 1 + 1e-9", worst_order <= 1.0 + 1e-9, true});
        }
    }

    if (sc.eigen_check) {
        LinearPropagator prop(g, bg.slope);
        std::vector<double> rates;
        for (auto mu : prop.mode_eigenvalues(sc.k)) rates.push_back(-mu.real());
        std::sort(rates.rbegin(), rates.rend());
        if (sc.n > static_cast<int>(rates.size())) throw ConfigError("eigen_check: mode index beyond the grid");
        const double lam = rates[sc.n - 1], t = 5.0 / lam;
        RealField th = prop.evolve(th0, t);
        double amp = inner(th, th0) / inner(th0, th0), expect = std::exp(-5.0);
        double err = std::abs(amp - expect) / expect;
        rep["eigen_decay"] = {{"rate", lam}, {"time", t}, {"amplitude", amp}, {"expected", expect}, {"relative_error", err}};
        if (sc.accept_eigen_decay)
            out.checks.push_back({"eigen_decay", err, "< " + fmt_double(*sc.accept_eigen_decay),
                                  err < *sc.accept_eigen_decay, true});
    }

    if (sc.wall_strip) {
        nlohmann::json list = nlohmann::json::array();
        std::vector<double> ts, bot, top;
        for (const TimedField& s : res.snapshots) {
            RealField b = bilaplacian(split_mean_fluct(s.theta).fluct);
            double w = std::min(4.0 * std::pow(1.0 + s.time, -0.25), 0.5 * sc.height);
            double nb = l2_norm_band(b, 0.0, w), nt = l2_norm_band(b, sc.height - w, sc.height);
            list.push_back({{"time", s.time}, {"strip_width", w}, {"bottom", nb}, {"top", nt}});
            if (s.time >= 1.0) {
                ts.push_back(s.time);
                bot.push_back(nb);
                top.push_back(nt);
            }
        }
        double eb = log_log_exponent(ts, bot), et = log_log_exponent(ts, top);
        rep["wall_strip"] = {{"snapshots", list},
                             {"exponent_bottom", std::isfinite(eb) ? nlohmann::json(eb) : nlohmann::json(nullptr)},
                             {"exponent_top", std::isfinite(et) ? nlohmann::json(et) : nlohmann::json(nullptr)}};
    }

    for (AcceptanceCheck& c : out.checks) c.enforced = sc.accept_enforce;
    nlohmann::json checks = nlohmann::json::array();
    for (const AcceptanceCheck& c : out.checks)
        checks.push_back({{"name", c.name},
                          {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr)},
                          {"bound", c.bound},
                          {"pass", c.pass},
                          {"enforced", c.enforced}});
    rep["acceptance"] = {{"checks", checks}, {"accepted", out.accepted()}, {"requested", opt.accept}};
    rep["warnings"] = out.warnings;

    if (!spec.out_dir.empty()) {
        write_file((dir / "report.json").string(), rep.dump(2) + "\n");
        files.push_back("report.json");
        nlohmann::json listing = nlohmann::json::array();
        for (const std::string& f : files) {
            std::string content = read_file((dir / f).string());
            listing.push_back({{"path", f}, {"git_hash", git_blob_hash(content)}, {"bytes", content.size()}});
        }
        nlohmann::json manifest = {{"name", sc.name},
                                   {"config", {{"source", sc.source}, {"git_hash", git_blob_hash(sc.text)}}},
                                   {"scenario", sc.echo()},
                                   {"options", {{"exact_linear", spec.exact_linear}, {"accept", opt.accept}}},
                                   {"files", listing}};
        write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    }
    return out;
}

}  // namespace stlab
