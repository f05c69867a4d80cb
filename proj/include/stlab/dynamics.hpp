#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stlab/background.hpp"
#include "stlab/domain.hpp"
#include "stlab/rearrange.hpp"

namespace stlab {

enum class Mode { linear, nonlinear };
enum class Advection { flux, advective, skew };

struct StepperConfig {
    bool auto_dt = true;
    double dt = 0.0;          // used when auto_dt is false
    double cfl = 0.5;
    double dt_max = 2.0;      // cap for auto dt
    double dt_min = 1e-6;     // floor for auto dt
    Mode mode = Mode::nonlinear;
    bool dealias = true;      // 2/3 rule on the transport term
    Advection advection = Advection::advective;
    double filter = 0.0;      // coefficient of the dz^6 d_z^6 filter on theta'
    double t_final = 1.0;
    double snapshot_every = 0.0;  // 0 disables
    double diag_every = 0.0;      // 0: only t = 0 and t_final
    std::vector<double> diag_times;      // extra diagnostics times
    std::vector<double> snapshot_times;  // extra snapshot times

    void validate() const;
};

// rho = Theta + theta, theta split into mean and fluctuation, psi solved
// from theta'. Build with make_state so the fields stay consistent.
struct State {
    double time = 0.0;
    RealField rho;
    MeanFluctPair theta_pair;
    RealField psi;
    VerticalProfile background;
    VerticalProfile background_slope;

    RealField theta() const;  // rho - Theta
};

State make_state(const Background& bg, const RealField& theta, double time = 0.0);

// Time derivative of theta for the configured mode.
RealField theta_rate(const RealField& theta, const VerticalProfile& slope, const StepperConfig& cfg);

// CFL step for the current velocity, capped and floored as configured.
double stable_dt(const State& s, const StepperConfig& cfg);

// One SSP-RK3 step of size dt. Throws BlowUpError on non-finite values.
State step(const State& s, const StepperConfig& cfg, double dt);
// Same with dt from the configuration (auto or fixed).
State step(const State& s, const StepperConfig& cfg);

struct DiagnosticsRecord {
    double time = 0.0;
    double potential_energy = 0.0;
    double dissipation = 0.0;
    double l2_theta_fluct = 0.0;
    double h_theta_fluct[4] = {0, 0, 0, 0};  // H^1..H^4
    double l2_dx3_fluct = 0.0;
    double h4_dx_fluct = 0.0;
    double h2_G = 0.0;
    double mass = 0.0;
    double l2_rho = 0.0;
    std::vector<double> level_measures;
    double min_dz_rho = 0.0;
    double wall_theta = 0.0;      // max |theta| on the walls
    double wall_dz_theta = 0.0;   // max |d_z theta| on the walls
    double dist_rearranged = -1.0;  // ||rho - rho*_0||, -1 when not requested

    bool all_finite() const;
};

DiagnosticsRecord diagnose(const State& s, const std::vector<double>& lambdas,
                           const RearrangementProfile* rho_star = nullptr);

std::vector<std::string> diagnostics_header(const std::vector<double>& lambdas);
std::vector<double> diagnostics_row(const DiagnosticsRecord& r);

struct RunSpec {
    Background background;
    RealField theta0;
    StepperConfig stepper;
    std::vector<double> lambdas;
    std::string out_dir;             // empty: nothing written
    bool exact_linear = false;       // linear mode only
    bool compare_rearrangement = false;
    bool keep_snapshots = false;     // also return snapshot fields
};

struct TimedField {
    double time;
    RealField theta;
};

struct RunResult {
    std::vector<DiagnosticsRecord> records;
    std::vector<TimedField> snapshots;  // when keep_snapshots
    std::vector<std::string> files;     // written paths relative to out_dir
    std::optional<RearrangementProfile> rho_star;
    long steps = 0;
};

// Integrates to t_final landing exactly on every output time. Diagnostics
// rows are appended to timeseries.csv as they are produced, so a blow-up
// leaves the valid prefix on disk before BlowUpError propagates.
RunResult run(const RunSpec& spec);

// Sorted output times: 0, multiples of each cadence, explicit lists, t_final.
std::vector<double> output_times(const StepperConfig& cfg);

}  // namespace stlab
