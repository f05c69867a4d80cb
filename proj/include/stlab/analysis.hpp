#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "stlab/blprofiles.hpp"
#include "stlab/domain.hpp"
#include "stlab/dynamics.hpp"

namespace stlab {

struct PowerLawFit {
    double exponent = 0.0;   // v ~ prefactor (1+t)^{-exponent}
    double prefactor = 0.0;
    double t_min = 0.0, t_max = 0.0;
    double r_squared = 0.0;
    int n_samples = 0;
};

// Least squares of log v against log(1+t) over samples with t in
// [t_min, t_max]. The window must lie inside the series, start at t >= 1
// and hold at least 8 samples, all positive.
PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& v, double t_min,
                          double t_max);

// Negated slope of log v against log t; no sample-count floor. Used for
// short ladders (a handful of times).
double log_log_exponent(const std::vector<double>& t, const std::vector<double>& v);

struct BLMeasurement {
    BLSide side = BLSide::bottom;
    std::vector<double> times;
    std::vector<double> widths;      // NaN when no 1/e crossing in the wall half
    std::vector<double> amplitudes;  // L2 of theta' over the near-wall third
    double width_exponent = 0.0;     // width ~ t^{-width_exponent}
    double amplitude_exponent = 0.0; // amplitude ~ t^{-amplitude_exponent}
};

// x-RMS of theta' as a function of the distance to the chosen wall, the
// distance where it first drops to 1/e of its wall value (local cubic
// interpolation) and the near-wall amplitude. Uses the snapshots with
// t >= 10; at least 4 are required.
BLMeasurement extract_bl(const std::vector<TimedField>& snapshots, BLSide side);

// x-RMS of theta' per z node.
std::vector<double> rms_profile(const RealField& theta);

struct ValidationReport {
    double time = 0.0;
    double strip_width = 0.0;
    double l2_residual = 0.0;      // ||sim - mean - theta_bl||
    double l2_bottom_strip = 0.0;  // same restricted to z < strip_width
    double l2_top_strip = 0.0;     // same restricted to z > height - strip_width
    double l2_sim_fluct = 0.0;     // ||sim - mean||
    double l2_predicted = 0.0;     // ||theta_bl||
};

// strip_width <= 0 selects 4 (1+t)^{-1/4}.
ValidationReport validate_prediction(const RealField& simulated, double time, const BLFieldPrediction& predicted,
                                     const VerticalProfile& mean_offset, double strip_width = 0.0);

// Norm of f over nodes with z in [z0, z1] (trapezoid in z, exact in x).
double l2_norm_band(const RealField& f, double z0, double z1);

nlohmann::json to_json(const PowerLawFit& f);
nlohmann::json to_json(const BLMeasurement& m);
nlohmann::json to_json(const ValidationReport& r);

}  // namespace stlab
