#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "crcap/channel_model.hpp"
#include "crcap/effcap.hpp"
#include "crcap/sensing.hpp"

namespace crcap::app {

using nlohmann::json;

/// Parses a number with an optional SI suffix: p n u m k M G (e.g. "100k", "2.5m").
double parse_si(const std::string& text);

/// Accepts a JSON number or an SI-suffixed string.
double json_number(const json& v, const std::string& key);

enum class SensingMode { Exact, Gaussian, Perfect, Given };

/// A scenario as written in a config file: the SNR-based parameterization
/// (SNR1, SNR4 in dB plus kappa) together with the sensing operating point.
struct ScenarioSpec {
    double frame_s = 0.1;
    double sensing_s = 0.0025;
    double bandwidth_hz = 100e3;
    double theta = 0.01;
    double rho = 0.1;
    double snr1_db = 0.0;
    double snr4_db = 10.0;
    double kappa = 1.0;
    double noise_var = 1.0;
    FadingModel fading = FadingModel::rayleigh(1.0);
    Scheme scheme = Scheme::FixedRateFixedPower;

    SensingMode sensing_mode = SensingMode::Perfect;
    double lambda = 0.0;  // absolute per-sample power
    double p_f = 0.0;     // SensingMode::Given
    double p_d = 1.0;

    /// Parameters the config left out and that took a default, name -> value.
    std::map<std::string, double> assumed;

    ScenarioConfig scenario() const;
    SensingPerformance performance() const;
    /// Performance for an explicit scenario (sweeps that change N).
    SensingPerformance performance(const ScenarioConfig& cfg) const;
};

/// Keys: T_s, N_s, B_hz, theta, rho, snr1_db, snr4_db, kappa, fading {kind,
/// mean_power | z0 | z, cdf}, scheme, noise_var, and the sensing block: one of
/// lambda (absolute), lambda_rel (lambda / noise_var), perfect_sensing: true,
/// or p_f and p_d. "sensing_model": "gaussian" selects the normal approximation.
ScenarioSpec parse_scenario(const json& doc);
ScenarioSpec load_scenario(const std::string& path);

/// Canonical form; parse_scenario(to_json(s)) reproduces s.
json to_json(const ScenarioSpec& spec);

json to_json(const FadingModel& fading);
FadingModel parse_fading(const json& doc);

std::string to_string(SensingMode mode);

/// Dumps JSON with a trailing newline. Doubles go through format_number.
std::string dump_json(const json& doc);

/// JSON number rounded the same way as the CSV output.
json json_value(double v);
json json_value(const std::optional<double>& v);

}  // namespace crcap::app
