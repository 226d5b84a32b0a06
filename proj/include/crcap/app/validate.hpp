#pragma once

#include <cstdint>
#include <limits>

#include "crcap/app/config_io.hpp"
#include "crcap/queue_sim.hpp"

namespace crcap::app {

struct ValidationOptions {
    std::int64_t frames = 1'000'000;
    std::uint64_t seed = 1;
    double effcap_rel_tol = 0.01;
    /// Detection from synthesized samples instead of (P_f, P_d).
    bool waveform = false;
    /// Importance-sampled estimate of the effective capacity when fading is Rayleigh.
    bool importance = true;
    /// Make the queue tail-exponent check part of the verdict.
    bool check_tail = false;
    std::int64_t tail_frames = 0;  // 0: same as frames
    int workers = 0;
};

json options_to_json(const ValidationOptions& o);
ValidationOptions options_from_json(const json& doc);

struct ValidationReport {
    json report;
    bool pass = true;
};

/// Analytic vs empirical effective capacity, MGF, state frequencies,
/// detector rates and queue tail exponent for one scheme.
ValidationReport run_validation(const ScenarioSpec& spec, Scheme scheme, const ValidationOptions& opt);

/// Summary of one plain simulation, optionally with its trace.
struct SimulationOutput {
    json summary;
    std::vector<FrameSample> frames;
    std::vector<double> queue;
};

struct SimulationOptions {
    std::int64_t frames = 100'000;
    std::uint64_t seed = 1;
    bool waveform = false;
    /// Constant arrival rate; NaN selects arrival_factor * analytic R_E * B.
    double arrival_bps = std::numeric_limits<double>::quiet_NaN();
    double arrival_factor = 1.0;
    double delay_s = 0.0;  // > 0 adds the delay-violation comparison
    double delay_c = 1.0;
    int workers = 0;
};

json options_to_json(const SimulationOptions& o);
SimulationOptions simulation_options_from_json(const json& doc);

SimulationOutput run_simulation(const ScenarioSpec& spec, Scheme scheme, const SimulationOptions& opt);

}  // namespace crcap::app
