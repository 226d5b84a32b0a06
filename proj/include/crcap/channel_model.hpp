#pragma once

#include "crcap/numerics.hpp"
#include "crcap/sensing.hpp"

namespace crcap {

/// Physical and system parameters of one cognitive-radio link.
///
/// Powers are average transmit powers in Watts; the per-symbol energy budget
/// is power / bandwidth. theta is the QoS exponent in 1/bits.
struct ScenarioConfig {
    double frame_s = 0.1;
    double sensing_s = 0.0025;
    double bandwidth_hz = 100e3;
    double theta = 0.01;
    double rho = 0.1;
    double p1_avg = 0.0;  // used when the channel is detected busy
    double p2_avg = 0.0;  // used when the channel is detected idle
    double noise_var = 1.0;
    double primary_var = 1.0;
    FadingModel fading = FadingModel::rayleigh(1.0);

    void validate() const;

    /// Transmission time per frame, T - N.
    double transmit_s() const { return frame_s - sensing_s; }
    SensingConfig sensing() const { return {sensing_s, bandwidth_hz, noise_var, primary_var}; }

    /// Back-derives P1 and P2 from SNR1 (busy, detected busy), SNR4 (idle,
    /// detected idle) and the interference ratio kappa = primary_var / noise_var.
    static ScenarioConfig from_snr_db(double frame_s, double sensing_s, double bandwidth_hz,
                                      double theta, double rho, double snr1_db, double snr4_db,
                                      double kappa, double noise_var = 1.0,
                                      FadingModel fading = FadingModel::rayleigh(1.0));
};

/// Linear SNRs in the four sensing scenarios:
/// 1 busy/detected busy, 2 busy/detected idle, 3 idle/detected busy, 4 idle/detected idle.
struct SnrQuad {
    double snr1 = 0.0;
    double snr2 = 0.0;
    double snr3 = 0.0;
    double snr4 = 0.0;
};

struct OutageThresholds {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;
    double alpha4 = 0.0;
};

SnrQuad derive_snrs(const ScenarioConfig& cfg);

/// Smallest fading power that supports rate r: (2^{r/B} - 1) / snr.
double outage_threshold(double rate_bps, double snr, double bandwidth_hz);

/// Thresholds for rate r1 (detected busy) and r2 (detected idle).
OutageThresholds outage_thresholds(const SnrQuad& snr, double r1_bps, double r2_bps,
                                   double bandwidth_hz);

/// P{z > alpha}.
double tail_prob(const FadingModel& model, double alpha);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace crcap
