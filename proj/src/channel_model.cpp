#include "crcap/channel_model.hpp"

#include <cmath>

namespace crcap {

void ScenarioConfig::validate() const {
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!finite_positive(frame_s) || !finite_positive(sensing_s)) {
        throw ConfigError("frame and sensing durations must be > 0");
    }
    if (sensing_s >= frame_s) throw ConfigError("sensing duration N must be smaller than frame T");
    if (!finite_positive(bandwidth_hz)) throw ConfigError("bandwidth must be > 0");
    if (!finite_positive(theta)) throw ConfigError("QoS exponent theta must be > 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("busy probability rho must lie in [0, 1]");
    if (!finite_positive(p1_avg) || !finite_positive(p2_avg)) {
        throw ConfigError("average powers must be > 0");
    }
    if (p1_avg > p2_avg) throw ConfigError("busy-channel power P1 must not exceed P2");
    if (!finite_positive(noise_var)) throw ConfigError("noise variance must be > 0");
    if (!std::isfinite(primary_var) || primary_var < 0.0) {
        throw ConfigError("primary signal variance must be >= 0");
    }
    sensing().validate();
}

ScenarioConfig ScenarioConfig::from_snr_db(double frame_s, double sensing_s, double bandwidth_hz,
                                           double theta, double rho, double snr1_db,
                                           double snr4_db, double kappa, double noise_var,
                                           FadingModel fading) {
    if (!std::isfinite(kappa) || kappa < 0.0) throw ConfigError("kappa must be >= 0");
    ScenarioConfig cfg;
    cfg.frame_s = frame_s;
    cfg.sensing_s = sensing_s;
    cfg.bandwidth_hz = bandwidth_hz;
    cfg.theta = theta;
    cfg.rho = rho;
    cfg.noise_var = noise_var;
    cfg.primary_var = kappa * noise_var;
    cfg.p1_avg = db_to_linear(snr1_db) * bandwidth_hz * (noise_var + cfg.primary_var);
    cfg.p2_avg = db_to_linear(snr4_db) * bandwidth_hz * noise_var;
    cfg.fading = std::move(fading);
    cfg.validate();
    return cfg;
}

SnrQuad derive_snrs(const ScenarioConfig& cfg) {
    cfg.validate();
    const double busy_noise = cfg.bandwidth_hz * (cfg.noise_var + cfg.primary_var);
    const double idle_noise = cfg.bandwidth_hz * cfg.noise_var;
    return {cfg.p1_avg / busy_noise, cfg.p2_avg / busy_noise, cfg.p1_avg / idle_noise,
            cfg.p2_avg / idle_noise};
}

double outage_threshold(double rate_bps, double snr, double bandwidth_hz) {
    if (std::isnan(rate_bps) || rate_bps < 0.0) throw ConfigError("rate must be >= 0");
    if (!(snr > 0.0)) throw ConfigError("outage threshold needs snr > 0");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be > 0");
    return std::expm1(rate_bps / bandwidth_hz * std::log(2.0)) / snr;
}

OutageThresholds outage_thresholds(const SnrQuad& snr, double r1_bps, double r2_bps,
                                   double bandwidth_hz) {
    return {outage_threshold(r1_bps, snr.snr1, bandwidth_hz),
            outage_threshold(r2_bps, snr.snr2, bandwidth_hz),
            outage_threshold(r1_bps, snr.snr3, bandwidth_hz),
            outage_threshold(r2_bps, snr.snr4, bandwidth_hz)};
}

double tail_prob(const FadingModel& model, double alpha) {
    if (std::isnan(alpha) || alpha < 0.0) throw ConfigError("fading threshold must be >= 0");
    return model.tail(alpha);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace crcap
