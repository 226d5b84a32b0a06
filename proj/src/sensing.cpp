#include "crcap/sensing.hpp"

#include <cmath>

#include "crcap/numerics.hpp"

namespace crcap {

void SensingConfig::validate() const {
    if (!std::isfinite(duration_s) || duration_s <= 0.0) throw ConfigError("sensing duration must be > 0");
    if (!std::isfinite(bandwidth_hz) || bandwidth_hz <= 0.0) throw ConfigError("bandwidth must be > 0");
    if (!std::isfinite(noise_var) || noise_var <= 0.0) throw ConfigError("noise variance must be > 0");
    if (!std::isfinite(primary_var) || primary_var < 0.0) {
        throw ConfigError("primary signal variance must be >= 0");
    }
    const double nb = duration_s * bandwidth_hz;
    if (nb > static_cast<double>(kMaxSensingSamples)) {
        throw ConfigError("sensing sample count NB exceeds 1e7");
    }
}

std::int64_t SensingConfig::sample_count() const {
    const auto nb = static_cast<std::int64_t>(std::llround(duration_s * bandwidth_hz));
    return nb < 1 ? 1 : nb;
}

void SensingPerformance::validate() const {
    if (!(p_f >= 0.0 && p_f <= 1.0) || !(p_d >= 0.0 && p_d <= 1.0)) {
        throw ConfigError("sensing probabilities must lie in [0, 1]");
    }
}

namespace {

double exceed_prob(const SensingConfig& cfg, double lambda, double variance) {
    cfg.validate();
    if (std::isnan(lambda) || lambda < 0.0) throw ConfigError("detection threshold must be >= 0");
    const double nb = static_cast<double>(cfg.sample_count());
    return reg_upper_gamma(nb, nb * lambda / variance);
}

}  // namespace

double false_alarm_prob(const SensingConfig& cfg, double lambda) {
    return exceed_prob(cfg, lambda, cfg.noise_var);
}

double detection_prob(const SensingConfig& cfg, double lambda) {
    return exceed_prob(cfg, lambda, cfg.noise_var + cfg.primary_var);
}

SensingPerformance sensing_performance(const SensingConfig& cfg, double lambda) {
    return {lambda, false_alarm_prob(cfg, lambda), detection_prob(cfg, lambda)};
}

SensingPerformance sensing_performance_gaussian(const SensingConfig& cfg, double lambda) {
    cfg.validate();
    if (std::isnan(lambda) || lambda < 0.0) throw ConfigError("detection threshold must be >= 0");
    const double root_nb = std::sqrt(static_cast<double>(cfg.sample_count()));
    const double s0 = cfg.noise_var;
    const double s1 = cfg.noise_var + cfg.primary_var;
    return {lambda, gaussian_q((lambda - s0) * root_nb / s0), gaussian_q((lambda - s1) * root_nb / s1)};
}

}  // namespace crcap
