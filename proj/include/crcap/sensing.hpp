#pragma once

#include <cstdint>

namespace crcap {

/// Energy-detector setup: N seconds of sensing at bandwidth B gives NB
/// complex samples of noise (variance noise_var) plus, when the channel is
/// busy, a primary signal of variance primary_var.
struct SensingConfig {
    double duration_s = 0.0;
    double bandwidth_hz = 0.0;
    double noise_var = 1.0;
    double primary_var = 0.0;

    void validate() const;
    /// Sample count NB, rounded to the nearest integer and at least 1.
    std::int64_t sample_count() const;
};

struct SensingPerformance {
    double lambda = 0.0;
    double p_f = 0.0;
    double p_d = 1.0;

    void validate() const;
    /// P_f = 0, P_d = 1.
    static SensingPerformance perfect() { return {0.0, 0.0, 1.0}; }
};

inline constexpr std::int64_t kMaxSensingSamples = 10'000'000;

/// P{Y > lambda | H0} for the chi-square test statistic with 2NB degrees of freedom.
double false_alarm_prob(const SensingConfig& cfg, double lambda);
/// P{Y > lambda | H1}.
double detection_prob(const SensingConfig& cfg, double lambda);
/// Exact (chi-square) operating point.
SensingPerformance sensing_performance(const SensingConfig& cfg, double lambda);
/// Normal approximation of Y: mean sigma^2, variance sigma^4/NB under each hypothesis.
SensingPerformance sensing_performance_gaussian(const SensingConfig& cfg, double lambda);

}  // namespace crcap
