#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "crcap/channel_model.hpp"
#include "crcap/numerics.hpp"
#include "crcap/sensing.hpp"
#include "crcap/state_model.hpp"

namespace crcap {

enum class Scheme { FixedRateFixedPower, VarRateFixedPower, VarRateVarPower };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct EffCapResult {
    Scheme scheme = Scheme::FixedRateFixedPower;
    /// Normalized effective capacity in bits/s/Hz.
    double r_e = 0.0;
    /// Natural log of the per-frame MGF E{e^{-theta S}}; r_e = -log_mgf / (theta T B).
    double log_mgf = 0.0;
    std::optional<double> r1_opt;  // bits/s, fixed-rate scheme
    std::optional<double> r2_opt;
    std::optional<double> gamma1;  // power cutoffs, variable-power scheme
    std::optional<double> gamma2;
    bool converged = true;
};

/// QoS exponent mapped into the rate exponent: a = (T - N) B theta / ln 2,
/// so that e^{-theta (T-N) B log2(1 + x)} = (1 + x)^{-a}.
double rate_exponent(const ScenarioConfig& cfg);

/// Below this QoS exponent the log-MGF is replaced by its first-order expansion.
inline constexpr double kSmallTheta = 1e-8;

/// Normalized effective capacity of the fixed-rate chain at the given rates (no maximization).
double effcap_fixed_value(const ScenarioConfig& cfg, const SensingPerformance& perf,
                          double r1_bps, double r2_bps);

/// Search interval [0, upper] for the rate used when detected busy (slot 0)
/// or detected idle (slot 1): B log2(1 + snr z_999), snr the larger of the
/// two SNRs that rate meets, z_999 the 99.9th fading percentile.
double rate_search_upper(const ScenarioConfig& cfg, int slot);

/// Final golden-section bracket width, relative to the search interval.
inline constexpr double kRateRelTolerance = 1e-7;

/// Global maximizer over r1, r2 >= 0. The log argument splits into a term in
/// r1 and a term in r2, so each rate is found by its own 1-D search: a
/// 200-point grid followed by golden-section refinement. Ties go to the
/// smaller rate.
EffCapResult optimize_fixed_rates(const ScenarioConfig& cfg, const SensingPerformance& perf);

/// Normalized power mu(z) = P(z) / P_avg as a function of fading power.
/// A policy is zero at and below `cutoff`.
struct PowerAllocation {
    std::function<double(double)> mu;
    double cutoff = 0.0;
};

/// Effective capacity of the adaptive-rate chain (states 1, 4, 5, 7) when the
/// transmitter uses `busy` after a busy decision (rate against SNR1) and
/// `idle` after an idle decision (rate against SNR4).
EffCapResult effcap_adaptive(const ScenarioConfig& cfg, const SensingPerformance& perf,
                             const PowerAllocation& busy, const PowerAllocation& idle,
                             const Tolerance& tol = {});

/// Rate adaptation at constant power (mu == 1).
EffCapResult effcap_var_rate_fixed_power(const ScenarioConfig& cfg, const SensingPerformance& perf,
                                         const Tolerance& tol = {});

/// QoS-driven power policy
///   mu(z) = (1/snr) (gamma^{-1/(a+1)} z^{-a/(a+1)} - 1/z)  for z > gamma, 0 otherwise.
struct PowerPolicy {
    double gamma = 0.0;
    double a = 0.0;
    double snr = 0.0;
    /// ln(gamma); stays exact when gamma itself underflows at very large a.
    double log_gamma = 0.0;

    static PowerPolicy from_gamma(double gamma, double a, double snr) {
        return {gamma, a, snr, std::log(gamma)};
    }

    double operator()(double z) const;
    PowerAllocation allocation() const;
};

double eval_power_policy(const PowerPolicy& pol, double z);

/// E_z{mu(z)} for the policy.
double policy_mean_power(const PowerPolicy& pol, const FadingModel& fading, const Tolerance& tol = {});

/// Cutoff gamma with E_z{mu(z)} = 1. The root is found in ln(gamma), starting
/// from [1e-8, 1e3] * mean power and shifting that window by its own width at
/// most tol.max_iter times.
PowerPolicy solve_power_threshold(double a, double snr, const FadingModel& fading,
                                  const Tolerance& tol = {});

/// Rate and power adaptation with the optimal cutoff policies for SNR1 and SNR4.
EffCapResult effcap_var_power(const ScenarioConfig& cfg, const SensingPerformance& perf,
                              const Tolerance& tol = {});

EffCapResult evaluate_scheme(const ScenarioConfig& cfg, const SensingPerformance& perf,
                             Scheme scheme, const Tolerance& tol = {});

}  // namespace crcap
