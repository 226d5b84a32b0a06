#include "crcap/effcap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crcap {

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::FixedRateFixedPower: return "fixed";
        case Scheme::VarRateFixedPower: return "var-rate";
        case Scheme::VarRateVarPower: return "var-power";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "fixed" || name == "fixed-rate-fixed-power") return Scheme::FixedRateFixedPower;
    if (name == "var-rate" || name == "var-rate-fixed-power") return Scheme::VarRateFixedPower;
    if (name == "var-power" || name == "var-rate-var-power") return Scheme::VarRateVarPower;
    throw ConfigError("unknown scheme '" + name + "' (expected fixed, var-rate or var-power)");
}

double rate_exponent(const ScenarioConfig& cfg) {
    cfg.validate();
    return cfg.transmit_s() * cfg.bandwidth_hz * cfg.theta / std::numbers::ln2;
}

namespace {

double frame_bandwidth(const ScenarioConfig& cfg) { return cfg.frame_s * cfg.bandwidth_hz; }

// Weights on the two fading tails met by one rate, together with the SNRs.
struct RateBranch {
    double weight_a;
    double snr_a;
    double weight_b;
    double snr_b;
};

RateBranch rate_branch(const ScenarioConfig& cfg, const SensingPerformance& perf, const SnrQuad& snr,
                       int slot) {
    if (slot == 0) {
        return {cfg.rho * perf.p_d, snr.snr1, (1.0 - cfg.rho) * perf.p_f, snr.snr3};
    }
    return {cfg.rho * (1.0 - perf.p_d), snr.snr2, (1.0 - cfg.rho) * (1.0 - perf.p_f), snr.snr4};
}

// Probability that a frame sent at this rate is delivered.
double on_probability(const RateBranch& br, const FadingModel& fading, double rate, double bw) {
    double p = 0.0;
    if (br.weight_a > 0.0) p += br.weight_a * fading.tail(outage_threshold(rate, br.snr_a, bw));
    if (br.weight_b > 0.0) p += br.weight_b * fading.tail(outage_threshold(rate, br.snr_b, bw));
    return p;
}

// Probability that a frame sent at this rate is lost.
double off_probability(const RateBranch& br, const FadingModel& fading, double rate, double bw) {
    double p = 0.0;
    if (br.weight_a > 0.0) p += br.weight_a * fading.cdf(outage_threshold(rate, br.snr_a, bw));
    if (br.weight_b > 0.0) p += br.weight_b * fading.cdf(outage_threshold(rate, br.snr_b, bw));
    return p;
}

// ln(off + on e^{-x}) without underflow or cancellation.
double log_mix(double off, double on, double x) {
    if (on <= 0.0) return std::log(off);
    const double b = std::log(on) - x;
    if (off <= 0.0) return b;
    const double a = std::log(off);
    return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

bool use_series(const ScenarioConfig& cfg, double max_bits) {
    return cfg.theta < kSmallTheta && cfg.theta * max_bits < 1e-4;
}

struct LineMax {
    double x;
    double value;
    bool converged;
};

// Maximize f on [0, upper]: coarse grid, then golden section around the best
// grid point. Strict comparisons keep the leftmost maximizer on ties.
LineMax maximize_on_interval(const ScalarFn& f, double upper) {
    constexpr int grid = 200;
    const double step = upper / (grid - 1);
    int best = 0;
    double best_value = f(0.0);
    for (int k = 1; k < grid; ++k) {
        const double v = f(k * step);
        if (v > best_value) {
            best = k;
            best_value = v;
        }
    }
    double lo = std::max(0, best - 1) * step;
    double hi = std::min(grid - 1, best + 1) * step;
    const double width_tol = kRateRelTolerance * upper;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        if (hi - lo <= width_tol) {
            converged = true;
            break;
        }
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    LineMax out{best * step, best_value, converged};
    if (f1 > out.value || (f1 == out.value && x1 < out.x)) out = {x1, f1, converged};
    if (f2 > out.value || (f2 == out.value && x2 < out.x)) out = {x2, f2, converged};
    return out;
}

}  // namespace

double effcap_fixed_value(const ScenarioConfig& cfg, const SensingPerformance& perf, double r1_bps,
                          double r2_bps) {
    const StateModel sm = transition_probs(cfg, perf, r1_bps, r2_bps);
    const double on1 = sm.p[0] + sm.p[4];
    const double on2 = sm.p[2] + sm.p[6];
    const double s1 = sm.service_bits[0];
    const double s2 = sm.service_bits[2];
    if (use_series(cfg, std::max(s1, s2))) {
        return (on1 * s1 + on2 * s2) / frame_bandwidth(cfg);
    }
    // 1 - sp(phi R), kept away from the cancellation in 1 - (1 - small).
    const double shortfall = -on1 * std::expm1(-cfg.theta * s1) - on2 * std::expm1(-cfg.theta * s2);
    if (shortfall < 0.5) return -std::log1p(-shortfall) / (cfg.theta * frame_bandwidth(cfg));
    // Nearly every frame delivers many nats: sum the states in the log domain.
    const double off = sm.p[1] + sm.p[3] + sm.p[5] + sm.p[7];
    const double l1 = on1 > 0.0 ? std::log(on1) - cfg.theta * s1 : -INFINITY;
    const double l2 = on2 > 0.0 ? std::log(on2) - cfg.theta * s2 : -INFINITY;
    const double hi = std::max(l1, l2), lo = std::min(l1, l2);
    const double on_part = hi + std::log1p(std::exp(lo - hi));
    return -log_mix(off, 1.0, -on_part) / (cfg.theta * frame_bandwidth(cfg));
}

double rate_search_upper(const ScenarioConfig& cfg, int slot) {
    const SnrQuad snr = derive_snrs(cfg);
    const double top = slot == 0 ? std::max(snr.snr1, snr.snr3) : std::max(snr.snr2, snr.snr4);
    return cfg.bandwidth_hz * std::log2(1.0 + top * cfg.fading.quantile(0.999));
}

EffCapResult optimize_fixed_rates(const ScenarioConfig& cfg, const SensingPerformance& perf) {
    cfg.validate();
    perf.validate();
    const SnrQuad snr = derive_snrs(cfg);
    const double bw = cfg.bandwidth_hz;
    const double tx = cfg.transmit_s();

    EffCapResult res;
    res.scheme = Scheme::FixedRateFixedPower;
    double rates[2] = {0.0, 0.0};
    for (int slot = 0; slot < 2; ++slot) {
        const RateBranch br = rate_branch(cfg, perf, snr, slot);
        const double upper = rate_search_upper(cfg, slot);
        const bool series = use_series(cfg, upper * tx);
        // Mean service when theta -> 0; otherwise minus the log of this slot's
        // share of sp(phi R), which stays resolved when e^{-theta r tx} is tiny.
        const ScalarFn gain = [&](double r) {
            const double on = on_probability(br, cfg.fading, r, bw);
            if (series) return on * r * tx;
            if (br.weight_a + br.weight_b <= 0.0) return 0.0;
            return -log_mix(off_probability(br, cfg.fading, r, bw), on, cfg.theta * r * tx);
        };
        const LineMax best = maximize_on_interval(gain, upper);
        rates[slot] = best.x;
        res.converged = res.converged && best.converged;
    }
    res.r1_opt = rates[0];
    res.r2_opt = rates[1];
    res.r_e = effcap_fixed_value(cfg, perf, rates[0], rates[1]);
    res.log_mgf = -res.r_e * cfg.theta * frame_bandwidth(cfg);
    return res;
}

EffCapResult effcap_adaptive(const ScenarioConfig& cfg, const SensingPerformance& perf,
                             const PowerAllocation& busy, const PowerAllocation& idle,
                             const Tolerance& tol) {
    cfg.validate();
    perf.validate();
    const SnrQuad snr = derive_snrs(cfg);
    const double a = rate_exponent(cfg);
    const double w_busy = cfg.rho * perf.p_d + (1.0 - cfg.rho) * perf.p_f;
    const double w_idle = (1.0 - cfg.rho) * (1.0 - perf.p_f);
    const bool series = cfg.theta < kSmallTheta;

    // Per branch: E{1 - (1 + mu z snr)^{-a}}, or E{ln(1 + mu z snr)} in the series branch.
    auto branch = [&](const PowerAllocation& pa, double branch_snr, double weight) {
        if (weight == 0.0) return 0.0;
        const ScalarFn g = [&](double z) {
            const double nats = std::log1p(pa.mu(z) * z * branch_snr);
            return series ? nats : -std::expm1(-a * nats);
        };
        return weight * expect_over_fading(g, cfg.fading, tol, pa.cutoff);
    };
    const double busy_term = branch(busy, snr.snr1, w_busy);
    const double idle_term = branch(idle, snr.snr4, w_idle);

    EffCapResult res;
    res.scheme = Scheme::VarRateFixedPower;
    if (series) {
        const double mean_bits =
            (busy_term + idle_term) / std::numbers::ln2 * cfg.bandwidth_hz * cfg.transmit_s();
        res.r_e = mean_bits / frame_bandwidth(cfg);
        res.log_mgf = -cfg.theta * mean_bits;
    } else {
        res.log_mgf = std::log1p(-(busy_term + idle_term));
        res.r_e = -res.log_mgf / (cfg.theta * frame_bandwidth(cfg));
    }
    return res;
}

EffCapResult effcap_var_rate_fixed_power(const ScenarioConfig& cfg, const SensingPerformance& perf,
                                         const Tolerance& tol) {
    const PowerAllocation constant{[](double) { return 1.0; }, 0.0};
    return effcap_adaptive(cfg, perf, constant, constant, tol);
}

double PowerPolicy::operator()(double z) const { return eval_power_policy(*this, z); }

PowerAllocation PowerPolicy::allocation() const {
    const PowerPolicy self = *this;
    return {[self](double z) { return eval_power_policy(self, z); }, gamma};
}

double eval_power_policy(const PowerPolicy& pol, double z) {
    const double u = std::log(z) - pol.log_gamma;
    if (!(u > 0.0)) return 0.0;
    // (1/snr)(gamma^{-1/(a+1)} z^{-a/(a+1)} - 1/z) = ((z/gamma)^{1/(a+1)} - 1) / (snr z)
    return std::expm1(u / (pol.a + 1.0)) / (pol.snr * z);
}

namespace {

double policy_mean_power_log(double log_gamma, double a, double snr, const FadingModel& fading,
                             const Tolerance& tol) {
    // mu(z) z = expm1(u / (a + 1)) / snr with u = ln(z / gamma).
    const ScalarFn mu_times_z = [&](double u) { return std::expm1(u / (a + 1.0)) / snr; };
    return expect_over_fading_log(mu_times_z, fading, log_gamma, tol, true);
}

}  // namespace

double policy_mean_power(const PowerPolicy& pol, const FadingModel& fading, const Tolerance& tol) {
    return policy_mean_power_log(pol.log_gamma, pol.a, pol.snr, fading, tol);
}

PowerPolicy solve_power_threshold(double a, double snr, const FadingModel& fading,
                                  const Tolerance& tol) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("policy exponent a must be >= 0");
    if (!(snr > 0.0) || !std::isfinite(snr)) throw ConfigError("policy snr must be > 0");
    tol.validate();
    const double mean = fading.mean_power();
    // Cutoffs fall like exp(-sqrt(a)) for strict QoS, so the root is sought in ln(gamma).
    const ScalarFn excess = [&](double log_gamma) {
        return policy_mean_power_log(log_gamma, a, snr, fading, tol) - 1.0;
    };
    Tolerance root_tol;
    root_tol.abs = 1e-10;
    root_tol.max_iter = tol.max_iter;
    // Constant-width steps: doubling would overshoot into cutoffs below e^{-700}.
    double lo = std::log(1e-8 * mean), hi = std::log(1e3 * mean);
    const double width = hi - lo;
    double f_lo = excess(lo), f_hi = excess(hi);
    for (int k = 0; f_lo * f_hi > 0.0; ++k) {
        if (k >= tol.max_iter) throw NumericError("power cutoff not bracketed");
        if (f_lo < 0.0) {
            hi = lo;
            f_hi = f_lo;
            lo -= width;
            f_lo = excess(lo);
        } else {
            lo = hi;
            f_lo = f_hi;
            hi += width;
            f_hi = excess(hi);
        }
    }
    const double log_gamma = find_root_monotone(excess, lo, hi, root_tol);
    return {std::exp(log_gamma), a, snr, log_gamma};
}

EffCapResult effcap_var_power(const ScenarioConfig& cfg, const SensingPerformance& perf,
                              const Tolerance& tol) {
    cfg.validate();
    perf.validate();
    const SnrQuad snr = derive_snrs(cfg);
    const double a = rate_exponent(cfg);
    const double w_busy = cfg.rho * perf.p_d + (1.0 - cfg.rho) * perf.p_f;
    const double w_idle = (1.0 - cfg.rho) * (1.0 - perf.p_f);
    const bool series = cfg.theta < kSmallTheta;

    const PowerPolicy busy = solve_power_threshold(a, snr.snr1, cfg.fading, tol);
    const PowerPolicy idle = solve_power_threshold(a, snr.snr4, cfg.fading, tol);

    // Above the cutoff ln(1 + mu z snr) = u / (a + 1) with u = ln(z / gamma).
    auto branch = [&](const PowerPolicy& pol, double weight) {
        if (weight == 0.0) return 0.0;
        const ScalarFn h = [&](double u) {
            const double nats = u / (a + 1.0);
            return series ? nats : -std::expm1(-a * nats);
        };
        return weight * expect_over_fading_log(h, cfg.fading, pol.log_gamma, tol);
    };
    const double busy_term = branch(busy, w_busy);
    const double idle_term = branch(idle, w_idle);

    EffCapResult res;
    res.scheme = Scheme::VarRateVarPower;
    res.gamma1 = busy.gamma;
    res.gamma2 = idle.gamma;
    if (series) {
        const double mean_bits =
            (busy_term + idle_term) / std::numbers::ln2 * cfg.bandwidth_hz * cfg.transmit_s();
        res.r_e = mean_bits / frame_bandwidth(cfg);
        res.log_mgf = -cfg.theta * mean_bits;
    } else {
        res.log_mgf = std::log1p(-(busy_term + idle_term));
        res.r_e = -res.log_mgf / (cfg.theta * frame_bandwidth(cfg));
    }
    return res;
}

EffCapResult evaluate_scheme(const ScenarioConfig& cfg, const SensingPerformance& perf, Scheme scheme,
                             const Tolerance& tol) {
    switch (scheme) {
        case Scheme::FixedRateFixedPower: return optimize_fixed_rates(cfg, perf);
        case Scheme::VarRateFixedPower: return effcap_var_rate_fixed_power(cfg, perf, tol);
        case Scheme::VarRateVarPower: return effcap_var_power(cfg, perf, tol);
    }
    throw ConfigError("unknown scheme");
}

}  // namespace crcap
