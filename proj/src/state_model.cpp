#include "crcap/state_model.hpp"

#include <cmath>
#include <numeric>

namespace crcap {

void StateModel::validate() const {
    double total = 0.0;
    for (int k = 0; k < kStateCount; ++k) {
        if (!(p[k] >= 0.0) || !std::isfinite(service_bits[k]) || service_bits[k] < 0.0) {
            throw ConfigError("state probabilities and service must be nonnegative");
        }
        if (!is_on_state(k + 1) && service_bits[k] != 0.0) {
            throw ConfigError("OFF states must carry zero service");
        }
        total += p[k];
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("state probabilities must sum to one");
}

StateModel::Matrix StateModel::transition_matrix() const {
    Matrix m{};
    for (auto& row : m) row = p;
    return m;
}

void MgfDiag::validate() const {
    for (double v : phi) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("MGF values must be finite and >= 0");
    }
}

StateModel transition_probs(const ScenarioConfig& cfg, const SensingPerformance& perf,
                            double r1_bps, double r2_bps) {
    perf.validate();
    const SnrQuad snr = derive_snrs(cfg);
    const OutageThresholds al = outage_thresholds(snr, r1_bps, r2_bps, cfg.bandwidth_hz);
    const FadingModel& fd = cfg.fading;

    const double busy_det = cfg.rho * perf.p_d;
    const double busy_miss = cfg.rho * (1.0 - perf.p_d);
    const double idle_fa = (1.0 - cfg.rho) * perf.p_f;
    const double idle_ok = (1.0 - cfg.rho) * (1.0 - perf.p_f);
    const double on1 = fd.tail(al.alpha1);
    const double on2 = fd.tail(al.alpha2);
    const double on3 = fd.tail(al.alpha3);
    const double on4 = fd.tail(al.alpha4);

    StateModel sm;
    sm.p = {busy_det * on1, busy_det * (1.0 - on1), busy_miss * on2, busy_miss * (1.0 - on2),
            idle_fa * on3,  idle_fa * (1.0 - on3),  idle_ok * on4,   idle_ok * (1.0 - on4)};
    const double s1 = r1_bps * cfg.transmit_s();
    const double s2 = r2_bps * cfg.transmit_s();
    sm.service_bits = {s1, 0.0, s2, 0.0, s1, 0.0, s2, 0.0};
    return sm;
}

StateModel adaptive_state_probs(const ScenarioConfig& cfg, const SensingPerformance& perf) {
    cfg.validate();
    perf.validate();
    StateModel sm;
    sm.p = {cfg.rho * perf.p_d, 0.0, 0.0, cfg.rho * (1.0 - perf.p_d), (1.0 - cfg.rho) * perf.p_f,
            0.0, (1.0 - cfg.rho) * (1.0 - perf.p_f), 0.0};
    return sm;
}

MgfDiag fixed_rate_mgf(const StateModel& sm, double theta) {
    if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
    MgfDiag d;
    for (int k = 0; k < kStateCount; ++k) d.phi[k] = std::exp(-theta * sm.service_bits[k]);
    return d;
}

double spectral_radius_rank1(const StateModel& sm, const MgfDiag& phi) {
    return std::inner_product(sm.p.begin(), sm.p.end(), phi.phi.begin(), 0.0);
}

}  // namespace crcap
