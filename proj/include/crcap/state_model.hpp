#pragma once

#include <array>

#include "crcap/channel_model.hpp"
#include "crcap/sensing.hpp"

namespace crcap {

inline constexpr int kStateCount = 8;

/// Per-frame link states, numbered as in the usual eight-state diagram:
///   1 busy, detected busy, ON     2 busy, detected busy, OFF
///   3 busy, detected idle, ON     4 busy, detected idle, OFF
///   5 idle, detected busy, ON     6 idle, detected busy, OFF
///   7 idle, detected idle, ON     8 idle, detected idle, OFF
/// Array slot k holds state k + 1.
/// The adaptive-rate schemes use states 1, 4, 5 and 7 only.
inline constexpr bool is_on_state(int state) { return state % 2 == 1; }

struct StateModel {
    /// Probability of entering each state; every row of the transition matrix is this vector.
    std::array<double, kStateCount> p{};
    /// Bits delivered in each state (fixed-rate scheme); zero in OFF states.
    std::array<double, kStateCount> service_bits{};

    void validate() const;
    using Matrix = std::array<std::array<double, kStateCount>, kStateCount>;
    /// The full 8x8 transition matrix with identical rows.
    Matrix transition_matrix() const;
};

/// Discounted moment generating values E{e^{-theta * service}} per state.
struct MgfDiag {
    std::array<double, kStateCount> phi{};

    void validate() const;
};

/// Fixed-rate chain for rates r1 (detected busy) and r2 (detected idle), in bits/s.
StateModel transition_probs(const ScenarioConfig& cfg, const SensingPerformance& perf,
                            double r1_bps, double r2_bps);

/// Adaptive-rate chain: p1 = rho P_d, p4 = rho (1 - P_d), p5 = (1 - rho) P_f,
/// p7 = (1 - rho)(1 - P_f). Service is random in this model, so service_bits is zero.
StateModel adaptive_state_probs(const ScenarioConfig& cfg, const SensingPerformance& perf);

/// e^{-theta * service_bits} for each state of a fixed-rate chain.
MgfDiag fixed_rate_mgf(const StateModel& sm, double theta);

/// Spectral radius of phi * R. R has identical rows, so phi R has rank one and
/// its only nonzero eigenvalue is its trace, sum_i phi_i p_i.
double spectral_radius_rank1(const StateModel& sm, const MgfDiag& phi);

}  // namespace crcap
