#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "crcap/channel_model.hpp"
#include "crcap/effcap.hpp"
#include "crcap/sensing.hpp"

namespace crcap {

/// What the transmitter does in each frame.
struct TransmissionPlan {
    Scheme scheme = Scheme::FixedRateFixedPower;
    double r1_bps = 0.0;  // fixed-rate scheme
    double r2_bps = 0.0;
    std::optional<PowerPolicy> busy_policy;  // variable-power scheme
    std::optional<PowerPolicy> idle_policy;

    /// Plan that realizes an analytic result (rates or cutoffs it reports).
    static TransmissionPlan from_result(const ScenarioConfig& cfg, const EffCapResult& res);
};

enum class DetectionMode {
    Sampled,   // draw the decision from (P_f, P_d)
    Waveform,  // synthesize NB complex samples and run the energy detector
};

struct DetectionSource {
    DetectionMode mode = DetectionMode::Sampled;
    SensingPerformance perf;  // lambda is the threshold in waveform mode
};

struct FrameSample {
    bool busy = false;
    bool detected_busy = false;
    double z = 0.0;
    int state = 0;  // 1..8
    double service_bits = 0.0;
    double weight = 1.0;  // likelihood ratio f(z)/q(z); 1 without a proposal
};

/// Importance-sampling proposal. Rayleigh fading power is drawn from
///   q(z) = (1 - mix) f(z) + mix * log-uniform(z; e^{log_lo}, e^{log_hi}),
/// and a sampled detection decision with probability p is taken with
/// (1 - decision_mix) p + decision_mix / 2. The defensive components bound
/// every weight. At large a the MGF is dominated by deep fades and missed
/// detections, which plain sampling almost never visits.
struct SamplingProposal {
    double log_lo = 0.0;
    double log_hi = 0.0;
    double mix = 0.5;
    double decision_mix = 0.1;

    void validate() const;
    /// Range reaching three decades below the plan's deepest relevant fade.
    static SamplingProposal for_plan(const ScenarioConfig& cfg, const TransmissionPlan& plan);
};

/// Frames are generated in fixed blocks, each with its own seed-derived
/// stream, so results do not depend on the worker count.
inline constexpr std::int64_t kFramesPerBlock = 1 << 16;

std::vector<FrameSample> simulate_service(const ScenarioConfig& cfg, const DetectionSource& det,
                                          const TransmissionPlan& plan, std::int64_t n_frames,
                                          std::uint64_t seed, int workers = 0);

/// Frames with z drawn from the proposal. Only Rayleigh fading is supported.
std::vector<FrameSample> simulate_service_weighted(const ScenarioConfig& cfg, const DetectionSource& det,
                                                   const TransmissionPlan& plan, const SamplingProposal& proposal,
                                                   std::int64_t n_frames, std::uint64_t seed, int workers = 0);

/// Same stream as simulate_service, keeping only the service bits.
std::vector<double> simulate_service_bits(const ScenarioConfig& cfg, const DetectionSource& det,
                                          const TransmissionPlan& plan, std::int64_t n_frames,
                                          std::uint64_t seed, int workers = 0);

/// Energy-detector statistic Y = (1/NB) sum |y_i|^2 over one sensing window.
/// Exposed for detector validation.
class WaveformDetector {
public:
    explicit WaveformDetector(const SensingConfig& cfg);
    double statistic(std::mt19937_64& rng, bool busy) const;

private:
    std::int64_t samples_;
    double noise_var_;
    double busy_var_;
};

struct EffCapEstimate {
    double r_e = 0.0;         // bits/s/Hz
    double ci_low = 0.0;      // 95% jackknife interval
    double ci_high = 0.0;
    double mgf_hat = 0.0;     // mean of e^{-theta s}
    double mgf_std_error = 0.0;
    double mean_service = 0.0;  // bits/frame
};

inline constexpr std::size_t kMinEffCapSamples = 10'000;

/// -(1/(theta T B)) ln(mean e^{-theta s}) over i.i.d. frames.
EffCapEstimate empirical_effcap(std::span<const double> service_bits, double theta,
                                double frame_s, double bandwidth_hz);
/// Same with per-frame likelihood-ratio weights (mean of w e^{-theta s}).
EffCapEstimate empirical_effcap(std::span<const double> service_bits, std::span<const double> weights,
                                double theta, double frame_s, double bandwidth_hz);
/// Uses the sample weights.
EffCapEstimate empirical_effcap(std::span<const FrameSample> samples, const ScenarioConfig& cfg);

struct QueueStats {
    std::vector<double> samples;  // Q after each frame, bits
    double tail_exponent_hat = 0.0;  // NaN when the tail cannot be fitted
    int tail_points = 0;
    double mean_service = 0.0;  // bits/frame
    double mgf_hat = 0.0;       // filled when a theta is supplied
    double q99 = 0.0;
    bool unstable = false;
};

/// Minimum exceedance count for a q-bin to enter the tail fit.
inline constexpr std::int64_t kMinTailExceedances = 50;

/// Lindley recursion Q_{k+1} = max(Q_k + a T - s_k, 0) from Q_0 = 0, with a
/// least-squares fit of ln P(Q >= q) over q between the 50th and 99.9th percentiles.
QueueStats simulate_queue(double arrival_bps, std::span<const double> service_bits, double frame_s,
                          double theta = 0.0);

/// c e^{-theta a d_max / 2}.
double delay_violation_bound(double theta, double arrival_bps, double d_max_s, double c = 1.0);

/// FIFO waiting time of the bit that arrives at the end of each frame, with
/// service flowing uniformly within a frame. Bits still queued at the end of
/// the trace get +inf.
std::vector<double> fifo_delays(std::span<const double> queue_after, std::span<const double> service_bits,
                                double frame_s);

/// CSV columns: frame_index,busy,detected_busy,z,state,service_bits,queue_bits.
void write_trace_csv(std::ostream& os, std::span<const FrameSample> samples,
                     std::span<const double> queue_bits);

}  // namespace crcap
