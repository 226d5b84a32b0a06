#include "crcap/queue_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "crcap/csv.hpp"
#include "crcap/parallel.hpp"

namespace crcap {

TransmissionPlan TransmissionPlan::from_result(const ScenarioConfig& cfg, const EffCapResult& res) {
    TransmissionPlan plan;
    plan.scheme = res.scheme;
    switch (res.scheme) {
        case Scheme::FixedRateFixedPower:
            if (!res.r1_opt || !res.r2_opt) throw ConfigError("fixed-rate result carries no rates");
            plan.r1_bps = *res.r1_opt;
            plan.r2_bps = *res.r2_opt;
            break;
        case Scheme::VarRateFixedPower:
            break;
        case Scheme::VarRateVarPower: {
            if (!res.gamma1 || !res.gamma2) throw ConfigError("variable-power result carries no cutoffs");
            const SnrQuad snr = derive_snrs(cfg);
            const double a = rate_exponent(cfg);
            plan.busy_policy = PowerPolicy::from_gamma(*res.gamma1, a, snr.snr1);
            plan.idle_policy = PowerPolicy::from_gamma(*res.gamma2, a, snr.snr4);
            break;
        }
    }
    return plan;
}

void SamplingProposal::validate() const {
    if (!std::isfinite(log_lo) || !std::isfinite(log_hi) || !(log_hi > log_lo)) {
        throw ConfigError("proposal range must satisfy lo < hi");
    }
    if (!(mix > 0.0 && mix < 1.0)) throw ConfigError("proposal mix must lie in (0, 1)");
    if (!(decision_mix >= 0.0 && decision_mix < 1.0)) throw ConfigError("decision mix must lie in [0, 1)");
}

SamplingProposal SamplingProposal::for_plan(const ScenarioConfig& cfg, const TransmissionPlan& plan) {
    const double sigma2 = cfg.fading.mean_power();
    const SnrQuad snr = derive_snrs(cfg);
    double log_deep = std::log(sigma2) - 6.0 * std::numbers::ln10;
    switch (plan.scheme) {
        case Scheme::FixedRateFixedPower: {
            const OutageThresholds al = outage_thresholds(snr, plan.r1_bps, plan.r2_bps, cfg.bandwidth_hz);
            double lowest = sigma2;
            for (double v : {al.alpha1, al.alpha2, al.alpha3, al.alpha4}) {
                if (v > 0.0) lowest = std::min(lowest, v);
            }
            log_deep = std::log(lowest);
            break;
        }
        case Scheme::VarRateFixedPower:
            log_deep = std::log(sigma2) - std::log1p(rate_exponent(cfg) * std::max(snr.snr1, snr.snr4) * sigma2);
            break;
        case Scheme::VarRateVarPower:
            if (!plan.busy_policy || !plan.idle_policy) throw ConfigError("variable-power plan needs both policies");
            log_deep = std::min(plan.busy_policy->log_gamma, plan.idle_policy->log_gamma);
            break;
    }
    SamplingProposal p;
    p.log_lo = std::min(log_deep, std::log(sigma2)) - 3.0 * std::numbers::ln10;
    p.log_hi = std::log(sigma2);
    return p;
}

namespace {

// Uniform on [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

struct FadingDraw {
    double z = 0.0;
    double log_z = 0.0;
    double weight = 1.0;
};

FadingDraw sample_fading(const FadingModel& fd, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    FadingDraw d;
    switch (fd.kind()) {
        case FadingModel::Kind::RayleighPower: d.z = -fd.mean_power() * std::log1p(-u); break;
        case FadingModel::Kind::Degenerate: d.z = fd.mean_power(); break;
        case FadingModel::Kind::TabulatedCdf: d.z = fd.quantile(u); break;
    }
    d.log_z = std::log(d.z);
    return d;
}

FadingDraw sample_fading(const FadingModel& fd, const SamplingProposal& prop, std::mt19937_64& rng) {
    const double pick = uniform01(rng);
    const double u = uniform01(rng);
    const double sigma2 = fd.mean_power();
    FadingDraw d;
    if (pick < prop.mix) {
        d.log_z = prop.log_lo + u * (prop.log_hi - prop.log_lo);
        d.z = std::exp(d.log_z);
    } else {
        d.z = -sigma2 * std::log1p(-u);
        d.log_z = std::log(d.z);
    }
    // w = f / q = 1 / ((1 - mix) + mix g / f), with g / f evaluated in logs.
    const double span = prop.log_hi - prop.log_lo;
    double ratio = 0.0;
    if (d.log_z >= prop.log_lo && d.log_z <= prop.log_hi) {
        const double log_f = -std::log(sigma2) - d.z / sigma2;
        ratio = std::exp(std::log(prop.mix) - d.log_z - std::log(span) - log_f);
    }
    d.weight = 1.0 / ((1.0 - prop.mix) + ratio);
    return d;
}

class FrameGenerator {
public:
    FrameGenerator(const ScenarioConfig& cfg, const DetectionSource& det, const TransmissionPlan& plan,
                   const SamplingProposal* proposal)
        : cfg_(cfg), det_(det), plan_(plan), proposal_(proposal), snr_(derive_snrs(cfg)), detector_(cfg.sensing()) {
        if (proposal) {
            proposal->validate();
            if (cfg.fading.kind() != FadingModel::Kind::RayleighPower) {
                throw ConfigError("importance sampling needs Rayleigh fading");
            }
        }
        det.perf.validate();
        if (plan.scheme == Scheme::VarRateVarPower && (!plan.busy_policy || !plan.idle_policy)) {
            throw ConfigError("variable-power plan needs both policies");
        }
        if (plan.r1_bps < 0.0 || plan.r2_bps < 0.0) throw ConfigError("rates must be >= 0");
        const double bw = cfg.bandwidth_hz;
        alpha_ = outage_thresholds(snr_, plan.r1_bps, plan.r2_bps, bw);
        bits1_ = plan.r1_bps * cfg.transmit_s();
        bits2_ = plan.r2_bps * cfg.transmit_s();
    }

    FrameSample next(std::mt19937_64& rng) const {
        FrameSample f;
        double decision_weight = 1.0;
        f.busy = uniform01(rng) < cfg_.rho;
        if (det_.mode == DetectionMode::Sampled) {
            const double p = f.busy ? det_.perf.p_d : det_.perf.p_f;
            if (proposal_) {
                const double q = (1.0 - proposal_->decision_mix) * p + 0.5 * proposal_->decision_mix;
                f.detected_busy = uniform01(rng) < q;
                decision_weight = f.detected_busy ? p / q : (1.0 - p) / (1.0 - q);
            } else {
                f.detected_busy = uniform01(rng) < p;
            }
        } else {
            f.detected_busy = detector_.statistic(rng, f.busy) > det_.perf.lambda;
        }
        const FadingDraw d = proposal_ ? sample_fading(cfg_.fading, *proposal_, rng) : sample_fading(cfg_.fading, rng);
        f.z = d.z;
        f.weight = d.weight * decision_weight;
        if (plan_.scheme == Scheme::FixedRateFixedPower) {
            assign_fixed(f);
        } else {
            assign_adaptive(f, d.log_z);
        }
        return f;
    }

private:
    void assign_fixed(FrameSample& f) const {
        double alpha, bits;
        int on_state;
        if (f.busy) {
            on_state = f.detected_busy ? 1 : 3;
            alpha = f.detected_busy ? alpha_.alpha1 : alpha_.alpha2;
        } else {
            on_state = f.detected_busy ? 5 : 7;
            alpha = f.detected_busy ? alpha_.alpha3 : alpha_.alpha4;
        }
        bits = f.detected_busy ? bits1_ : bits2_;
        const bool on = f.z > alpha;
        f.state = on ? on_state : on_state + 1;
        f.service_bits = on ? bits : 0.0;
    }

    // Nats per channel use for the adaptive schemes.
    double adaptive_nats(double z, double log_z, bool busy_branch) const {
        const double snr = busy_branch ? snr_.snr1 : snr_.snr4;
        if (plan_.scheme == Scheme::VarRateFixedPower) return std::log1p(z * snr);
        const PowerPolicy& pol = busy_branch ? *plan_.busy_policy : *plan_.idle_policy;
        const double u = log_z - pol.log_gamma;
        return u > 0.0 ? u / (pol.a + 1.0) : 0.0;
    }

    void assign_adaptive(FrameSample& f, double log_z) const {
        const double to_bits = cfg_.bandwidth_hz * cfg_.transmit_s() / std::numbers::ln2;
        if (f.detected_busy) {
            f.state = f.busy ? 1 : 5;
            f.service_bits = adaptive_nats(f.z, log_z, true) * to_bits;
        } else if (f.busy) {
            // Rate matched to SNR4 exceeds the interference-limited capacity.
            f.state = 4;
            f.service_bits = 0.0;
        } else {
            f.state = 7;
            f.service_bits = adaptive_nats(f.z, log_z, false) * to_bits;
        }
    }

    const ScenarioConfig& cfg_;
    const DetectionSource& det_;
    const TransmissionPlan& plan_;
    const SamplingProposal* proposal_;
    SnrQuad snr_;
    WaveformDetector detector_;
    OutageThresholds alpha_;
    double bits1_ = 0.0;
    double bits2_ = 0.0;
};

template <class Sink>
void generate(const ScenarioConfig& cfg, const DetectionSource& det, const TransmissionPlan& plan,
              const SamplingProposal* proposal, std::int64_t n_frames, std::uint64_t seed, int workers,
              Sink&& sink) {
    cfg.validate();
    if (n_frames < 1) throw ConfigError("simulation needs at least one frame");
    const FrameGenerator gen(cfg, det, plan, proposal);
    const auto blocks = static_cast<std::size_t>((n_frames + kFramesPerBlock - 1) / kFramesPerBlock);
    parallel_for(
        blocks,
        [&](std::size_t b) {
            std::mt19937_64 rng = block_engine(seed, b);
            const std::int64_t first = static_cast<std::int64_t>(b) * kFramesPerBlock;
            const std::int64_t last = std::min(n_frames, first + kFramesPerBlock);
            for (std::int64_t k = first; k < last; ++k) sink(static_cast<std::size_t>(k), gen.next(rng));
        },
        workers);
}

}  // namespace

WaveformDetector::WaveformDetector(const SensingConfig& cfg)
    : samples_(cfg.sample_count()), noise_var_(cfg.noise_var), busy_var_(cfg.noise_var + cfg.primary_var) {
    cfg.validate();
}

double WaveformDetector::statistic(std::mt19937_64& rng, bool busy) const {
    // y_i ~ CN(0, var): real and imaginary parts N(0, var/2) via Box-Muller.
    const double var = busy ? busy_var_ : noise_var_;
    double energy = 0.0;
    for (std::int64_t i = 0; i < samples_; ++i) {
        const double u1 = 1.0 - uniform01(rng);
        const double u2 = uniform01(rng);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double re = radius * std::cos(2.0 * std::numbers::pi * u2);
        const double im = radius * std::sin(2.0 * std::numbers::pi * u2);
        energy += 0.5 * var * (re * re + im * im);
    }
    return energy / static_cast<double>(samples_);
}

std::vector<FrameSample> simulate_service(const ScenarioConfig& cfg, const DetectionSource& det,
                                          const TransmissionPlan& plan, std::int64_t n_frames,
                                          std::uint64_t seed, int workers) {
    std::vector<FrameSample> out(static_cast<std::size_t>(std::max<std::int64_t>(n_frames, 0)));
    generate(cfg, det, plan, nullptr, n_frames, seed, workers,
             [&](std::size_t k, const FrameSample& f) { out[k] = f; });
    return out;
}

std::vector<FrameSample> simulate_service_weighted(const ScenarioConfig& cfg, const DetectionSource& det,
                                                   const TransmissionPlan& plan, const SamplingProposal& proposal,
                                                   std::int64_t n_frames, std::uint64_t seed, int workers) {
    std::vector<FrameSample> out(static_cast<std::size_t>(std::max<std::int64_t>(n_frames, 0)));
    generate(cfg, det, plan, &proposal, n_frames, seed, workers,
             [&](std::size_t k, const FrameSample& f) { out[k] = f; });
    return out;
}

std::vector<double> simulate_service_bits(const ScenarioConfig& cfg, const DetectionSource& det,
                                          const TransmissionPlan& plan, std::int64_t n_frames,
                                          std::uint64_t seed, int workers) {
    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(n_frames, 0)));
    generate(cfg, det, plan, nullptr, n_frames, seed, workers,
             [&](std::size_t k, const FrameSample& f) { out[k] = f.service_bits; });
    return out;
}

namespace {

EffCapEstimate effcap_estimate(std::span<const double> bits, const double* weights, double theta, double frame_s,
                               double bandwidth_hz) {
    if (bits.size() < kMinEffCapSamples) {
        throw ConfigError("empirical effective capacity needs at least 1e4 samples");
    }
    if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
    const std::size_t count = bits.size();
    const double n = static_cast<double>(count);
    const double scale = 1.0 / (theta * frame_s * bandwidth_hz);
    auto log_term = [&](std::size_t k) {
        const double lw = weights ? std::log(weights[k]) : 0.0;
        return lw - theta * bits[k];
    };

    // Log-sum-exp over x_k = ln w_k - theta s_k.
    double top = -std::numeric_limits<double>::infinity();
    double mean_s = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        top = std::max(top, log_term(k));
        mean_s += weights ? weights[k] * bits[k] : bits[k];
    }
    if (!std::isfinite(top)) throw NumericError("all frames carry zero weight");
    std::vector<double> e(count);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        e[k] = std::exp(log_term(k) - top);
        sum += e[k];
        sum_sq += e[k] * e[k];
    }

    EffCapEstimate est;
    est.mean_service = mean_s / n;
    const double log_mean = top + std::log(sum / n);
    est.r_e = -log_mean * scale;
    est.mgf_hat = std::exp(log_mean);
    const double var_e = std::max(0.0, sum_sq / n - (sum / n) * (sum / n)) * n / (n - 1.0);
    est.mgf_std_error = std::exp(top) * std::sqrt(var_e / n);

    // Delete-one jackknife.
    std::vector<double> loo(count);
    double jk_mean = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double rest = std::max(sum - e[k], std::numeric_limits<double>::min());
        loo[k] = -(top + std::log(rest / (n - 1.0))) * scale;
        jk_mean += loo[k];
    }
    jk_mean /= n;
    double jk_var = 0.0;
    for (double v : loo) jk_var += (v - jk_mean) * (v - jk_mean);
    jk_var *= (n - 1.0) / n;
    const double half = 1.96 * std::sqrt(jk_var);
    est.ci_low = est.r_e - half;
    est.ci_high = est.r_e + half;
    return est;
}

}  // namespace

EffCapEstimate empirical_effcap(std::span<const double> service_bits, double theta, double frame_s,
                                double bandwidth_hz) {
    return effcap_estimate(service_bits, nullptr, theta, frame_s, bandwidth_hz);
}

EffCapEstimate empirical_effcap(std::span<const double> service_bits, std::span<const double> weights,
                                double theta, double frame_s, double bandwidth_hz) {
    if (weights.size() != service_bits.size()) throw ConfigError("weights and service differ in length");
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
    }
    return effcap_estimate(service_bits, weights.data(), theta, frame_s, bandwidth_hz);
}

EffCapEstimate empirical_effcap(std::span<const FrameSample> samples, const ScenarioConfig& cfg) {
    std::vector<double> bits(samples.size()), weights(samples.size());
    bool weighted = false;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        bits[k] = samples[k].service_bits;
        weights[k] = samples[k].weight;
        weighted = weighted || samples[k].weight != 1.0;
    }
    if (!weighted) return empirical_effcap(bits, cfg.theta, cfg.frame_s, cfg.bandwidth_hz);
    return empirical_effcap(bits, weights, cfg.theta, cfg.frame_s, cfg.bandwidth_hz);
}

namespace {

double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

QueueStats simulate_queue(double arrival_bps, std::span<const double> service_bits, double frame_s,
                          double theta) {
    if (!(arrival_bps >= 0.0) || !std::isfinite(arrival_bps)) throw ConfigError("arrival rate must be >= 0");
    if (!(frame_s > 0.0)) throw ConfigError("frame duration must be > 0");
    QueueStats qs;
    qs.tail_exponent_hat = std::numeric_limits<double>::quiet_NaN();
    if (service_bits.empty()) return qs;

    const double arrival_bits = arrival_bps * frame_s;
    qs.samples.resize(service_bits.size());
    double q = 0.0, total = 0.0, mgf = 0.0;
    for (std::size_t k = 0; k < service_bits.size(); ++k) {
        q = std::max(q + arrival_bits - service_bits[k], 0.0);
        qs.samples[k] = q;
        total += service_bits[k];
        if (theta > 0.0) mgf += std::exp(-theta * service_bits[k]);
    }
    const double n = static_cast<double>(service_bits.size());
    qs.mean_service = total / n;
    if (theta > 0.0) qs.mgf_hat = mgf / n;
    qs.unstable = arrival_bits >= qs.mean_service;

    std::vector<double> sorted = qs.samples;
    std::sort(sorted.begin(), sorted.end());
    qs.q99 = percentile_sorted(sorted, 0.99);
    const double q_lo = percentile_sorted(sorted, 0.50);
    const double q_hi = percentile_sorted(sorted, 0.999);
    if (!(q_hi > q_lo)) return qs;

    constexpr int grid = 100;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (int k = 0; k < grid; ++k) {
        const double level = q_lo + (q_hi - q_lo) * k / (grid - 1);
        const auto exceed = static_cast<std::int64_t>(
            sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), level));
        if (exceed < kMinTailExceedances) continue;
        const double y = std::log(static_cast<double>(exceed) / n);
        sx += level;
        sy += y;
        sxx += level * level;
        sxy += level * y;
        ++used;
    }
    qs.tail_points = used;
    if (used >= 2) {
        const double denom = used * sxx - sx * sx;
        if (denom > 0.0) qs.tail_exponent_hat = -(used * sxy - sx * sy) / denom;
    }
    return qs;
}

double delay_violation_bound(double theta, double arrival_bps, double d_max_s, double c) {
    if (!(theta > 0.0) || !(arrival_bps > 0.0) || !(c > 0.0) || !(d_max_s >= 0.0)) {
        throw ConfigError("delay bound needs theta, arrival rate, c > 0 and d_max >= 0");
    }
    return c * std::exp(-theta * arrival_bps * d_max_s / 2.0);
}

std::vector<double> fifo_delays(std::span<const double> queue_after, std::span<const double> service_bits,
                                double frame_s) {
    if (queue_after.size() != service_bits.size()) throw ConfigError("queue and service traces differ in length");
    const std::size_t n = service_bits.size();
    // prefix[j] = service delivered in frames [0, j).
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + service_bits[j];
    std::vector<double> delay(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double backlog = queue_after[k];
        if (backlog <= 0.0) continue;
        // First frame m > k by whose end the backlog has been served.
        const double target = prefix[k + 1] + backlog;
        const auto it = std::lower_bound(prefix.begin() + static_cast<std::ptrdiff_t>(k) + 2, prefix.end(), target);
        if (it == prefix.end()) {
            delay[k] = std::numeric_limits<double>::infinity();
            continue;
        }
        const auto end_idx = static_cast<std::size_t>(it - prefix.begin());  // frame m = end_idx - 1
        const std::size_t m = end_idx - 1;
        const double before = prefix[m] - prefix[k + 1];
        const double frac = (backlog - before) / service_bits[m];
        delay[k] = (static_cast<double>(m - k - 1) + frac) * frame_s;
    }
    return delay;
}

void write_trace_csv(std::ostream& os, std::span<const FrameSample> samples, std::span<const double> queue_bits) {
    if (!queue_bits.empty() && queue_bits.size() != samples.size()) {
        throw ConfigError("queue trace length differs from frame trace");
    }
    os << "frame_index,busy,detected_busy,z,state,service_bits,queue_bits\n";
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const FrameSample& f = samples[k];
        os << k << ',' << (f.busy ? 1 : 0) << ',' << (f.detected_busy ? 1 : 0) << ',' << format_number(f.z)
           << ',' << f.state << ',' << format_number(f.service_bits) << ','
           << (queue_bits.empty() ? std::string("0") : format_number(queue_bits[k])) << '\n';
    }
}

}  // namespace crcap
