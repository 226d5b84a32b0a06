#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crcap/csv.hpp"
#include "crcap/queue_sim.hpp"
#include "crcap/state_model.hpp"

using namespace crcap;

namespace {

ScenarioConfig fig2(double theta = 0.01, double rho = 0.1, double b = 1e5) {
    return ScenarioConfig::from_snr_db(0.1, 0.0025, b, theta, rho, 0.0, 10.0, 1.0);
}

TransmissionPlan fixed_plan(double r1, double r2) {
    TransmissionPlan p;
    p.r1_bps = r1;
    p.r2_bps = r2;
    return p;
}

bool within_binomial(std::int64_t hits, std::int64_t n, double p) {
    const double f = static_cast<double>(hits) / n;
    return std::abs(f - p) <= 3.0 * std::sqrt(p * (1 - p) / n) + 0.5 / n;
}

}  // namespace

TEST_CASE("rho = 0 never produces a busy frame") {
    const ScenarioConfig c = fig2(0.01, 0.0);
    const auto f = simulate_service(c, {DetectionMode::Sampled, {1.0, 0.1, 0.9}}, fixed_plan(5000, 7000), 50000, 3);
    for (const FrameSample& s : f) CHECK_FALSE(s.busy);
}

TEST_CASE("no outage with a deterministic channel below capacity") {
    ScenarioConfig c = fig2(0.01, 0.4);
    c.fading = FadingModel::degenerate(1.0);
    const SnrQuad s = derive_snrs(c);
    // Below the smallest capacity each rate meets.
    const double r1 = 0.9 * c.bandwidth_hz * std::log2(1 + std::min(s.snr1, s.snr3));
    const double r2 = 0.9 * c.bandwidth_hz * std::log2(1 + std::min(s.snr2, s.snr4));
    const auto f = simulate_service(c, {DetectionMode::Sampled, {1.0, 0.2, 0.7}}, fixed_plan(r1, r2), 50000, 4);
    for (const FrameSample& x : f) {
        CHECK(is_on_state(x.state));
        const bool ok = x.service_bits == r1 * c.transmit_s() || x.service_bits == r2 * c.transmit_s();
        CHECK(ok);
    }
}

TEST_CASE("state frequencies follow the transition probabilities") {
    const ScenarioConfig c = fig2(0.01, 0.3);
    const SensingPerformance perf{1.2, 0.15, 0.85};
    const double r1 = 4000, r2 = 12000;
    const StateModel sm = transition_probs(c, perf, r1, r2);
    const auto f = simulate_service(c, {DetectionMode::Sampled, perf}, fixed_plan(r1, r2), 1000000, 12);
    std::int64_t counts[8] = {};
    for (const FrameSample& x : f) {
        ++counts[x.state - 1];
        const bool consistent = (x.state <= 4) == x.busy && ((x.state - 1) / 2 % 2 == 0) == x.detected_busy;
        CHECK(consistent);
        if (!is_on_state(x.state)) CHECK(x.service_bits == 0.0);
    }
    for (int k = 0; k < 8; ++k) {
        CAPTURE(k + 1);
        CHECK(within_binomial(counts[k], 1000000, sm.p[std::size_t(k)]));
    }
}

TEST_CASE("adaptive schemes use states 1, 4, 5, 7") {
    const ScenarioConfig c = fig2(0.01, 0.3);
    const SensingPerformance perf{1.2, 0.15, 0.85};
    const StateModel sm = adaptive_state_probs(c, perf);
    for (Scheme sc : {Scheme::VarRateFixedPower, Scheme::VarRateVarPower}) {
        const TransmissionPlan plan = TransmissionPlan::from_result(c, evaluate_scheme(c, perf, sc));
        const auto f = simulate_service(c, {DetectionMode::Sampled, perf}, plan, 400000, 21);
        std::int64_t counts[8] = {};
        for (const FrameSample& x : f) {
            ++counts[x.state - 1];
            if (!is_on_state(x.state)) CHECK(x.service_bits == 0.0);
            CHECK(x.service_bits >= 0.0);
        }
        for (int k = 0; k < 8; ++k) CHECK(within_binomial(counts[k], 400000, sm.p[std::size_t(k)]));
    }
}

TEST_CASE("seeded runs are bit-identical and independent of the worker count") {
    const ScenarioConfig c = fig2();
    const DetectionSource det{DetectionMode::Sampled, {1.3, 0.01, 0.99}};
    const TransmissionPlan plan = fixed_plan(5000, 7000);
    const auto a = simulate_service(c, det, plan, 200000, 77, 1);
    const auto b = simulate_service(c, det, plan, 200000, 77, 3);
    const auto d = simulate_service(c, det, plan, 200000, 78, 1);
    REQUIRE(a.size() == b.size());
    bool same = true, differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        same = same && a[k].z == b[k].z && a[k].service_bits == b[k].service_bits && a[k].state == b[k].state;
        differs = differs || a[k].z != d[k].z;
    }
    CHECK(same);
    CHECK(differs);
    const auto bits = simulate_service_bits(c, det, plan, 200000, 77, 2);
    for (std::size_t k = 0; k < a.size(); k += 997) CHECK(bits[k] == a[k].service_bits);
}

TEST_CASE("empirical effective capacity") {
    const std::vector<double> constant(20000, 350.0);
    const EffCapEstimate e = empirical_effcap(constant, 0.01, 0.1, 1e3);
    CHECK(e.r_e == doctest::Approx(350.0 / (0.1 * 1e3)).epsilon(1e-12));
    CHECK(e.ci_low == doctest::Approx(e.r_e).epsilon(1e-12));
    CHECK(e.ci_high == doctest::Approx(e.r_e).epsilon(1e-12));
    CHECK_THROWS_AS(empirical_effcap(std::vector<double>(100, 1.0), 0.01, 0.1, 1e3), ConfigError);

    // theta -> 0: mean service / (T B) inside the interval.
    const ScenarioConfig c = fig2(1e-9);
    const auto bits = simulate_service_bits(c, {DetectionMode::Sampled, SensingPerformance::perfect()},
                                            fixed_plan(5000, 7000), 100000, 5);
    const EffCapEstimate z = empirical_effcap(bits, 1e-9, c.frame_s, c.bandwidth_hz);
    const double mean = z.mean_service / (c.frame_s * c.bandwidth_hz);
    CHECK(mean >= z.ci_low - 1e-9 * mean);
    CHECK(mean <= z.ci_high + 1e-9 * mean);
}

TEST_CASE("empirical MGF matches the analytic chain") {
    const ScenarioConfig c = fig2();
    const SensingPerformance perf{1.2, 0.02, 0.97};
    const EffCapResult r = optimize_fixed_rates(c, perf);
    const TransmissionPlan plan = TransmissionPlan::from_result(c, r);
    const auto f = simulate_service(c, {DetectionMode::Sampled, perf}, plan, 1000000, 8);
    const EffCapEstimate e = empirical_effcap(f, c);
    const double mgf = std::exp(r.log_mgf);
    CHECK(std::abs(e.mgf_hat - mgf) <= 3.0 * e.mgf_std_error);
    CHECK(std::abs(e.r_e / r.r_e - 1.0) < 0.01);
}

TEST_CASE("importance sampling keeps the estimate unbiased") {
    const ScenarioConfig c = fig2();
    const SensingPerformance perf = sensing_performance(c.sensing(), 1.4);
    for (Scheme sc : {Scheme::FixedRateFixedPower, Scheme::VarRateFixedPower, Scheme::VarRateVarPower}) {
        const EffCapResult r = evaluate_scheme(c, perf, sc);
        const TransmissionPlan plan = TransmissionPlan::from_result(c, r);
        const SamplingProposal prop = SamplingProposal::for_plan(c, plan);
        const auto f = simulate_service_weighted(c, {DetectionMode::Sampled, perf}, plan, prop, 300000, 31);
        double mean_w = 0.0;
        for (const FrameSample& x : f) {
            CHECK(x.weight <= 1.0 / ((1 - prop.mix) * (1 - prop.decision_mix)) + 1e-12);
            mean_w += x.weight;
        }
        mean_w /= f.size();
        CHECK(mean_w == doctest::Approx(1.0).epsilon(0.02));
        const EffCapEstimate e = empirical_effcap(f, c);
        CAPTURE(to_string(sc));
        CHECK(std::abs(std::log(e.mgf_hat) - r.log_mgf) <= 4.0 * e.mgf_std_error / e.mgf_hat);
    }
    ScenarioConfig deg = c;
    deg.fading = FadingModel::degenerate(1.0);
    CHECK_THROWS_AS(simulate_service_weighted(deg, {}, fixed_plan(1, 1), {-5.0, 0.0}, 100, 1), ConfigError);
}

TEST_CASE("waveform detection reproduces the chi-square rates end to end") {
    // NB = 10.
    ScenarioConfig c = ScenarioConfig::from_snr_db(0.1, 1e-4, 1e5, 0.01, 0.5, 0.0, 10.0, 1.0);
    const SensingPerformance perf = sensing_performance(c.sensing(), 1.3);
    const auto f = simulate_service(c, {DetectionMode::Waveform, perf}, fixed_plan(5000, 7000), 100000, 9);
    std::int64_t busy = 0, hit = 0, idle = 0, fa = 0;
    for (const FrameSample& x : f) {
        if (x.busy) {
            ++busy;
            hit += x.detected_busy;
        } else {
            ++idle;
            fa += x.detected_busy;
        }
    }
    CHECK(within_binomial(hit, busy, perf.p_d));
    CHECK(within_binomial(fa, idle, perf.p_f));
}

TEST_CASE("queue recursion") {
    std::vector<double> s(1000, 10.0);
    const QueueStats empty = simulate_queue(0.0, s, 0.1);
    for (double q : empty.samples) CHECK(q == 0.0);
    CHECK(std::isnan(empty.tail_exponent_hat));

    // 12 bits in, 10 out each frame: Q_k = 2 k.
    const QueueStats grow = simulate_queue(120.0, s, 0.1);
    CHECK(grow.unstable);
    for (std::size_t k = 0; k < s.size(); k += 50) CHECK(grow.samples[k] == doctest::Approx(2.0 * (k + 1)));
    CHECK_THROWS_AS(simulate_queue(-1.0, s, 0.1), ConfigError);
}

TEST_CASE("stability threshold") {
    const ScenarioConfig c = fig2();
    const auto bits = simulate_service_bits(c, {DetectionMode::Sampled, SensingPerformance::perfect()},
                                            fixed_plan(5000, 7000), 400000, 14);
    double mean = 0.0;
    for (double b : bits) mean += b;
    mean /= bits.size();
    const QueueStats stable = simulate_queue(0.9 * mean / c.frame_s, bits, c.frame_s);
    const QueueStats over = simulate_queue(1.1 * mean / c.frame_s, bits, c.frame_s);
    CHECK_FALSE(stable.unstable);
    CHECK(over.unstable);
    // The stable queue's 99th percentile stays far below the overloaded one's.
    CHECK(stable.q99 < 0.01 * over.q99);
    CHECK(stable.q99 < 1000.0 * mean);
}

TEST_CASE("tail exponent of a narrowband link") {
    const ScenarioConfig c = fig2(0.01, 0.1, 1e3);
    const SensingPerformance perf = sensing_performance(c.sensing(), 1.4);
    const EffCapResult r = optimize_fixed_rates(c, perf);
    const auto bits = simulate_service_bits(c, {DetectionMode::Sampled, perf}, TransmissionPlan::from_result(c, r),
                                            2000000, 6);
    const QueueStats q = simulate_queue(r.r_e * c.bandwidth_hz, bits, c.frame_s, c.theta);
    CHECK(q.tail_points >= 10);
    CHECK(q.tail_exponent_hat >= 0.7 * c.theta);
    CHECK(q.tail_exponent_hat <= 1.5 * c.theta);
    CHECK(q.mgf_hat > 0.0);
    CHECK(q.mgf_hat <= 1.0);
}

TEST_CASE("delay bound") {
    CHECK(delay_violation_bound(0.01, 1e3, 0.0) == 1.0);
    CHECK(delay_violation_bound(0.01, 1e3, 0.0, 0.4) == 0.4);
    CHECK(delay_violation_bound(0.5, 4.0, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(delay_violation_bound(0.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("fifo delays against a bit-level replay") {
    // Integer bits: arrive 3 per frame; service pattern below.
    const std::vector<double> service = {0, 0, 5, 1, 0, 6, 2, 4, 0, 3, 9, 0};
    std::vector<double> queue;
    double q = 0.0;
    for (double s : service) {
        q = std::max(q + 3.0 - s, 0.0);
        queue.push_back(q);
    }
    const std::vector<double> d = fifo_delays(queue, service, 1.0);
    for (std::size_t k = 0; k < service.size(); ++k) {
        if (queue[k] == 0.0) {
            CHECK(d[k] == 0.0);
            continue;
        }
        // Bits after frame k finish once cumulative service from frame k+1 reaches queue[k].
        double served = 0.0, t = 0.0;
        bool done = false;
        for (std::size_t m = k + 1; m < service.size(); ++m) {
            if (served + service[m] >= queue[k] && service[m] > 0.0) {
                t = static_cast<double>(m - k - 1) + (queue[k] - served) / service[m];
                done = true;
                break;
            }
            served += service[m];
        }
        CAPTURE(k);
        if (done) {
            CHECK(d[k] == doctest::Approx(t));
        } else {
            CHECK(std::isinf(d[k]));
        }
    }
}

TEST_CASE("delay bound dominates the simulated violation frequency") {
    const ScenarioConfig c = fig2(0.01, 0.1, 1e3);
    const SensingPerformance perf = sensing_performance(c.sensing(), 1.4);
    const EffCapResult r = optimize_fixed_rates(c, perf);
    const auto bits = simulate_service_bits(c, {DetectionMode::Sampled, perf}, TransmissionPlan::from_result(c, r),
                                            500000, 2);
    const double arrival = r.r_e * c.bandwidth_hz;
    const QueueStats q = simulate_queue(arrival, bits, c.frame_s);
    const std::vector<double> d = fifo_delays(q.samples, bits, c.frame_s);
    for (double dmax : {0.5, 1.0, 2.0, 4.0}) {
        const double freq = std::count_if(d.begin(), d.end(), [&](double v) { return v >= dmax; }) / double(d.size());
        CAPTURE(dmax);
        CHECK(freq <= delay_violation_bound(c.theta, arrival, dmax));
    }
}

TEST_CASE("trace CSV round trip") {
    const ScenarioConfig c = fig2();
    const auto f = simulate_service(c, {DetectionMode::Sampled, {1.3, 0.1, 0.9}}, fixed_plan(5000, 7000), 500, 1);
    std::vector<double> bits;
    for (const FrameSample& x : f) bits.push_back(x.service_bits);
    const QueueStats q = simulate_queue(3e4, bits, c.frame_s);
    std::stringstream ss;
    write_trace_csv(ss, f, q.samples);
    const CsvTable t = read_csv(ss);
    REQUIRE(t.header == std::vector<std::string>{"frame_index", "busy", "detected_busy", "z", "state", "service_bits",
                                                 "queue_bits"});
    REQUIRE(t.rows.size() == f.size());
    for (std::size_t k = 0; k < f.size(); k += 37) {
        CHECK(std::stoll(t.rows[k][0]) == static_cast<long long>(k));
        CHECK(std::stoi(t.rows[k][4]) == f[k].state);
        CHECK(std::stod(t.rows[k][3]) == doctest::Approx(f[k].z).epsilon(1e-11));
        CHECK(std::stod(t.rows[k][6]) == doctest::Approx(q.samples[k]).epsilon(1e-11));
    }
}
