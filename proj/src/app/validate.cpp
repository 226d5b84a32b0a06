#include "crcap/app/validate.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "crcap/state_model.hpp"

namespace crcap::app {

json options_to_json(const ValidationOptions& o) {
    return {{"frames", o.frames},
            {"seed", o.seed},
            {"effcap_rel_tol", json_value(o.effcap_rel_tol)},
            {"waveform", o.waveform},
            {"importance", o.importance},
            {"check_tail", o.check_tail},
            {"tail_frames", o.tail_frames}};
}

ValidationOptions options_from_json(const json& doc) {
    ValidationOptions o;
    try {
        o.frames = doc.value("frames", o.frames);
        o.seed = doc.value("seed", o.seed);
        o.effcap_rel_tol = doc.value("effcap_rel_tol", o.effcap_rel_tol);
        o.waveform = doc.value("waveform", o.waveform);
        o.importance = doc.value("importance", o.importance);
        o.check_tail = doc.value("check_tail", o.check_tail);
        o.tail_frames = doc.value("tail_frames", o.tail_frames);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad validation options: ") + e.what());
    }
    return o;
}

json options_to_json(const SimulationOptions& o) {
    return {{"frames", o.frames},
            {"seed", o.seed},
            {"waveform", o.waveform},
            {"arrival_bps", std::isnan(o.arrival_bps) ? json(nullptr) : json_value(o.arrival_bps)},
            {"arrival_factor", json_value(o.arrival_factor)},
            {"delay_s", json_value(o.delay_s)},
            {"delay_c", json_value(o.delay_c)}};
}

SimulationOptions simulation_options_from_json(const json& doc) {
    SimulationOptions o;
    try {
        o.frames = doc.value("frames", o.frames);
        o.seed = doc.value("seed", o.seed);
        o.waveform = doc.value("waveform", o.waveform);
        if (doc.contains("arrival_bps") && !doc.at("arrival_bps").is_null()) {
            o.arrival_bps = doc.at("arrival_bps").get<double>();
        }
        o.arrival_factor = doc.value("arrival_factor", o.arrival_factor);
        o.delay_s = doc.value("delay_s", o.delay_s);
        o.delay_c = doc.value("delay_c", o.delay_c);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad simulation options: ") + e.what());
    }
    return o;
}

namespace {

struct Setup {
    ScenarioConfig cfg;
    SensingPerformance perf;
    DetectionSource det;
    EffCapResult analytic;
    TransmissionPlan plan;
};

Setup prepare(const ScenarioSpec& spec, Scheme scheme, bool waveform) {
    Setup s;
    s.cfg = spec.scenario();
    if (waveform) {
        if (spec.sensing_mode != SensingMode::Exact && spec.sensing_mode != SensingMode::Gaussian) {
            throw ConfigError("waveform detection needs a threshold (lambda)");
        }
        s.perf = sensing_performance(s.cfg.sensing(), spec.lambda);
    } else {
        s.perf = spec.performance(s.cfg);
    }
    s.det = {waveform ? DetectionMode::Waveform : DetectionMode::Sampled, s.perf};
    s.analytic = evaluate_scheme(s.cfg, s.perf, scheme);
    s.plan = TransmissionPlan::from_result(s.cfg, s.analytic);
    return s;
}

// |f - p| within three binomial standard deviations plus a continuity correction.
json binomial_check(const std::string& name, std::int64_t hits, std::int64_t n, double p) {
    json c;
    c["name"] = name;
    c["expected"] = json_value(p);
    c["trials"] = n;
    if (n == 0) {
        c["observed"] = nullptr;
        c["applicable"] = false;
        c["pass"] = true;
        return c;
    }
    const double f = static_cast<double>(hits) / static_cast<double>(n);
    const double bound = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) + 0.5 / static_cast<double>(n);
    c["observed"] = json_value(f);
    c["bound"] = json_value(bound);
    c["applicable"] = true;
    c["pass"] = std::abs(f - p) <= bound;
    return c;
}

json analytic_json(const EffCapResult& r) {
    return {{"r_e", json_value(r.r_e)},       {"log_mgf", json_value(r.log_mgf)}, {"r1_opt", json_value(r.r1_opt)},
            {"r2_opt", json_value(r.r2_opt)}, {"gamma1", json_value(r.gamma1)},   {"gamma2", json_value(r.gamma2)}};
}

}  // namespace

ValidationReport run_validation(const ScenarioSpec& spec, Scheme scheme, const ValidationOptions& opt) {
    if (opt.frames < static_cast<std::int64_t>(kMinEffCapSamples)) throw ConfigError("validation needs at least 1e4 frames");
    if (!(opt.effcap_rel_tol > 0.0)) throw ConfigError("tolerance must be > 0");
    const Setup s = prepare(spec, scheme, opt.waveform);
    const ScenarioConfig& cfg = s.cfg;

    const std::vector<FrameSample> plain = simulate_service(cfg, s.det, s.plan, opt.frames, opt.seed, opt.workers);

    json checks = json::array();
    bool pass = true;

    // Effective capacity and MGF.
    const bool use_is = opt.importance && cfg.fading.kind() == FadingModel::Kind::RayleighPower;
    EffCapEstimate est;
    if (use_is) {
        const SamplingProposal prop = SamplingProposal::for_plan(cfg, s.plan);
        const std::vector<FrameSample> weighted =
            simulate_service_weighted(cfg, s.det, s.plan, prop, opt.frames, opt.seed + 1, opt.workers);
        est = empirical_effcap(weighted, cfg);
    } else {
        est = empirical_effcap(plain, cfg);
    }
    {
        const double an = s.analytic.r_e;
        const double err = an != 0.0 ? std::abs(est.r_e - an) / an : std::abs(est.r_e);
        json c = {{"name", "effective_capacity"},
                  {"estimator", use_is ? "importance" : "plain"},
                  {"analytic", json_value(an)},
                  {"empirical", json_value(est.r_e)},
                  {"ci95", {json_value(est.ci_low), json_value(est.ci_high)}},
                  {"rel_error", json_value(err)},
                  {"tolerance", json_value(opt.effcap_rel_tol)},
                  {"pass", err <= opt.effcap_rel_tol}};
        pass = pass && c["pass"].get<bool>();
        checks.push_back(c);

        const double mgf = std::exp(s.analytic.log_mgf);
        const double bound = 3.0 * est.mgf_std_error + 1e-9 * mgf;
        json m = {{"name", "mgf"},
                  {"analytic", json_value(mgf)},
                  {"empirical", json_value(est.mgf_hat)},
                  {"std_error", json_value(est.mgf_std_error)},
                  {"bound", json_value(bound)},
                  {"pass", std::abs(est.mgf_hat - mgf) <= bound}};
        pass = pass && m["pass"].get<bool>();
        checks.push_back(m);
    }

    // State frequencies.
    {
        const StateModel sm = scheme == Scheme::FixedRateFixedPower
                                  ? transition_probs(cfg, s.perf, s.plan.r1_bps, s.plan.r2_bps)
                                  : adaptive_state_probs(cfg, s.perf);
        std::array<std::int64_t, kStateCount> counts{};
        for (const FrameSample& f : plain) ++counts[static_cast<std::size_t>(f.state - 1)];
        json states = json::array();
        bool ok = true;
        for (int k = 0; k < kStateCount; ++k) {
            json c = binomial_check("state" + std::to_string(k + 1), counts[static_cast<std::size_t>(k)], opt.frames,
                                    sm.p[static_cast<std::size_t>(k)]);
            ok = ok && c["pass"].get<bool>();
            states.push_back(c);
        }
        checks.push_back({{"name", "state_frequencies"}, {"states", states}, {"pass", ok}});
        pass = pass && ok;
    }

    // Detector rates.
    {
        std::int64_t idle = 0, fa = 0, busy = 0, hit = 0;
        for (const FrameSample& f : plain) {
            if (f.busy) {
                ++busy;
                hit += f.detected_busy ? 1 : 0;
            } else {
                ++idle;
                fa += f.detected_busy ? 1 : 0;
            }
        }
        json pf = binomial_check("false_alarm", fa, idle, s.perf.p_f);
        json pd = binomial_check("detection", hit, busy, s.perf.p_d);
        pass = pass && pf["pass"].get<bool>() && pd["pass"].get<bool>();
        checks.push_back(pf);
        checks.push_back(pd);
    }

    // Queue tail exponent at the analytic effective capacity.
    {
        const std::int64_t n_tail = opt.tail_frames > 0 ? opt.tail_frames : opt.frames;
        std::vector<double> bits;
        if (n_tail == opt.frames) {
            bits.resize(plain.size());
            std::transform(plain.begin(), plain.end(), bits.begin(), [](const FrameSample& f) { return f.service_bits; });
        } else {
            bits = simulate_service_bits(cfg, s.det, s.plan, n_tail, opt.seed + 2, opt.workers);
        }
        const double arrival = s.analytic.r_e * cfg.bandwidth_hz;
        const QueueStats qs = simulate_queue(arrival, bits, cfg.frame_s, cfg.theta);
        const bool fitted = std::isfinite(qs.tail_exponent_hat);
        const double lo = 0.7 * cfg.theta, hi = 1.5 * cfg.theta;
        const bool in_range = fitted && qs.tail_exponent_hat >= lo && qs.tail_exponent_hat <= hi;
        json c = {{"name", "queue_tail_exponent"},
                  {"frames", n_tail},
                  {"arrival_bps", json_value(arrival)},
                  {"theta", json_value(cfg.theta)},
                  {"theta_hat", fitted ? json_value(qs.tail_exponent_hat) : json(nullptr)},
                  {"range", {json_value(lo), json_value(hi)}},
                  {"tail_points", qs.tail_points},
                  {"q99_bits", json_value(qs.q99)},
                  {"gating", opt.check_tail},
                  {"pass", in_range}};
        if (!fitted) c["note"] = "queue tail too short to fit";
        if (opt.check_tail) pass = pass && in_range;
        checks.push_back(c);
    }

    json report;
    report["scheme"] = to_string(scheme);
    report["frames"] = opt.frames;
    report["seed"] = opt.seed;
    report["detection"] = opt.waveform ? "waveform" : "sampled";
    report["sensing"] = {{"lambda", json_value(s.perf.lambda)},
                         {"p_f", json_value(s.perf.p_f)},
                         {"p_d", json_value(s.perf.p_d)}};
    report["analytic"] = analytic_json(s.analytic);
    report["checks"] = checks;
    report["pass"] = pass;
    return {report, pass};
}

SimulationOutput run_simulation(const ScenarioSpec& spec, Scheme scheme, const SimulationOptions& opt) {
    if (opt.frames < 1) throw ConfigError("frames must be >= 1");
    const Setup s = prepare(spec, scheme, opt.waveform);
    const ScenarioConfig& cfg = s.cfg;
    SimulationOutput out;
    out.frames = simulate_service(cfg, s.det, s.plan, opt.frames, opt.seed, opt.workers);
    std::vector<double> bits(out.frames.size());
    std::transform(out.frames.begin(), out.frames.end(), bits.begin(),
                   [](const FrameSample& f) { return f.service_bits; });

    const double arrival =
        std::isnan(opt.arrival_bps) ? opt.arrival_factor * s.analytic.r_e * cfg.bandwidth_hz : opt.arrival_bps;
    QueueStats qs = simulate_queue(arrival, bits, cfg.frame_s, cfg.theta);
    out.queue = qs.samples;

    json sum;
    sum["scheme"] = to_string(scheme);
    sum["frames"] = opt.frames;
    sum["seed"] = opt.seed;
    sum["detection"] = opt.waveform ? "waveform" : "sampled";
    sum["analytic"] = analytic_json(s.analytic);
    if (bits.size() >= kMinEffCapSamples) {
        const EffCapEstimate est = empirical_effcap(bits, cfg.theta, cfg.frame_s, cfg.bandwidth_hz);
        sum["empirical"] = {{"r_e", json_value(est.r_e)},
                            {"ci95", {json_value(est.ci_low), json_value(est.ci_high)}},
                            {"mgf_hat", json_value(est.mgf_hat)},
                            {"mgf_std_error", json_value(est.mgf_std_error)}};
    } else {
        sum["empirical"] = nullptr;
    }
    sum["queue"] = {{"arrival_bps", json_value(arrival)},
                    {"mean_service_bits", json_value(qs.mean_service)},
                    {"mgf_hat", json_value(qs.mgf_hat)},
                    {"q99_bits", json_value(qs.q99)},
                    {"theta_hat", std::isfinite(qs.tail_exponent_hat) ? json_value(qs.tail_exponent_hat) : json(nullptr)},
                    {"tail_points", qs.tail_points},
                    {"unstable", qs.unstable}};
    if (opt.delay_s > 0.0 && arrival > 0.0) {
        const std::vector<double> d = fifo_delays(qs.samples, bits, cfg.frame_s);
        const auto late = std::count_if(d.begin(), d.end(), [&](double v) { return v >= opt.delay_s; });
        sum["delay"] = {{"d_max_s", json_value(opt.delay_s)},
                        {"c", json_value(opt.delay_c)},
                        {"bound", json_value(delay_violation_bound(cfg.theta, arrival, opt.delay_s, opt.delay_c))},
                        {"empirical", json_value(static_cast<double>(late) / static_cast<double>(d.size()))}};
    }
    out.summary = sum;
    return out;
}

}  // namespace crcap::app
