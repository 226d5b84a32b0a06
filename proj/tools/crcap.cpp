// crcap: effective capacity of cognitive-radio links under QoS constraints.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crcap/app/config_io.hpp"
#include "crcap/app/figures.hpp"
#include "crcap/app/manifest.hpp"
#include "crcap/app/sweep.hpp"
#include "crcap/app/validate.hpp"
#include "crcap/csv.hpp"

namespace fs = std::filesystem;
using namespace crcap;
using namespace crcap::app;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitValidation = 4;

struct ValidationFailed {};

void si_flag(CLI::App* app, const std::string& name, std::optional<double>& target, const std::string& desc) {
    app->add_option_function<std::string>(name, [&target](const std::string& s) { target = parse_si(s); }, desc);
}

void si_flag(CLI::App* app, const std::string& name, double& target, const std::string& desc) {
    app->add_option_function<std::string>(name, [&target](const std::string& s) { target = parse_si(s); }, desc)
        ->default_str(format_number(target));
}

template <class Int>
void count_flag(CLI::App* app, const std::string& name, Int& target, const std::string& desc) {
    app->add_option_function<std::string>(
           name,
           [&target, name](const std::string& s) {
               const double v = parse_si(s);
               if (v < 0 || v != std::floor(v) || v > 9.0e18) throw ConfigError(name + " must be a whole number");
               target = static_cast<Int>(v);
           },
           desc)
        ->default_str(std::to_string(target));
}

/// Scenario options shared by every subcommand; applied on top of --config.
struct ScenarioFlags {
    std::string config;
    std::optional<double> T, N, B, theta, rho, snr1, snr4, kappa, noise_var, lambda, lambda_rel;
    bool perfect = false;
    std::string scheme;

    void attach(CLI::App* app, bool with_scheme = true) {
        app->add_option("--config", config, "scenario JSON file");
        si_flag(app, "--T", T, "frame duration T (s)");
        si_flag(app, "--N", N, "sensing duration N (s)");
        si_flag(app, "--B", B, "bandwidth B (Hz)");
        si_flag(app, "--theta", theta, "QoS exponent (1/bit)");
        si_flag(app, "--rho", rho, "probability the channel is busy");
        si_flag(app, "--snr1-db", snr1, "SNR1 in dB (busy, detected busy)");
        si_flag(app, "--snr4-db", snr4, "SNR4 in dB (idle, detected idle)");
        si_flag(app, "--kappa", kappa, "primary_var / noise_var");
        si_flag(app, "--noise-var", noise_var, "noise variance");
        si_flag(app, "--lambda", lambda, "detection threshold (absolute power)");
        si_flag(app, "--lambda-rel", lambda_rel, "detection threshold divided by noise_var");
        app->add_flag("--perfect-sensing", perfect, "P_f = 0, P_d = 1");
        if (with_scheme) app->add_option("--scheme", scheme, "fixed | var-rate | var-power");
    }

    json document() const {
        json doc = json::object();
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw ConfigError("cannot open config '" + config + "'");
            try {
                doc = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config '" + config + "' is not valid JSON: " + e.what());
            }
            if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        }
        auto set = [&](const char* key, const std::optional<double>& v) {
            if (v) doc[key] = *v;
        };
        set("T_s", T);
        set("N_s", N);
        set("B_hz", B);
        set("theta", theta);
        set("rho", rho);
        set("snr1_db", snr1);
        set("snr4_db", snr4);
        set("kappa", kappa);
        set("noise_var", noise_var);
        if (lambda || lambda_rel || perfect) {
            for (const char* k : {"lambda", "lambda_rel", "perfect_sensing", "p_f", "p_d"}) doc.erase(k);
        }
        set("lambda", lambda);
        set("lambda_rel", lambda_rel);
        if (perfect) doc["perfect_sensing"] = true;
        if (!scheme.empty()) doc["scheme"] = scheme;
        return doc;
    }

    /// Parsed and canonicalized, so a manifest rerun sees identical values.
    ScenarioSpec spec() const {
        const ScenarioSpec raw = parse_scenario(document());
        ScenarioSpec s = parse_scenario(to_json(raw));
        s.assumed = raw.assumed;
        return s;
    }
};

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text_file(path, text);
    }
}

fs::path manifest_dir(const std::string& manifest_path) { return fs::path(manifest_path).parent_path(); }

std::string rerun_output(const RunManifest& m, const std::string& manifest_path, const std::string& override_path,
                         std::size_t index = 0) {
    if (!override_path.empty()) return override_path;
    if (m.outputs.size() <= index) throw ConfigError("manifest lists no output to rewrite; pass --output");
    return (manifest_dir(manifest_path) / m.outputs[index]).string();
}

std::string file_name(const std::string& path) { return fs::path(path).filename().string(); }

// ---- sense ----------------------------------------------------------------

struct SenseCmd {
    ScenarioFlags sc;
    std::optional<double> start, stop;
    int points = 0;
    bool gaussian = false;
    std::string output;

    void attach(CLI::App* app) {
        sc.attach(app, false);
        si_flag(app, "--start", start, "first threshold of a grid (relative to noise_var)");
        si_flag(app, "--stop", stop, "last threshold of a grid (relative to noise_var)");
        app->add_option("--points", points, "grid points");
        app->add_flag("--gaussian", gaussian, "normal approximation instead of the exact chi-square");
        app->add_option("--output", output, "CSV file (default stdout)");
    }

    int run() const {
        json doc = sc.document();
        const bool grid = start.has_value() || stop.has_value() || points > 0;
        if (grid && (!start || !stop || points < 2)) throw ConfigError("a threshold grid needs --start, --stop and --points >= 2");
        if (!grid && !doc.contains("lambda") && !doc.contains("lambda_rel")) {
            throw ConfigError("give --lambda, --lambda-rel or a --start/--stop/--points grid");
        }
        for (const char* k : {"lambda", "lambda_rel", "perfect_sensing", "p_f", "p_d"}) {
            if (grid) doc.erase(k);
        }
        const ScenarioSpec spec = parse_scenario(doc);
        const ScenarioConfig cfg = spec.scenario();
        const SensingConfig sens = cfg.sensing();
        std::vector<double> lambdas;
        if (grid) {
            for (double v : make_grid(*start, *stop, points, false)) lambdas.push_back(v * cfg.noise_var);
        } else {
            lambdas.push_back(spec.lambda);
        }
        CsvTable t;
        t.header = {"lambda", "lambda_rel", "NB", "model", "p_f", "p_d"};
        for (double lam : lambdas) {
            const SensingPerformance p = gaussian ? sensing_performance_gaussian(sens, lam) : sensing_performance(sens, lam);
            t.rows.push_back({format_number(lam), format_number(lam / cfg.noise_var), std::to_string(sens.sample_count()),
                              gaussian ? "gaussian" : "exact", format_number(p.p_f), format_number(p.p_d)});
        }
        std::ostringstream os;
        write_csv(os, t);
        emit(output, os.str());
        return 0;
    }
};

// ---- effcap ---------------------------------------------------------------

struct EffcapCmd {
    ScenarioFlags sc;
    std::string output;

    void attach(CLI::App* app) {
        sc.attach(app);
        app->add_option("--output", output, "JSON file (default stdout)");
    }

    int run() const {
        const ScenarioSpec spec = sc.spec();
        const ScenarioConfig cfg = spec.scenario();
        const SensingPerformance perf = spec.performance(cfg);
        const EffCapResult r = evaluate_scheme(cfg, perf, spec.scheme);
        const SnrQuad snr = derive_snrs(cfg);
        json out;
        out["config"] = to_json(spec);
        out["assumed_defaults"] = json::object();
        for (const auto& [k, v] : assumed_defaults(spec)) out["assumed_defaults"][k] = v;
        out["snr"] = {{"snr1", json_value(snr.snr1)},
                      {"snr2", json_value(snr.snr2)},
                      {"snr3", json_value(snr.snr3)},
                      {"snr4", json_value(snr.snr4)}};
        out["sensing"] = {{"mode", to_string(spec.sensing_mode)},
                          {"lambda", json_value(perf.lambda)},
                          {"NB", cfg.sensing().sample_count()},
                          {"p_f", json_value(perf.p_f)},
                          {"p_d", json_value(perf.p_d)}};
        out["result"] = {{"scheme", to_string(r.scheme)},
                         {"r_e", json_value(r.r_e)},
                         {"log_mgf", json_value(r.log_mgf)},
                         {"r1_opt", json_value(r.r1_opt)},
                         {"r2_opt", json_value(r.r2_opt)},
                         {"gamma1", json_value(r.gamma1)},
                         {"gamma2", json_value(r.gamma2)},
                         {"converged", r.converged}};
        emit(output, dump_json(out));
        return 0;
    }
};

// ---- sweep ----------------------------------------------------------------

struct SweepCmd {
    ScenarioFlags sc;
    std::string axis = "lambda";
    std::string values;
    std::optional<double> start, stop;
    int points = 0;
    bool log_spacing = false;
    std::string outputs;
    std::string output;
    std::string from_manifest;

    void attach(CLI::App* app) {
        sc.attach(app);
        app->add_option("--axis", axis, "lambda | N | theta | rho")->capture_default_str();
        app->add_option("--values", values, "comma-separated grid");
        si_flag(app, "--start", start, "grid start");
        si_flag(app, "--stop", stop, "grid stop");
        app->add_option("--points", points, "grid points");
        app->add_flag("--log", log_spacing, "logarithmic grid spacing");
        app->add_option("--outputs", outputs, "comma-separated output columns");
        app->add_option("--output", output, "CSV file; a manifest is written next to it");
        app->add_option("--from-manifest", from_manifest, "rerun the sweep recorded in a manifest");
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    int run() const {
        ScenarioSpec spec;
        SweepSpec sw;
        std::map<std::string, json> assumed;
        std::string out_path = output;
        if (!from_manifest.empty()) {
            const RunManifest m = read_manifest(from_manifest);
            if (m.command != "sweep") throw ConfigError("manifest was not written by sweep");
            spec = parse_scenario(m.config);
            sw = parse_sweep(m.parameters.at("sweep"));
            assumed = m.assumed;
            out_path = rerun_output(m, from_manifest, output);
        } else {
            spec = sc.spec();
            assumed = assumed_defaults(spec);
            sw.axis = sweep_axis_from_string(axis);
            sw.scheme = spec.scheme;
            if (!values.empty()) {
                for (const std::string& v : split(values)) sw.grid.push_back(parse_si(v));
            } else {
                if (!start || !stop || points < 2) throw ConfigError("give --values or --start, --stop, --points >= 2");
                sw.grid = make_grid(*start, *stop, points, log_spacing);
            }
            sw.outputs = split(outputs);
            sw = parse_sweep(to_json(sw));
        }
        const CsvTable table = run_sweep(spec, sw);
        std::ostringstream os;
        write_csv(os, table);
        emit(out_path, os.str());
        if (!out_path.empty() && out_path != "-") {
            RunManifest m;
            m.command = "sweep";
            m.config = to_json(spec);
            m.parameters = {{"sweep", to_json(sw)}};
            m.assumed = assumed;
            m.outputs = {file_name(out_path)};
            write_manifest(manifest_path_for(out_path), m);
        }
        return 0;
    }
};

// ---- simulate -------------------------------------------------------------

struct SimulateCmd {
    ScenarioFlags sc;
    SimulationOptions opt;
    std::optional<double> arrival;
    std::string trace;
    std::string output;
    std::string from_manifest;

    void attach(CLI::App* app) {
        sc.attach(app);
        count_flag(app, "--frames", opt.frames, "frames to simulate");
        count_flag(app, "--seed", opt.seed, "random seed");
        app->add_flag("--waveform", opt.waveform, "synthesize sensing samples and run the energy detector");
        si_flag(app, "--arrival-bps", arrival, "constant arrival rate (bit/s)");
        si_flag(app, "--arrival-factor", opt.arrival_factor, "arrival rate as a multiple of R_E * B");
        si_flag(app, "--delay", opt.delay_s, "delay bound d_max (s) for the violation check");
        si_flag(app, "--delay-c", opt.delay_c, "constant c of the delay bound");
        app->add_option("--trace", trace, "per-frame trace CSV");
        app->add_option("--output", output, "summary JSON (default stdout); a manifest is written next to it");
        app->add_option("--from-manifest", from_manifest, "rerun the simulation recorded in a manifest");
    }

    int run() {
        ScenarioSpec spec;
        std::map<std::string, json> assumed;
        std::string out_path = output, trace_path = trace;
        if (!from_manifest.empty()) {
            const RunManifest m = read_manifest(from_manifest);
            if (m.command != "simulate") throw ConfigError("manifest was not written by simulate");
            spec = parse_scenario(m.config);
            opt = simulation_options_from_json(m.parameters.at("options"));
            assumed = m.assumed;
            out_path = rerun_output(m, from_manifest, output, 0);
            if (trace.empty() && m.outputs.size() > 1) trace_path = (manifest_dir(from_manifest) / m.outputs[1]).string();
        } else {
            spec = sc.spec();
            if (arrival) opt.arrival_bps = *arrival;
            assumed = assumed_defaults(spec);
            assumed["delay_c"] = json_value(opt.delay_c);
        }
        const SimulationOutput res = run_simulation(spec, spec.scheme, opt);
        emit(out_path, dump_json(res.summary));
        if (!trace_path.empty()) {
            std::ostringstream os;
            write_trace_csv(os, res.frames, res.queue);
            write_text_file(trace_path, os.str());
        }
        if (!out_path.empty() && out_path != "-") {
            RunManifest m;
            m.command = "simulate";
            m.config = to_json(spec);
            m.parameters = {{"options", options_to_json(opt)}};
            m.assumed = assumed;
            m.seed = opt.seed;
            m.outputs = {file_name(out_path)};
            if (!trace_path.empty()) m.outputs.push_back(file_name(trace_path));
            write_manifest(manifest_path_for(out_path), m);
        }
        return 0;
    }
};

// ---- validate -------------------------------------------------------------

struct ValidateCmd {
    ScenarioFlags sc;
    ValidationOptions opt;
    bool plain = false;
    std::string output;
    std::string from_manifest;

    void attach(CLI::App* app) {
        sc.attach(app);
        count_flag(app, "--frames", opt.frames, "frames to simulate (>= 1e4)");
        count_flag(app, "--seed", opt.seed, "random seed");
        si_flag(app, "--tolerance", opt.effcap_rel_tol, "relative tolerance of the effective-capacity check");
        app->add_flag("--waveform", opt.waveform, "synthesize sensing samples and run the energy detector");
        app->add_flag("--plain", plain, "plain Monte Carlo for the effective capacity (no importance sampling)");
        app->add_flag("--check-tail", opt.check_tail, "let the queue tail-exponent check decide the verdict");
        count_flag(app, "--tail-frames", opt.tail_frames, "frames for the queue tail check (default --frames)");
        app->add_option("--output", output, "report JSON (default stdout); a manifest is written next to it");
        app->add_option("--from-manifest", from_manifest, "rerun the validation recorded in a manifest");
    }

    int run() {
        ScenarioSpec spec;
        std::map<std::string, json> assumed;
        std::string out_path = output;
        if (!from_manifest.empty()) {
            const RunManifest m = read_manifest(from_manifest);
            if (m.command != "validate") throw ConfigError("manifest was not written by validate");
            spec = parse_scenario(m.config);
            opt = options_from_json(m.parameters.at("options"));
            assumed = m.assumed;
            out_path = rerun_output(m, from_manifest, output);
        } else {
            spec = sc.spec();
            opt.importance = !plain;
            assumed = assumed_defaults(spec);
        }
        const ValidationReport rep = run_validation(spec, spec.scheme, opt);
        emit(out_path, dump_json(rep.report));
        if (!out_path.empty() && out_path != "-") {
            RunManifest m;
            m.command = "validate";
            m.config = to_json(spec);
            m.parameters = {{"options", options_to_json(opt)}};
            m.assumed = assumed;
            m.seed = opt.seed;
            m.outputs = {file_name(out_path)};
            write_manifest(manifest_path_for(out_path), m);
        }
        if (!rep.pass) throw ValidationFailed{};
        return 0;
    }
};

// ---- reproduce ------------------------------------------------------------

struct ReproduceCmd {
    std::vector<std::string> figures;
    bool all = false;
    std::string out_dir = "figures";
    std::string from_manifest;

    void attach(CLI::App* app) {
        app->add_option("--figure", figures, "figure id (fig2, fig3, fig5, fig6, fig7, fig8, fig9); repeatable");
        app->add_flag("--all", all, "every figure");
        app->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
        app->add_option("--from-manifest", from_manifest, "rerun the figure recorded in a manifest");
    }

    int run() const {
        if (!from_manifest.empty()) {
            const RunManifest m = read_manifest(from_manifest);
            if (m.command != "reproduce") throw ConfigError("manifest was not written by reproduce");
            const std::vector<FigureCurve> curves = curves_from_json(m.parameters.at("curves"));
            const std::string dir = out_dir == "figures" ? manifest_dir(from_manifest).string() : out_dir;
            run_figure(m.parameters.at("figure").get<std::string>(), m.parameters.value("title", std::string()),
                       curves, m.assumed, dir.empty() ? "." : dir);
            return 0;
        }
        std::vector<std::string> ids = all ? figure_ids() : figures;
        if (ids.empty()) throw ConfigError("give --figure or --all");
        for (const std::string& id : ids) {
            const RunManifest m = reproduce_figure(id, out_dir);
            for (const std::string& f : m.outputs) std::cout << (fs::path(out_dir) / f).string() << "\n";
        }
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective capacity of cognitive-radio links under statistical QoS constraints"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    SenseCmd sense;
    EffcapCmd effcap;
    SweepCmd sweep;
    SimulateCmd simulate;
    ValidateCmd validate;
    ReproduceCmd reproduce;
    sense.attach(app.add_subcommand("sense", "detection and false-alarm probabilities"));
    effcap.attach(app.add_subcommand("effcap", "effective capacity of one scenario"));
    sweep.attach(app.add_subcommand("sweep", "effective capacity over a parameter grid"));
    simulate.attach(app.add_subcommand("simulate", "Monte Carlo frames and queue"));
    validate.attach(app.add_subcommand("validate", "analytic vs Monte Carlo comparison"));
    reproduce.attach(app.add_subcommand("reproduce", "figure datasets"));

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("sense")) return sense.run();
        if (app.got_subcommand("effcap")) return effcap.run();
        if (app.got_subcommand("sweep")) return sweep.run();
        if (app.got_subcommand("simulate")) return simulate.run();
        if (app.got_subcommand("validate")) return validate.run();
        if (app.got_subcommand("reproduce")) return reproduce.run();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    } catch (const ValidationFailed&) {
        std::cerr << "crcap: validation failed\n";
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::cerr << "crcap: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "crcap: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const json::exception& e) {
        std::cerr << "crcap: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "crcap: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
