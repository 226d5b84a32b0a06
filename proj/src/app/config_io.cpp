#include "crcap/app/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "crcap/csv.hpp"

namespace crcap::app {

double parse_si(const std::string& text) {
    if (text.empty()) throw ConfigError("empty number");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + text + "'");
    }
    const std::string suffix = text.substr(used);
    if (suffix.empty()) return v;
    if (suffix.size() != 1) throw ConfigError("bad SI suffix in '" + text + "'");
    switch (suffix[0]) {
        case 'p': return v * 1e-12;
        case 'n': return v * 1e-9;
        case 'u': return v * 1e-6;
        case 'm': return v * 1e-3;
        case 'k': return v * 1e3;
        case 'M': return v * 1e6;
        case 'G': return v * 1e9;
        default: throw ConfigError("bad SI suffix in '" + text + "'");
    }
}

double json_number(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_si(v.get<std::string>());
    throw ConfigError("key '" + key + "' must be a number");
}

namespace {

double take(const json& doc, const char* key, double fallback, ScenarioSpec& spec, bool record = false) {
    if (doc.contains(key)) return json_number(doc.at(key), key);
    if (record) spec.assumed[key] = fallback;
    return fallback;
}

}  // namespace

FadingModel parse_fading(const json& doc) {
    if (!doc.is_object()) throw ConfigError("fading must be an object");
    const std::string kind = doc.value("kind", std::string("rayleigh"));
    switch (fading_kind_from_string(kind)) {
        case FadingModel::Kind::RayleighPower:
            return FadingModel::rayleigh(doc.contains("mean_power") ? json_number(doc.at("mean_power"), "mean_power")
                                                                    : 1.0);
        case FadingModel::Kind::Degenerate: {
            const char* key = doc.contains("z0") ? "z0" : "mean_power";
            if (!doc.contains(key)) throw ConfigError("degenerate fading needs z0");
            return FadingModel::degenerate(json_number(doc.at(key), key));
        }
        case FadingModel::Kind::TabulatedCdf: {
            if (!doc.contains("z") || !doc.contains("cdf")) throw ConfigError("tabulated fading needs z and cdf");
            try {
                return FadingModel::tabulated(doc.at("z").get<std::vector<double>>(),
                                              doc.at("cdf").get<std::vector<double>>());
            } catch (const json::exception&) {
                throw ConfigError("tabulated z and cdf must be number arrays");
            }
        }
    }
    throw ConfigError("unknown fading kind");
}

json to_json(const FadingModel& fading) {
    json out;
    out["kind"] = to_string(fading.kind());
    switch (fading.kind()) {
        case FadingModel::Kind::RayleighPower: out["mean_power"] = json_value(fading.mean_power()); break;
        case FadingModel::Kind::Degenerate: out["z0"] = json_value(fading.mean_power()); break;
        case FadingModel::Kind::TabulatedCdf: {
            json z = json::array(), c = json::array();
            for (double v : fading.table_z()) z.push_back(v);
            for (double v : fading.table_cdf()) c.push_back(v);
            out["z"] = z;
            out["cdf"] = c;
            break;
        }
    }
    return out;
}

ScenarioSpec parse_scenario(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const char* known[] = {"T_s",      "N_s",       "B_hz",        "theta",         "rho",
                                  "snr1_db",  "snr4_db",   "kappa",       "fading",        "scheme",
                                  "noise_var", "lambda",   "lambda_rel",  "perfect_sensing", "p_f",
                                  "p_d",      "sensing_model"};
    for (const auto& [key, _] : doc.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown config key '" + key + "'");
    }
    ScenarioSpec s;
    s.frame_s = take(doc, "T_s", s.frame_s, s);
    s.sensing_s = take(doc, "N_s", s.sensing_s, s);
    s.bandwidth_hz = take(doc, "B_hz", s.bandwidth_hz, s);
    s.theta = take(doc, "theta", s.theta, s);
    s.rho = take(doc, "rho", s.rho, s);
    s.snr1_db = take(doc, "snr1_db", s.snr1_db, s);
    s.snr4_db = take(doc, "snr4_db", s.snr4_db, s);
    s.kappa = take(doc, "kappa", 1.0, s, true);
    s.noise_var = take(doc, "noise_var", 1.0, s, true);
    if (doc.contains("fading")) {
        s.fading = parse_fading(doc.at("fading"));
        if (s.fading.kind() == FadingModel::Kind::RayleighPower && !doc.at("fading").contains("mean_power")) {
            s.assumed["mean_power"] = 1.0;
        }
    } else {
        s.assumed["mean_power"] = 1.0;
    }
    if (doc.contains("scheme")) s.scheme = scheme_from_string(doc.at("scheme").get<std::string>());

    const bool perfect = doc.value("perfect_sensing", false);
    const int chosen = int(perfect) + int(doc.contains("lambda")) + int(doc.contains("lambda_rel")) +
                       int(doc.contains("p_f") || doc.contains("p_d"));
    if (chosen > 1) throw ConfigError("give only one of lambda, lambda_rel, perfect_sensing, p_f/p_d");
    const std::string model = doc.value("sensing_model", std::string("exact"));
    if (model != "exact" && model != "gaussian") throw ConfigError("sensing_model must be exact or gaussian");
    if (doc.contains("lambda") || doc.contains("lambda_rel")) {
        s.sensing_mode = model == "gaussian" ? SensingMode::Gaussian : SensingMode::Exact;
        s.lambda = doc.contains("lambda") ? json_number(doc.at("lambda"), "lambda")
                                          : json_number(doc.at("lambda_rel"), "lambda_rel") * s.noise_var;
    } else if (doc.contains("p_f") || doc.contains("p_d")) {
        s.sensing_mode = SensingMode::Given;
        s.p_f = take(doc, "p_f", 0.0, s);
        s.p_d = take(doc, "p_d", 1.0, s);
    } else {
        s.sensing_mode = SensingMode::Perfect;
        if (!perfect) s.assumed["perfect_sensing"] = 1.0;
    }
    s.scenario();
    s.performance();
    return s;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

ScenarioConfig ScenarioSpec::scenario() const {
    ScenarioConfig cfg = ScenarioConfig::from_snr_db(frame_s, sensing_s, bandwidth_hz, theta, rho, snr1_db, snr4_db,
                                                     kappa, noise_var, fading);
    cfg.validate();
    return cfg;
}

SensingPerformance ScenarioSpec::performance() const { return performance(scenario()); }

SensingPerformance ScenarioSpec::performance(const ScenarioConfig& cfg) const {
    SensingPerformance perf;
    switch (sensing_mode) {
        case SensingMode::Exact: perf = sensing_performance(cfg.sensing(), lambda); break;
        case SensingMode::Gaussian: perf = sensing_performance_gaussian(cfg.sensing(), lambda); break;
        case SensingMode::Perfect: perf = SensingPerformance::perfect(); break;
        case SensingMode::Given: perf = {0.0, p_f, p_d}; break;
    }
    perf.validate();
    return perf;
}

json to_json(const ScenarioSpec& s) {
    json out;
    out["T_s"] = json_value(s.frame_s);
    out["N_s"] = json_value(s.sensing_s);
    out["B_hz"] = json_value(s.bandwidth_hz);
    out["theta"] = json_value(s.theta);
    out["rho"] = json_value(s.rho);
    out["snr1_db"] = json_value(s.snr1_db);
    out["snr4_db"] = json_value(s.snr4_db);
    out["kappa"] = json_value(s.kappa);
    out["noise_var"] = json_value(s.noise_var);
    out["fading"] = to_json(s.fading);
    out["scheme"] = to_string(s.scheme);
    switch (s.sensing_mode) {
        case SensingMode::Exact: out["lambda"] = json_value(s.lambda); break;
        case SensingMode::Gaussian:
            out["lambda"] = json_value(s.lambda);
            out["sensing_model"] = "gaussian";
            break;
        case SensingMode::Perfect: out["perfect_sensing"] = true; break;
        case SensingMode::Given:
            out["p_f"] = json_value(s.p_f);
            out["p_d"] = json_value(s.p_d);
            break;
    }
    return out;
}

std::string to_string(SensingMode mode) {
    switch (mode) {
        case SensingMode::Exact: return "exact";
        case SensingMode::Gaussian: return "gaussian";
        case SensingMode::Perfect: return "perfect";
        case SensingMode::Given: return "given";
    }
    return "exact";
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

json json_value(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return std::stod(format_number(v));
}

json json_value(const std::optional<double>& v) { return v ? json_value(*v) : json(nullptr); }

}  // namespace crcap::app
