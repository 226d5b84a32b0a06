#include "crcap/app/figures.hpp"

#include <filesystem>
#include <sstream>

namespace crcap::app {

namespace {

// Parameters shared by every recipe: B = 100 kHz, T = 0.1 s, SNR1 = 0 dB,
// SNR4 = 10 dB, rho = 0.1.
ScenarioSpec base_scenario() {
    ScenarioSpec s;
    s.frame_s = 0.1;
    s.sensing_s = 0.0025;
    s.bandwidth_hz = 100e3;
    s.theta = 0.01;
    s.rho = 0.1;
    s.snr1_db = 0.0;
    s.snr4_db = 10.0;
    s.kappa = 1.0;
    s.noise_var = 1.0;
    s.fading = FadingModel::rayleigh(1.0);
    s.sensing_mode = SensingMode::Exact;
    s.lambda = 1.35;
    return s;
}

std::map<std::string, json> common_assumptions() {
    return {{"kappa", 1.0}, {"mean_power", 1.0}, {"noise_var", 1.0}};
}

std::string ms_label(double n) {
    std::ostringstream os;
    os << n * 1e3;
    std::string s = os.str();
    for (char& c : s) {
        if (c == '.') c = 'p';
    }
    return s + "ms";
}

std::string num_label(const char* name, double v) {
    std::string s = std::string(name) + format_number(v);
    for (char& c : s) {
        if (c == '.') c = 'p';
    }
    return s;
}

const std::vector<double> kFigNs = {0.001, 0.0025, 0.005};
const std::vector<double> kRhos = {0.1, 0.5, 0.9};
const std::vector<Scheme> kSchemes = {Scheme::FixedRateFixedPower, Scheme::VarRateFixedPower,
                                      Scheme::VarRateVarPower};

FigureRecipe lambda_figure(const std::string& id, double theta) {
    FigureRecipe r;
    r.id = id;
    r.title = "effective capacity and P_f, P_d vs detection threshold, theta = " + format_number(theta);
    r.assumed = common_assumptions();
    r.assumed["N_s_values"] = kFigNs;
    for (double n : kFigNs) {
        FigureCurve c;
        c.scenario = base_scenario();
        c.scenario.theta = theta;
        c.scenario.sensing_s = n;
        c.sweep.axis = SweepAxis::Lambda;
        c.sweep.grid = make_grid(0.5, 3.0, 51, false);
        c.sweep.scheme = Scheme::FixedRateFixedPower;
        c.label = "N = " + format_number(n) + " s";
        c.file = id + "_N" + ms_label(n) + ".csv";
        r.curves.push_back(c);
    }
    return r;
}

FigureRecipe build(const std::string& id) {
    if (id == "fig2") return lambda_figure(id, 0.01);
    if (id == "fig3") return lambda_figure(id, 1.0);
    FigureRecipe r;
    r.id = id;
    r.assumed = common_assumptions();
    if (id == "fig5") {
        r.title = "effective capacity and P_f, P_d vs sensing duration, theta = 0.01";
        for (double lam : {0.4, 1.35, 2.2}) {
            FigureCurve c;
            c.scenario = base_scenario();
            c.scenario.lambda = lam;
            c.sweep.axis = SweepAxis::N;
            c.sweep.grid = make_grid(0.0005, 0.01, 20, false);
            c.label = "lambda = " + format_number(lam);
            c.file = id + "_" + num_label("lambda", lam) + ".csv";
            r.curves.push_back(c);
        }
    } else if (id == "fig6") {
        r.title = "optimal rates and P_f, P_d vs sensing duration, theta = 0.01, lambda = 1.35";
        for (double rho : kRhos) {
            FigureCurve c;
            c.scenario = base_scenario();
            c.scenario.rho = rho;
            c.sweep.axis = SweepAxis::N;
            c.sweep.grid = make_grid(0.0005, 0.01, 20, false);
            c.sweep.outputs = {"N_s", "lambda", "p_f", "p_d", "r1_opt", "r2_opt", "r_e", "error"};
            c.label = "rho = " + format_number(rho);
            c.file = id + "_" + num_label("rho", rho) + ".csv";
            r.curves.push_back(c);
        }
    } else if (id == "fig7") {
        r.title = "effective capacity and optimal rates vs QoS exponent, perfect sensing";
        r.assumed["N_s"] = 0.0025;
        for (double rho : kRhos) {
            FigureCurve c;
            c.scenario = base_scenario();
            c.scenario.rho = rho;
            c.scenario.sensing_mode = SensingMode::Perfect;
            c.sweep.axis = SweepAxis::Theta;
            c.sweep.grid = make_grid(1e-3, 1.0, 13, true);
            c.sweep.outputs = {"theta", "p_f", "p_d", "r_e", "r1_opt", "r2_opt", "error"};
            c.label = "rho = " + format_number(rho);
            c.file = id + "_" + num_label("rho", rho) + ".csv";
            r.curves.push_back(c);
        }
    } else if (id == "fig8") {
        r.title = "effective capacity of the three schemes vs detection threshold, theta = 0.01";
        r.assumed["N_s"] = 0.0025;
        for (Scheme sc : kSchemes) {
            FigureCurve c;
            c.scenario = base_scenario();
            c.scenario.scheme = sc;
            c.sweep.axis = SweepAxis::Lambda;
            c.sweep.grid = make_grid(0.5, 3.0, 51, false);
            c.sweep.scheme = sc;
            c.label = to_string(sc);
            c.file = id + "_" + to_string(sc) + ".csv";
            r.curves.push_back(c);
        }
    } else if (id == "fig9") {
        r.title = "effective capacity of the three schemes vs QoS exponent, perfect sensing";
        r.assumed["N_s"] = 0.0025;
        for (Scheme sc : kSchemes) {
            FigureCurve c;
            c.scenario = base_scenario();
            c.scenario.scheme = sc;
            c.scenario.sensing_mode = SensingMode::Perfect;
            c.sweep.axis = SweepAxis::Theta;
            c.sweep.grid = make_grid(1e-3, 1.0, 13, true);
            c.sweep.scheme = sc;
            c.label = to_string(sc);
            c.file = id + "_" + to_string(sc) + ".csv";
            r.curves.push_back(c);
        }
    } else {
        throw ConfigError("unknown figure id '" + id + "' (fig2, fig3, fig5, fig6, fig7, fig8, fig9)");
    }
    return r;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig2", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9"};
    return ids;
}

json curves_to_json(const std::vector<FigureCurve>& curves) {
    json out = json::array();
    for (const FigureCurve& c : curves) {
        out.push_back({{"file", c.file}, {"label", c.label}, {"config", to_json(c.scenario)}, {"sweep", to_json(c.sweep)}});
    }
    return out;
}

std::vector<FigureCurve> curves_from_json(const json& doc) {
    std::vector<FigureCurve> out;
    if (!doc.is_array()) throw ConfigError("figure curves must be an array");
    for (const json& j : doc) {
        FigureCurve c;
        try {
            c.file = j.at("file").get<std::string>();
            c.label = j.value("label", std::string());
            c.scenario = parse_scenario(j.at("config"));
            c.sweep = parse_sweep(j.at("sweep"));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad figure curve: ") + e.what());
        }
        if (c.file.find('/') != std::string::npos) throw ConfigError("curve file names must not contain '/'");
        out.push_back(std::move(c));
    }
    return out;
}

FigureRecipe figure_recipe(const std::string& id) {
    FigureRecipe r = build(id);
    // Canonicalize through JSON so a manifest rerun sees exactly these values.
    r.curves = curves_from_json(curves_to_json(r.curves));
    return r;
}

RunManifest run_figure(const std::string& id, const std::string& title, const std::vector<FigureCurve>& curves,
                       const std::map<std::string, json>& assumed, const std::string& out_dir, int workers) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create '" + out_dir + "': " + ec.message());
    RunManifest m;
    m.command = "reproduce";
    m.config = nullptr;
    m.parameters = {{"figure", id}, {"title", title}, {"curves", curves_to_json(curves)}};
    m.assumed = assumed;
    for (const FigureCurve& c : curves) {
        const CsvTable table = run_sweep(c.scenario, c.sweep, workers);
        std::ostringstream os;
        write_csv(os, table);
        write_text_file((std::filesystem::path(out_dir) / c.file).string(), os.str());
        m.outputs.push_back(c.file);
    }
    write_manifest((std::filesystem::path(out_dir) / (id + ".manifest.json")).string(), m);
    return m;
}

RunManifest reproduce_figure(const std::string& id, const std::string& out_dir, int workers) {
    const FigureRecipe r = figure_recipe(id);
    return run_figure(r.id, r.title, r.curves, r.assumed, out_dir, workers);
}

}  // namespace crcap::app
