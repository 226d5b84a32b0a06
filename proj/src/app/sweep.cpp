#include "crcap/app/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "crcap/parallel.hpp"

namespace crcap::app {

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Lambda: return "lambda";
        case SweepAxis::N: return "N";
        case SweepAxis::Theta: return "theta";
        case SweepAxis::Rho: return "rho";
    }
    return "lambda";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "lambda") return SweepAxis::Lambda;
    if (name == "N" || name == "N_s") return SweepAxis::N;
    if (name == "theta") return SweepAxis::Theta;
    if (name == "rho") return SweepAxis::Rho;
    throw ConfigError("unknown sweep axis '" + name + "' (lambda, N, theta, rho)");
}

void SweepSpec::validate() const {
    if (grid.size() < 2) throw ConfigError("a sweep needs at least 2 grid points");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k])) throw ConfigError("grid values must be finite");
        if (k > 0 && !(grid[k] > grid[k - 1])) throw ConfigError("grid must be strictly increasing");
    }
    const auto& known = sweep_columns();
    for (const std::string& c : outputs) {
        if (std::find(known.begin(), known.end(), c) == known.end()) {
            throw ConfigError("unknown output column '" + c + "'");
        }
    }
}

std::vector<double> make_grid(double start, double stop, int points, bool log_spacing) {
    if (points < 2) throw ConfigError("a grid needs at least 2 points");
    if (!(stop > start)) throw ConfigError("grid stop must exceed start");
    if (log_spacing && !(start > 0.0)) throw ConfigError("log grid needs start > 0");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / (points - 1);
        g[static_cast<std::size_t>(k)] =
            log_spacing ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                        : start + t * (stop - start);
    }
    g.front() = start;
    g.back() = stop;
    return g;
}

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = {"lambda", "N_s",    "theta",  "rho",    "p_f",
                                                  "p_d",    "r_e",    "log_mgf", "r1_opt", "r2_opt",
                                                  "gamma1", "gamma2", "error"};
    return cols;
}

std::vector<std::string> default_sweep_outputs(SweepAxis axis, Scheme scheme) {
    std::vector<std::string> out;
    const std::string lead = axis == SweepAxis::N ? "N_s" : to_string(axis);
    out.push_back(lead);
    if (axis != SweepAxis::Lambda) out.push_back("lambda");
    out.insert(out.end(), {"p_f", "p_d", "r_e"});
    if (scheme == Scheme::FixedRateFixedPower) out.insert(out.end(), {"r1_opt", "r2_opt"});
    if (scheme == Scheme::VarRateVarPower) out.insert(out.end(), {"gamma1", "gamma2"});
    out.push_back("error");
    return out;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

CsvTable run_sweep(const ScenarioSpec& base, const SweepSpec& spec, int workers) {
    spec.validate();
    const std::vector<std::string> cols =
        spec.outputs.empty() ? default_sweep_outputs(spec.axis, spec.scheme) : spec.outputs;
    CsvTable table;
    table.header = cols;
    table.rows.assign(spec.grid.size(), {});

    parallel_for(
        spec.grid.size(),
        [&](std::size_t i) {
            ScenarioSpec s = base;
            const double x = spec.grid[i];
            switch (spec.axis) {
                case SweepAxis::Lambda:
                    s.lambda = x;
                    if (s.sensing_mode == SensingMode::Perfect || s.sensing_mode == SensingMode::Given) {
                        s.sensing_mode = SensingMode::Exact;
                    }
                    break;
                case SweepAxis::N: s.sensing_s = x; break;
                case SweepAxis::Theta: s.theta = x; break;
                case SweepAxis::Rho: s.rho = x; break;
            }
            std::map<std::string, std::string> row;
            row["lambda"] = s.sensing_mode == SensingMode::Exact || s.sensing_mode == SensingMode::Gaussian
                                ? format_number(s.lambda)
                                : std::string();
            row["N_s"] = format_number(s.sensing_s);
            row["theta"] = format_number(s.theta);
            row["rho"] = format_number(s.rho);
            try {
                const ScenarioConfig cfg = s.scenario();
                const SensingPerformance perf = s.performance(cfg);
                row["p_f"] = format_number(perf.p_f);
                row["p_d"] = format_number(perf.p_d);
                const EffCapResult res = evaluate_scheme(cfg, perf, spec.scheme);
                row["r_e"] = format_number(res.r_e);
                row["log_mgf"] = format_number(res.log_mgf);
                row["r1_opt"] = cell(res.r1_opt);
                row["r2_opt"] = cell(res.r2_opt);
                row["gamma1"] = cell(res.gamma1);
                row["gamma2"] = cell(res.gamma2);
                if (!res.converged) row["error"] = "optimizer did not converge";
            } catch (const std::exception& e) {
                row["error"] = e.what();
            }
            std::vector<std::string>& out = table.rows[i];
            for (const std::string& c : cols) out.push_back(row.count(c) ? row[c] : std::string());
        },
        workers);
    return table;
}

json to_json(const SweepSpec& spec) {
    json g = json::array();
    for (double v : spec.grid) g.push_back(json_value(v));
    json out;
    out["axis"] = to_string(spec.axis);
    out["grid"] = g;
    out["scheme"] = to_string(spec.scheme);
    out["outputs"] = spec.outputs;
    return out;
}

SweepSpec parse_sweep(const json& doc) {
    SweepSpec s;
    try {
        s.axis = sweep_axis_from_string(doc.at("axis").get<std::string>());
        for (const json& v : doc.at("grid")) s.grid.push_back(json_number(v, "grid"));
        s.scheme = scheme_from_string(doc.value("scheme", std::string("fixed")));
        if (doc.contains("outputs")) s.outputs = doc.at("outputs").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad sweep spec: ") + e.what());
    }
    s.validate();
    return s;
}

}  // namespace crcap::app
