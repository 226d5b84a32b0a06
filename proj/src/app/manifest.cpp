#include "crcap/app/manifest.hpp"

#include <fstream>

namespace crcap::app {

json RunManifest::to_json() const {
    json out;
    out["tool"] = "crcap";
    out["version"] = kToolVersion;
    out["command"] = command;
    out["config"] = config;
    out["parameters"] = parameters;
    json a = json::object();
    for (const auto& [k, v] : assumed) a[k] = v;
    out["assumed_defaults"] = a;
    out["seed"] = seed ? json(*seed) : json(nullptr);
    out["outputs"] = outputs;
    return out;
}

RunManifest RunManifest::from_json(const json& doc) {
    RunManifest m;
    try {
        if (doc.value("tool", std::string()) != "crcap") throw ConfigError("not a crcap manifest");
        m.command = doc.at("command").get<std::string>();
        m.config = doc.value("config", json(nullptr));
        m.parameters = doc.value("parameters", json::object());
        if (doc.contains("assumed_defaults")) {
            for (const auto& [k, v] : doc.at("assumed_defaults").items()) m.assumed[k] = v;
        }
        if (doc.contains("seed") && !doc.at("seed").is_null()) m.seed = doc.at("seed").get<std::uint64_t>();
        m.outputs = doc.value("outputs", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad manifest: ") + e.what());
    }
    return m;
}

std::map<std::string, json> assumed_defaults(const ScenarioSpec& spec) {
    std::map<std::string, json> out;
    for (const auto& [k, v] : spec.assumed) out[k] = json_value(v);
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("write to '" + path + "' failed");
}

void write_manifest(const std::string& path, const RunManifest& m) { write_text_file(path, dump_json(m.to_json())); }

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest '" + path + "'");
    try {
        return RunManifest::from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
}

std::string manifest_path_for(const std::string& output_path) { return output_path + ".manifest.json"; }

}  // namespace crcap::app
