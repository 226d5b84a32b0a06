#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crcap/app/config_io.hpp"

namespace crcap::app {

inline constexpr const char* kToolVersion = "1.0.0";

/// Everything needed to regenerate a set of output files.
struct RunManifest {
    std::string command;
    json config;      // scenario snapshot (canonical form), or null
    json parameters;  // command-specific settings
    std::map<std::string, json> assumed;  // defaults the inputs left out
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;  // file names relative to the manifest

    json to_json() const;
    static RunManifest from_json(const json& doc);
};

/// Defaults every analytic run relies on, merged with the scenario's own.
std::map<std::string, json> assumed_defaults(const ScenarioSpec& spec);

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

/// `<file>.manifest.json`.
std::string manifest_path_for(const std::string& output_path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace crcap::app
