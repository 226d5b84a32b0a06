#pragma once

#include <string>
#include <vector>

#include "crcap/app/manifest.hpp"
#include "crcap/app/sweep.hpp"

namespace crcap::app {

struct FigureCurve {
    std::string file;
    std::string label;
    ScenarioSpec scenario;
    SweepSpec sweep;
};

struct FigureRecipe {
    std::string id;
    std::string title;
    std::vector<FigureCurve> curves;
    std::map<std::string, json> assumed;
};

/// fig2, fig3, fig5, fig6, fig7, fig8, fig9.
const std::vector<std::string>& figure_ids();
FigureRecipe figure_recipe(const std::string& id);

/// Curves as stored in a manifest's parameters.
json curves_to_json(const std::vector<FigureCurve>& curves);
std::vector<FigureCurve> curves_from_json(const json& doc);

/// Runs the curves, writes one CSV each into out_dir plus `<id>.manifest.json`.
RunManifest run_figure(const std::string& id, const std::string& title, const std::vector<FigureCurve>& curves,
                       const std::map<std::string, json>& assumed, const std::string& out_dir, int workers = 0);
RunManifest reproduce_figure(const std::string& id, const std::string& out_dir, int workers = 0);

}  // namespace crcap::app
