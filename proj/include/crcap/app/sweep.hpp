#pragma once

#include <string>
#include <vector>

#include "crcap/app/config_io.hpp"
#include "crcap/csv.hpp"

namespace crcap::app {

enum class SweepAxis { Lambda, N, Theta, Rho };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Lambda;
    std::vector<double> grid;
    Scheme scheme = Scheme::FixedRateFixedPower;
    /// Empty selects the default columns for the scheme.
    std::vector<std::string> outputs;

    void validate() const;
};

/// start..stop inclusive; log spacing needs start > 0.
std::vector<double> make_grid(double start, double stop, int points, bool log_spacing);

/// Every column a sweep can emit.
const std::vector<std::string>& sweep_columns();
std::vector<std::string> default_sweep_outputs(SweepAxis axis, Scheme scheme);

/// One row per grid point in grid order. A point whose evaluation throws gets
/// its message in the `error` column and empty numeric cells. Sweeping lambda
/// or N recomputes the sensing operating point, unless the scenario's sensing
/// is perfect or given.
CsvTable run_sweep(const ScenarioSpec& base, const SweepSpec& spec, int workers = 0);

json to_json(const SweepSpec& spec);
SweepSpec parse_sweep(const json& doc);

}  // namespace crcap::app
