#pragma once

#include <string>

#include "quadlab/exclusion.hpp"

namespace quadlab {

/// A run description as read from an experiment file.
struct Experiment {
    RunConfig run;
    double a0 = 2.0;
    std::string outputDir = "out";
};

/// Parses experiment JSON. Every field except a0 is optional; unknown keys
/// are rejected. Throws ConfigError carrying the dotted path of the bad field.
Experiment experiment_from_json(const std::string& text);

/// Reads and parses a file. Throws IoError when it cannot be read.
Experiment load_experiment(const std::string& path);

/// The run config in the experiment format (without a0 / outputDir).
std::string run_config_to_json(const RunConfig& conf, int indent = 2);

/// Full experiment, round-trips through experiment_from_json.
std::string experiment_to_json(const Experiment& e, int indent = 2);

}  // namespace quadlab
