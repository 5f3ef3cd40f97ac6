#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levylab/levy_model.hpp"

namespace levylab {

/// Configuration problems exit with code 2 in the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key-value document with named sections:
///   key = value            # comment
///   [section]
///   key = value
struct ConfigFile {
    std::map<std::string, std::string> top;
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse_string(const std::string& text);
    static ConfigFile parse_file(const std::string& path);
};

/// Validated experiment configuration: triplet spec, horizon, seed, replicate
/// count, gate and the per-experiment parameter map.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::uint64_t reps = 0;
    double horizon = 1.0;
    double gate = 4.0;
    int threads = 0;
    std::optional<LevyTriplet> triplet;
    std::map<std::string, std::string> params;

    const LevyTriplet& model() const { return *triplet; }
};

ExperimentConfig load_experiment_config(const ConfigFile& file);
ExperimentConfig load_experiment_config_path(const std::string& path);

// Typed parameter lookups; throw ConfigError on malformed values.
double param_double(const std::map<std::string, std::string>& params,
                    const std::string& key, double fallback);
int param_int(const std::map<std::string, std::string>& params, const std::string& key,
              int fallback);
std::vector<double> param_double_list(const std::map<std::string, std::string>& params,
                                      const std::string& key,
                                      const std::string& fallback);
std::string param_string(const std::map<std::string, std::string>& params,
                         const std::string& key, const std::string& fallback);

/// Rejects any key not in `allowed`.
void require_known_keys(const std::map<std::string, std::string>& params,
                        const std::vector<std::string>& allowed,
                        const std::string& where);

}  // namespace levylab
