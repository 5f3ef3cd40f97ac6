#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "levylab/config_file.hpp"

namespace levylab {

/// One verified quantity: estimate vs. target (absent target = NaN) with the
/// statistical or exact gate already applied.
struct ResultRow {
    std::string experiment;
    std::string params;  // semicolon-separated k=v, comma-free
    double estimate = 0.0;
    double stderr_ = 0.0;
    double target = 0.0;
    bool has_target = false;
    bool pass = false;
    double seconds = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    bool all_pass() const;
};

/// Names and one-line descriptions of every experiment, in listing order.
const std::vector<std::pair<std::string, std::string>>& experiment_catalog();

/// Runs the named experiment; throws ConfigError for unknown names or bad
/// parameters.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string csv_header();
std::string csv_row(const ResultRow& row);
void write_csv(std::ostream& out, const ExperimentResult& result);
/// All rows rendered without the wall-clock column; byte-identical across
/// reruns with the same seed regardless of thread count.
std::string deterministic_digest(const ExperimentResult& result);

}  // namespace levylab
