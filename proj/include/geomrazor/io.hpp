#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "geomrazor/complexity.hpp"
#include "geomrazor/experiments.hpp"
#include "geomrazor/theorem.hpp"
#include "geomrazor/training.hpp"

namespace geomrazor {

/// Raised on malformed spec files; json_path names the offending field.
class SpecValidationError : public std::runtime_error {
public:
    SpecValidationError(const std::string& json_path, const std::string& message)
        : std::runtime_error(json_path + ": " + message), json_path(json_path) {}

    std::string json_path;
};

/// Strict parse: unknown keys, missing required fields and ill-typed values
/// all raise SpecValidationError naming the JSON path.
ExperimentSpec parse_spec(const std::string& path);
ExperimentSpec spec_from_json_text(const std::string& text);

/// Canonical serialization (fixed key order, defaults materialized).
std::string spec_to_json_text(const ExperimentSpec& spec);

// ---- datasets -------------------------------------------------------------

std::string dataset_to_json_text(const Dataset& data);
Dataset dataset_from_json_text(const std::string& text);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

// ---- result files -----------------------------------------------------------

void write_train_records_csv(const std::string& path, const std::vector<TrainRecord>& records);
void write_sweep_csv(const std::string& path, const SweepResult& result);
void write_snapshot_csv(const std::string& path, const Snapshot& snapshot);

std::string verdict_to_json_text(const TheoremVerdict& verdict);
std::string report_to_json_text(const ComplexityReport& report);

/// Inputs file for theorem checks: {"inputs": [[...], ...]}.
std::vector<Vector> inputs_from_json_text(const std::string& text);
std::vector<Vector> load_inputs(const std::string& path);

// ---- plain text helpers ------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // NaN for empty cells

    std::size_t column_index(const std::string& name) const;  // throws if missing
};

CsvTable read_csv(const std::string& path);

}  // namespace geomrazor
