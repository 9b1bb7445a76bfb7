#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entrolab/models.hpp"

namespace entrolab {

inline constexpr const char* kArtifactVersion = "entrolab-1.0";
inline constexpr const char* kCsvSchemaVersion = "v1";

struct ExperimentConfig {
  nlohmann::json model;  // {family, params, truncation}
  std::vector<std::string> suites;
  std::vector<double> phi_list;  // alpha values in [1,2]
  int samples = 500;
  std::uint64_t seed = 1;
  std::vector<double> t_grid;
  std::string output_dir = "out";
};

/// Validates and normalizes a config; ConfigError names the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Builds the requested zoo instance from a model spec.
ZooInstance build_model(const nlohmann::json& model_spec);

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 failure, 2 hypotheses-not-satisfied
  nlohmann::json report;
};

/// Runs the requested suites in dependency order, writes report.json plus
/// one CSV per suite under output_dir, and returns the summary exit code.
/// report.json is byte-identical for identical (config, seed, version);
/// wall-clock timings go to timings.csv only.
RunResult run(const ExperimentConfig& config);

/// Cross-model table from previously written reports.
struct CompareRow {
  std::string model;
  double kappa_claimed = 0.0;
  double kappa_best_estimate = 0.0;
  double kappa_decay_fit = 0.0;
  double margin = 0.0;
};
std::vector<CompareRow> compare(const std::vector<std::string>& report_paths);

std::string format_compare_table(const std::vector<CompareRow>& rows);

}  // namespace entrolab
