#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdenet/analysis.hpp"
#include "pdenet/datagen.hpp"
#include "pdenet/training.hpp"

namespace pdenet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// User data: a CSV with one column per variable followed by y.
struct InlineCase {
  std::string name;
  std::vector<std::string> variables;
  std::string dictionary;  // comma-separated terms
  std::filesystem::path data;
};

struct CaseEntry {
  std::string name;
  std::optional<InlineCase> data;  // empty for catalog cases
};

struct CrlbSettings {
  std::vector<double> noise_levels{0.01, 0.05, 0.1, 0.5, 1.0};
  int trials = 3;
  int num_samples = 1000;
};

struct ExperimentConfig {
  std::vector<CaseEntry> cases;
  std::vector<double> noise_levels{1.0, 0.01, 0.0};
  int trials = 3;
  TrainConfig train;
  LossWeights weights;
  std::filesystem::path output_dir = "results";
  std::uint64_t master_seed = 0;
  CrlbSettings crlb;
  int workers = 1;
  bool write_history = true;

  void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
/// Relative data paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

TrainConfig parse_train_config(const nlohmann::json& j, TrainConfig base = {});
LossWeights parse_weights(const nlohmann::json& j, LossWeights base = {});

struct ResultRow {
  std::string case_name;
  double sigma = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or "aborted"
  std::string message;
  std::optional<double> err;  // absent for data without ground truth
  double sigma_min = 0.0;
  double gap = 0.0;
  int epochs = 0;
  Vector phi;
  std::vector<std::string> terms;
  double seconds = 0.0;
};

struct MatrixReport {
  std::vector<ResultRow> rows;
  int aborted = 0;
};

/// Every (case, sigma, trial) of the config, run on a bounded worker pool.
/// Writes results.csv, summary.csv, timings.csv and, when enabled,
/// history/<case>_s<sigma>_t<trial>.csv under output_dir. Rows are emitted in
/// matrix order whatever the completion order, so the CSV bytes depend only on
/// the config. A failing trial becomes an "aborted" row; the run continues.
MatrixReport run_matrix(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string case_name;
  double sigma = 0.0;
  int count = 0;
  double mean_err = 0.0;
  double std_err = 0.0;  // sample standard deviation; 0 for a single trial
};

/// Mean and standard deviation of err per (case, sigma) over ok rows with a
/// known err, in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

/// Runs ode_experiment with cfg.crlb and writes crlb.csv and crlb.svg.
OdeExperiment run_crlb_plot(const ExperimentConfig& cfg);

/// Log-log plot of empirical MSE and CRLB against sigma. Levels with sigma <= 0
/// or a non-finite MSE are left out of the corresponding polyline.
std::string render_crlb_svg(const OdeExperiment& experiment);

/// Reads a CSV whose header is exactly `variables` followed by y. The domain is
/// the bounding box of the data and there is no ground truth.
Problem ingest_external(const std::filesystem::path& csv, const std::vector<std::string>& variables,
                        const std::string& dictionary, const std::string& name = "external");

/// Writes a dataset as CSV: coordinates then y, header from the variable names.
void write_dataset(const std::filesystem::path& path, const std::vector<std::string>& variables, const Dataset& d);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace pdenet
