#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "live/logistic.hpp"
#include "live/simulation.hpp"
#include "live/types.hpp"

namespace live {

/// Locale-independent formatting at 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Dataset CSV: header row with a `y` column (0/1) plus feature columns in
/// order. add_intercept prepends an all-ones column. Parse errors carry line
/// numbers.
Dataset read_dataset_csv(const std::string& path, bool add_intercept);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Loading CSV: one loading per row, header matching the model columns, the
/// intercept entry explicit.
std::vector<Loading> read_loadings_csv(const std::string& path,
                                       Eigen::Index expected_p);
void write_loadings_csv(const std::string& path,
                        const std::vector<Loading>& loadings);

/// Sparse triplet model file: metadata comment lines, then `index,value`
/// rows for the nonzero coordinates (1-indexed).
void write_model_file(const std::string& path, const FittedModel& model,
                      Eigen::Index p);
FittedModel read_model_file(const std::string& path, Eigen::Index* p_out = nullptr);

struct RunManifest {
  std::string command;
  std::string config_snapshot;  // serialized JSON of the effective config
  std::uint64_t master_seed = 0;
  std::string artifact_version;
  double wall_clock_seconds = 0.0;
  std::vector<std::pair<std::string, double>> phase_seconds;
};

std::string manifest_to_json(const RunManifest& manifest);
void write_manifest(const std::string& output_path, const RunManifest& manifest);

/// Simulation config JSON, schema "live-sim-config/1". Unknown fields are
/// rejected with field-level messages.
SimulationConfig config_from_json_text(const std::string& text);
SimulationConfig read_config_json(const std::string& path);
std::string config_to_json_text(const SimulationConfig& config);

std::string inference_result_to_json(const InferenceResult& result);
std::string inference_results_to_json(const std::vector<InferenceResult>& results);

/// Summary CSV: one row per method with the Cov, ERR, Len, RMSE, Bias, SE, t
/// column set; values are written exactly as aggregated.
void write_summary_csv(const std::string& path, const SimulationConfig& config,
                       double truth, const SummaryMetrics& summary);

/// Per-replication CSV (plot-ready): one row per (replication, method).
std::string replication_csv_header();
std::string replication_to_csv_rows(const ReplicationResult& rep);
void write_replications_csv(const std::string& path,
                            const std::vector<ReplicationResult>& reps);
/// Parses rows written by replication_to_csv_rows (resume support).
ReplicationResult replication_from_csv(const std::string& path);

void write_cv_curve_csv(const std::string& path, const CvResult& cv);

}  // namespace live
