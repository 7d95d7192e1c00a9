#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "faultsev/config.hpp"
#include "faultsev/detection.hpp"
#include "faultsev/model.hpp"
#include "faultsev/severity.hpp"
#include "faultsev/training.hpp"

namespace faultsev {

/// File names used under the output directory.
struct ArtifactPaths {
  std::filesystem::path dir;

  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path features() const { return dir / "features.csv"; }
  std::filesystem::path synthetic_meta() const { return dir / "synthetic.json"; }
  std::filesystem::path model() const { return dir / "model.json"; }
  std::filesystem::path loss() const { return dir / "loss.csv"; }
  std::filesystem::path anomaly() const { return dir / "anomaly.csv"; }
  std::filesystem::path severity() const { return dir / "severity.csv"; }
  std::filesystem::path summary() const { return dir / "summary.json"; }
  std::filesystem::path plots() const { return dir / "plots"; }
};

/// Raw N x T features and, for synthetic input, the injected fault onset.
struct AcquiredData {
  Matrix values;
  std::vector<std::string> labels;
  IngestManifest manifest;
  std::optional<std::size_t> onset_index;
};

AcquiredData acquire(const RunConfig& config);
Dataset preprocess(const RunConfig& config, const AcquiredData& data);

struct TrainingOutcome {
  TgcnModel model;
  TrainResult result;
  double persistence_val_mse = 0.0;
};

TrainingOutcome train_stage(const RunConfig& config, const Dataset& ds);

struct DetectionOutcome {
  AnomalySeries train_scores;  // calibrated, for the no-false-alarm check
  AnomalySeries test_scores;   // calibrated with the training threshold
  std::vector<std::string> warnings;
};

DetectionOutcome detect_stage(const TgcnModel& model, const Dataset& ds);

/// Fault rate on one node before and after an onset index (test segment only).
struct OnsetRates {
  std::size_t pre_steps = 0, pre_flags = 0;
  std::size_t post_steps = 0, post_flags = 0;
  double pre_rate() const { return pre_steps ? static_cast<double>(pre_flags) / static_cast<double>(pre_steps) : 0.0; }
  double post_rate() const { return post_steps ? static_cast<double>(post_flags) / static_cast<double>(post_steps) : 0.0; }
};

OnsetRates onset_rates(const AnomalySeries& series, std::size_t node, std::size_t onset_index);

/// Position of the first score at or after `onset_index` (series length if none).
std::size_t first_position_at_or_after(const AnomalySeries& series, std::size_t onset_index);

struct PipelineResult {
  AcquiredData data;
  Dataset dataset;
  std::optional<TrainingOutcome> training;  // set once the training stage completes
  DetectionOutcome detection;
  std::vector<SeveritySeries> severity;
  std::string summary_json;
  std::vector<std::filesystem::path> plots;
};

/// Runs acquisition, preprocessing, training, prediction, detection and
/// severity in order and writes every artifact under config.output_dir.
/// A failing stage is rethrown with the stage name prefixed; files written
/// before the failure are left in place.
PipelineResult run_pipeline(const RunConfig& config);

/// Summary document: config echo, per-node threshold, fault counts and final
/// severity, training losses and (for synthetic input) onset statistics.
std::string summary_json(const RunConfig& config, const PipelineResult& result);

/// Runs `fn`, prefixing any faultsev::Error message with "stage '<name>': ".
void run_stage(const std::string& name, const std::function<void()>& fn);

}  // namespace faultsev
