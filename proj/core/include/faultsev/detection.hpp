#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "faultsev/matrix.hpp"
#include "faultsev/model.hpp"
#include "faultsev/training.hpp"

namespace faultsev {

/// Per-node anomaly scores over a run of windows.
struct AnomalySeries {
  Matrix scores;                        // N x K, squared one-step prediction error
  std::vector<std::size_t> time_index;  // K target columns in the full series
  std::vector<double> threshold;        // N; empty until calibrated

  std::size_t nodes() const noexcept { return scores.rows(); }
  std::size_t length() const noexcept { return scores.cols(); }
  bool calibrated() const noexcept { return !threshold.empty(); }
};

/// Squared error per node between each prediction and its window's target.
AnomalySeries score_predictions(std::span<const Matrix> predictions, std::span<const Window> windows);

/// Scores windows with a fitted model. Throws ContractError for an unfitted model.
AnomalySeries score(const TgcnModel& model, std::span<const Window> windows);

struct Calibration {
  std::vector<double> threshold;  // per node: max training score
  std::vector<std::string> warnings;
};

Calibration threshold_from_scores(const AnomalySeries& train_scores);
Calibration calibrate_threshold(const TgcnModel& model, std::span<const Window> train_windows);

/// A score is a fault only when it strictly exceeds the threshold.
inline bool is_fault(double score, double threshold) { return score > threshold; }

/// flags[i][k] = 1 iff scores(i, k) > threshold[i]. Requires a calibrated series.
using FlagMatrix = std::vector<std::vector<std::uint8_t>>;
FlagMatrix flag(const AnomalySeries& series);

std::vector<std::size_t> fault_counts(const FlagMatrix& flags);

/// `t,node,score,threshold,flag`, one row per (time, node), time-major.
std::string anomaly_csv(const AnomalySeries& series);
AnomalySeries parse_anomaly_csv(const std::filesystem::path& path);

}  // namespace faultsev
