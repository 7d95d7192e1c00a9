#include "faultsev/detection.hpp"

#include <algorithm>
#include <map>

#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"

namespace faultsev {

AnomalySeries score_predictions(std::span<const Matrix> predictions, std::span<const Window> windows) {
  if (predictions.size() != windows.size()) {
    throw ShapeError("score: " + std::to_string(predictions.size()) + " predictions for " +
                     std::to_string(windows.size()) + " windows");
  }
  AnomalySeries series;
  if (windows.empty()) return series;
  const std::size_t n = windows.front().target.rows();
  series.scores = Matrix(n, windows.size());
  series.time_index.reserve(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const Matrix& pred = predictions[k];
    const Matrix& target = windows[k].target;
    if (!pred.same_shape(target) || target.rows() != n) {
      throw ShapeError("score: prediction " + pred.shape_string() + " vs target " +
                       target.shape_string());
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pred(i, 0) - target(i, 0);
      series.scores(i, k) = d * d;
    }
    series.time_index.push_back(windows[k].target_index);
  }
  return series;
}

AnomalySeries score(const TgcnModel& model, std::span<const Window> windows) {
  if (!model.fitted()) throw ContractError("score: model has not been trained or loaded");
  const auto predictions = predict_all(model, windows);
  return score_predictions(predictions, windows);
}

Calibration threshold_from_scores(const AnomalySeries& train_scores) {
  if (train_scores.length() == 0) throw ContractError("calibrate_threshold: no training windows");
  Calibration c;
  c.threshold.assign(train_scores.nodes(), 0.0);
  for (std::size_t i = 0; i < train_scores.nodes(); ++i) {
    const auto row = train_scores.scores.row(i);
    c.threshold[i] = *std::max_element(row.begin(), row.end());
    if (c.threshold[i] <= 0.0) {
      c.warnings.push_back("node " + std::to_string(i) +
                           ": all training scores are zero; threshold is 0, so any positive score is a fault");
    }
  }
  return c;
}

Calibration calibrate_threshold(const TgcnModel& model, std::span<const Window> train_windows) {
  if (train_windows.empty()) throw ContractError("calibrate_threshold: no training windows");
  return threshold_from_scores(score(model, train_windows));
}

FlagMatrix flag(const AnomalySeries& series) {
  if (series.threshold.size() != series.nodes()) {
    throw ContractError("flag: threshold not calibrated for every node");
  }
  FlagMatrix flags(series.nodes(), std::vector<std::uint8_t>(series.length(), 0));
  for (std::size_t i = 0; i < series.nodes(); ++i)
    for (std::size_t k = 0; k < series.length(); ++k)
      flags[i][k] = is_fault(series.scores(i, k), series.threshold[i]) ? 1 : 0;
  return flags;
}

std::vector<std::size_t> fault_counts(const FlagMatrix& flags) {
  std::vector<std::size_t> counts;
  counts.reserve(flags.size());
  for (const auto& row : flags) counts.push_back(static_cast<std::size_t>(std::count(row.begin(), row.end(), 1)));
  return counts;
}

std::string anomaly_csv(const AnomalySeries& series) {
  const FlagMatrix flags = flag(series);
  std::string out = "t,node,score,threshold,flag\n";
  for (std::size_t k = 0; k < series.length(); ++k) {
    for (std::size_t i = 0; i < series.nodes(); ++i) {
      out += std::to_string(series.time_index[k]);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += format_double(series.scores(i, k));
      out += ',';
      out += format_double(series.threshold[i]);
      out += ',';
      out += flags[i][k] ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

AnomalySeries parse_anomaly_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv_file(path);
  const std::size_t c_t = table.column("t");
  const std::size_t c_node = table.column("node");
  const std::size_t c_score = table.column("score");
  const std::size_t c_tau = table.column("threshold");

  // node -> (t -> score); thresholds per node
  std::map<std::size_t, std::map<std::size_t, double>> by_node;
  std::map<std::size_t, double> tau;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = path.string() + ":" + std::to_string(table.line_numbers[r]);
    const auto& row = table.rows[r];
    const double t = parse_double(row[c_t], where);
    const double node = parse_double(row[c_node], where);
    if (t < 0 || node < 0 || t != static_cast<double>(static_cast<std::size_t>(t)) ||
        node != static_cast<double>(static_cast<std::size_t>(node))) {
      throw DataError(where + ": t and node must be non-negative integers");
    }
    const double s = parse_double(row[c_score], where);
    if (s < 0.0) throw DataError(where + ": negative score");
    by_node[static_cast<std::size_t>(node)][static_cast<std::size_t>(t)] = s;
    tau[static_cast<std::size_t>(node)] = parse_double(row[c_tau], where);
  }
  AnomalySeries series;
  if (by_node.empty()) return series;
  const std::size_t n = by_node.rbegin()->first + 1;
  if (by_node.size() != n) throw DataError(path.string() + ": node indices are not contiguous from 0");
  const auto& first = by_node.begin()->second;
  for (const auto& [t, s] : first) series.time_index.push_back(t);
  series.scores = Matrix(n, series.time_index.size());
  series.threshold.assign(n, 0.0);
  for (const auto& [node, rows] : by_node) {
    if (rows.size() != series.time_index.size()) {
      throw DataError(path.string() + ": node " + std::to_string(node) + " has a different time axis");
    }
    std::size_t k = 0;
    for (const auto& [t, s] : rows) {
      if (t != series.time_index[k]) {
        throw DataError(path.string() + ": node " + std::to_string(node) + " has a different time axis");
      }
      series.scores(node, k++) = s;
    }
    series.threshold[node] = tau[node];
  }
  return series;
}

}  // namespace faultsev
