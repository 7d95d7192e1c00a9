#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "faultsev/detection.hpp"

namespace faultsev {

/// Weight on the exceedance spread when none is configured.
inline constexpr double kDefaultSeverityWeight = 2.0;

struct SeverityPoint {
  double mu = 0.0;
  double sigma = 0.0;
  double index = 0.0;  // mu + m * sigma
  bool fault = false;
};

/// Streaming severity index for one node.
///
/// Keeps the fault count n and the sums of exceedances e = max(0, s - tau)
/// and of e^2. After each score: mu = sum(e) / n, sigma^2 = sum(e^2) / n - mu^2
/// (clamped at 0), index = mu + m * sigma. With no fault yet everything is 0.
class SeverityState {
 public:
  explicit SeverityState(double threshold, double weight = kDefaultSeverityWeight);

  /// Throws ContractError for a negative score.
  SeverityPoint update(double score);
  /// Throws ContractError for a negative weight.
  void set_weight(double weight);
  /// Forgets all accumulated faults; threshold and weight are kept.
  void reset();

  std::size_t count() const noexcept { return count_; }
  double sum_exceedance() const noexcept { return sum_; }
  double sum_exceedance_sq() const noexcept { return sum_sq_; }
  double threshold() const noexcept { return threshold_; }
  double weight() const noexcept { return weight_; }
  SeverityPoint current() const;

 private:
  double threshold_;
  double weight_;
  std::size_t count_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

struct SeveritySeries {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> index;

  std::size_t size() const noexcept { return index.size(); }
};

/// Folds SeverityState::update over the scores.
SeveritySeries streaming_severity(std::span<const double> scores, double threshold, double weight);

/// Direct evaluation of the cumulative sums at every t (quadratic in length);
/// kept as an independent route to the streaming fold.
SeveritySeries batch_severity(std::span<const double> scores, double threshold, double weight);

/// Per-node streaming severity over a calibrated anomaly series.
std::vector<SeveritySeries> severity_for(const AnomalySeries& series, double weight);

/// `t,node,score,threshold,flag,mu,sigma,index`, time-major like the anomaly CSV.
std::string severity_csv(const AnomalySeries& series, const std::vector<SeveritySeries>& severity);

/// Mean absolute step-to-step change of the index versus of the raw
/// exceedance, over steps k >= from (k > 0), optionally only where a fault is flagged.
struct SmoothingComparison {
  double index_variation = 0.0;
  double exceedance_variation = 0.0;
  std::size_t steps = 0;
};

SmoothingComparison compare_smoothing(std::span<const double> scores, double threshold,
                                      const SeveritySeries& severity, std::size_t from,
                                      bool detected_only);

}  // namespace faultsev
