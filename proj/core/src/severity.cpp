#include "faultsev/severity.hpp"

#include <algorithm>
#include <cmath>

#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"

namespace faultsev {

namespace {

double exceedance(double score, double threshold) { return std::max(0.0, score - threshold); }

void require_weight(double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ContractError("severity: weight m must be a finite value >= 0");
  }
}

SeverityPoint point_from_sums(std::size_t n, double sum, double sum_sq, double weight) {
  SeverityPoint p;
  if (n == 0) return p;
  const double inv = 1.0 / static_cast<double>(n);
  p.mu = sum * inv;
  const double var = sum_sq * inv - p.mu * p.mu;
  p.sigma = std::sqrt(std::max(0.0, var));
  p.index = p.mu + weight * p.sigma;
  return p;
}

}  // namespace

SeverityState::SeverityState(double threshold, double weight) : threshold_(threshold), weight_(weight) {
  require_weight(weight);
  if (!std::isfinite(threshold)) throw ContractError("severity: threshold must be finite");
}

SeverityPoint SeverityState::update(double score) {
  if (!(score >= 0.0)) throw ContractError("severity: anomaly scores must be non-negative");
  const bool fault = is_fault(score, threshold_);
  if (fault) {
    const double e = exceedance(score, threshold_);
    ++count_;
    sum_ += e;
    sum_sq_ += e * e;
  }
  SeverityPoint p = current();
  p.fault = fault;
  return p;
}

SeverityPoint SeverityState::current() const { return point_from_sums(count_, sum_, sum_sq_, weight_); }

void SeverityState::set_weight(double weight) {
  require_weight(weight);
  weight_ = weight;
}

void SeverityState::reset() {
  count_ = 0;
  sum_ = 0.0;
  sum_sq_ = 0.0;
}

SeveritySeries streaming_severity(std::span<const double> scores, double threshold, double weight) {
  SeverityState state(threshold, weight);
  SeveritySeries out;
  out.mu.reserve(scores.size());
  out.sigma.reserve(scores.size());
  out.index.reserve(scores.size());
  for (double s : scores) {
    const SeverityPoint p = state.update(s);
    out.mu.push_back(p.mu);
    out.sigma.push_back(p.sigma);
    out.index.push_back(p.index);
  }
  return out;
}

SeveritySeries batch_severity(std::span<const double> scores, double threshold, double weight) {
  require_weight(weight);
  SeveritySeries out;
  out.mu.resize(scores.size());
  out.sigma.resize(scores.size());
  out.index.resize(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k <= t; ++k) {
      if (scores[k] < 0.0) throw ContractError("severity: anomaly scores must be non-negative");
      n += is_fault(scores[k], threshold) ? 1 : 0;
      const double e = exceedance(scores[k], threshold);
      sum += e;
      sum_sq += e * e;
    }
    const SeverityPoint p = point_from_sums(n, sum, sum_sq, weight);
    out.mu[t] = p.mu;
    out.sigma[t] = p.sigma;
    out.index[t] = p.index;
  }
  return out;
}

std::vector<SeveritySeries> severity_for(const AnomalySeries& series, double weight) {
  if (series.threshold.size() != series.nodes()) {
    throw ContractError("severity: anomaly series has no threshold");
  }
  std::vector<SeveritySeries> out;
  out.reserve(series.nodes());
  for (std::size_t i = 0; i < series.nodes(); ++i) {
    out.push_back(streaming_severity(series.scores.row(i), series.threshold[i], weight));
  }
  return out;
}

std::string severity_csv(const AnomalySeries& series, const std::vector<SeveritySeries>& severity) {
  if (severity.size() != series.nodes()) throw ShapeError("severity_csv: node count mismatch");
  const FlagMatrix flags = flag(series);
  std::string out = "t,node,score,threshold,flag,mu,sigma,index\n";
  for (std::size_t k = 0; k < series.length(); ++k) {
    for (std::size_t i = 0; i < series.nodes(); ++i) {
      const SeveritySeries& s = severity[i];
      if (s.size() != series.length()) throw ShapeError("severity_csv: length mismatch");
      out += std::to_string(series.time_index[k]) + ',' + std::to_string(i) + ',';
      out += format_double(series.scores(i, k)) + ',' + format_double(series.threshold[i]) + ',';
      out += flags[i][k] ? "1," : "0,";
      out += format_double(s.mu[k]) + ',' + format_double(s.sigma[k]) + ',' + format_double(s.index[k]);
      out += '\n';
    }
  }
  return out;
}

SmoothingComparison compare_smoothing(std::span<const double> scores, double threshold,
                                      const SeveritySeries& severity, std::size_t from,
                                      bool detected_only) {
  if (severity.size() != scores.size()) throw ShapeError("compare_smoothing: length mismatch");
  SmoothingComparison c;
  for (std::size_t k = std::max<std::size_t>(from, 1); k < scores.size(); ++k) {
    if (detected_only && !is_fault(scores[k], threshold)) continue;
    c.index_variation += std::abs(severity.index[k] - severity.index[k - 1]);
    c.exceedance_variation +=
        std::abs(exceedance(scores[k], threshold) - exceedance(scores[k - 1], threshold));
    ++c.steps;
  }
  if (c.steps > 0) {
    c.index_variation /= static_cast<double>(c.steps);
    c.exceedance_variation /= static_cast<double>(c.steps);
  }
  return c;
}

}  // namespace faultsev
