#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faultsev/matrix.hpp"
#include "faultsev/model.hpp"
#include "faultsev/tape.hpp"

namespace faultsev {

enum class Segment { train, validation, test };

const char* to_string(Segment s);

/// Chronological split: the first `train_frac` of the series is the training
/// portion, of which the last `val_frac` is held out for validation. The rest
/// is test data.
struct SplitSpec {
  double train_frac = 0.4;
  double val_frac = 0.2;
};

/// Half-open column ranges [0, train_end), [train_end, val_end), [val_end, total).
struct SplitBounds {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t total = 0;

  std::size_t begin(Segment s) const;
  std::size_t end(Segment s) const;
  std::size_t length(Segment s) const { return end(s) - begin(s); }
};

SplitBounds compute_split(std::size_t total, const SplitSpec& spec);

struct ChannelStats {
  double mean = 0.0;
  double std = 1.0;  // population std of the train segment; 1 for constant channels
  bool constant = false;
};

struct Dataset {
  Matrix raw;       // N x T as ingested
  Matrix features;  // N x T, z-scored with train-segment statistics
  SplitBounds split;
  std::size_t window = 0;
  std::vector<ChannelStats> stats;
  std::vector<std::string> warnings;

  std::size_t nodes() const noexcept { return features.rows(); }
  std::size_t length() const noexcept { return features.cols(); }
};

/// Channels whose train-segment std falls below this are treated as constant.
inline constexpr double kConstantChannelStd = 1e-8;

Dataset normalize_dataset(const Matrix& raw, const SplitSpec& split, std::size_t window);

/// w consecutive inputs (each N x 1) and the column right after them.
struct Window {
  std::vector<Matrix> inputs;
  Matrix target;
  std::size_t target_index = 0;  // column of `target` in the full series
};

/// Stride-1 windows fully inside one segment: length - w of them, in time
/// order unless a shuffle seed is given.
std::vector<Window> make_windows(const Dataset& ds, Segment segment,
                                 std::optional<std::uint64_t> shuffle_seed = std::nullopt);

double mse_loss(const Matrix& pred, const Matrix& target);
Var mse_loss(Tape& tape, Var pred, Var target);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

AdamState make_adam_state(const AdamConfig& config, std::span<const Matrix* const> params);

/// Bias-corrected Adam update applied in place.
void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  /// Global-norm gradient clipping; 0 disables it.
  double clip_norm = 0.0;
};

struct EpochLoss {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  std::vector<EpochLoss> history;
  /// Relative change of the train loss over the last five epochs (reported only).
  double recent_relative_change = 0.0;
  bool converged = false;
};

inline constexpr double kConvergedRelativeChange = 1e-2;

struct BatchGradients {
  double loss = 0.0;  // mean per-window MSE over the batch
  std::vector<Matrix> grads;
};

/// Mean loss and gradients over a batch of windows (gradient accumulation).
BatchGradients batch_gradients(const TgcnModel& model, std::span<const Window> batch);

/// Fixed-epoch loop: shuffle, batch, Adam, record train and validation MSE.
/// Marks the model fitted. Throws DivergenceError on a non-finite loss.
TrainResult train(TgcnModel& model, const Dataset& ds, const TrainConfig& config);

std::vector<Matrix> predict_all(const TgcnModel& model, std::span<const Window> windows);
double evaluate_mse(const TgcnModel& model, std::span<const Window> windows);
/// MSE of predicting each target as the window's last input.
double persistence_mse(std::span<const Window> windows);

/// `epoch,train_mse,val_mse` with header.
std::string loss_history_csv(const TrainResult& result);

}  // namespace faultsev
