#include "faultsev/training.hpp"

#include <algorithm>
#include <cmath>

#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"
#include "faultsev/random.hpp"

namespace faultsev {

const char* to_string(Segment s) {
  switch (s) {
    case Segment::train: return "train";
    case Segment::validation: return "validation";
    case Segment::test: return "test";
  }
  return "?";
}

std::size_t SplitBounds::begin(Segment s) const {
  switch (s) {
    case Segment::train: return 0;
    case Segment::validation: return train_end;
    case Segment::test: return val_end;
  }
  return 0;
}

std::size_t SplitBounds::end(Segment s) const {
  switch (s) {
    case Segment::train: return train_end;
    case Segment::validation: return val_end;
    case Segment::test: return total;
  }
  return 0;
}

SplitBounds compute_split(std::size_t total, const SplitSpec& spec) {
  if (!(spec.train_frac > 0.0 && spec.train_frac < 1.0)) {
    throw ContractError("split: train_frac must lie in (0,1)");
  }
  if (!(spec.val_frac > 0.0 && spec.val_frac < 1.0)) {
    throw ContractError("split: val_frac must lie in (0,1)");
  }
  const auto fit = static_cast<std::size_t>(std::floor(static_cast<double>(total) * spec.train_frac));
  const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(fit) * spec.val_frac));
  return SplitBounds{fit - val, fit, total};
}

Dataset normalize_dataset(const Matrix& raw, const SplitSpec& split, std::size_t window) {
  if (window == 0) throw ContractError("normalize_dataset: window must be positive");
  if (raw.cols() < window + 2) {
    throw ContractError("normalize_dataset: series of length " + std::to_string(raw.cols()) +
                        " is shorter than window + 2 = " + std::to_string(window + 2));
  }
  Dataset ds;
  ds.raw = raw;
  ds.window = window;
  ds.split = compute_split(raw.cols(), split);
  const std::size_t n_train = ds.split.train_end;
  if (n_train == 0) throw ContractError("normalize_dataset: empty training segment");

  ds.features = Matrix(raw.rows(), raw.cols());
  ds.stats.resize(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto row = raw.row(i);
    double mean = 0.0;
    for (std::size_t t = 0; t < n_train; ++t) mean += row[t];
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (std::size_t t = 0; t < n_train; ++t) var += (row[t] - mean) * (row[t] - mean);
    var /= static_cast<double>(n_train);
    ChannelStats& st = ds.stats[i];
    st.mean = mean;
    st.std = std::sqrt(var);
    if (st.std < kConstantChannelStd) {
      st.std = 1.0;
      st.constant = true;
      ds.warnings.push_back("channel " + std::to_string(i) +
                            " is constant on the training segment; using divisor 1");
    }
    auto out = ds.features.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) out[t] = (row[t] - st.mean) / st.std;
  }
  return ds;
}

std::vector<Window> make_windows(const Dataset& ds, Segment segment,
                                 std::optional<std::uint64_t> shuffle_seed) {
  const std::size_t begin = ds.split.begin(segment);
  const std::size_t length = ds.split.length(segment);
  const std::size_t w = ds.window;
  if (length <= w) {
    throw ContractError(std::string("make_windows: ") + to_string(segment) + " segment has " +
                        std::to_string(length) + " steps, needs more than the window of " +
                        std::to_string(w));
  }
  const std::size_t n = ds.nodes();
  std::vector<Window> windows;
  windows.reserve(length - w);
  for (std::size_t start = begin; start + w < begin + length; ++start) {
    Window win;
    win.inputs.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
      Matrix col(n, 1);
      for (std::size_t i = 0; i < n; ++i) col(i, 0) = ds.features(i, start + k);
      win.inputs.push_back(std::move(col));
    }
    win.target_index = start + w;
    win.target = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) win.target(i, 0) = ds.features(i, win.target_index);
    windows.push_back(std::move(win));
  }
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(windows.begin(), windows.end());
  }
  return windows;
}

double mse_loss(const Matrix& pred, const Matrix& target) {
  const Matrix diff = subtract(pred, target);
  return reduce_mean(hadamard(diff, diff));
}

Var mse_loss(Tape& tape, Var pred, Var target) {
  const Var diff = tape.subtract(pred, target);
  return tape.reduce_mean(tape.hadamard(diff, diff));
}

AdamState make_adam_state(const AdamConfig& config, std::span<const Matrix* const> params) {
  AdamState s;
  s.config = config;
  for (const Matrix* p : params) {
    s.first_moment.emplace_back(p->rows(), p->cols());
    s.second_moment.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter/gradient/state counts differ");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& w = *params[p];
    if (!w.same_shape(grads[p]) || !w.same_shape(state.first_moment[p])) {
      throw ShapeError("adam_step: parameter " + std::to_string(p) + " is " + w.shape_string() +
                       ", gradient is " + grads[p].shape_string());
    }
    auto wv = w.data();
    auto gv = grads[p].data();
    auto m = state.first_moment[p].data();
    auto v = state.second_moment[p].data();
    for (std::size_t i = 0; i < wv.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gv[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gv[i] * gv[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      wv[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

BatchGradients batch_gradients(const TgcnModel& model, std::span<const Window> batch) {
  if (batch.empty()) throw ContractError("batch_gradients: empty batch");
  BatchGradients out;
  for (const Matrix* p : model.parameters()) out.grads.emplace_back(p->rows(), p->cols());
  Tape tape;
  for (const Window& win : batch) {
    tape.clear();
    const ModelVars vars = record_parameters(tape, model);
    const Var pred = forward(tape, model, vars, win.inputs);
    const Var loss = mse_loss(tape, pred, tape.constant(win.target));
    tape.backward(loss);
    out.loss += tape.value(loss)(0, 0);
    const auto params = tape.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto dst = out.grads[p].data();
      auto src = tape.gradient(params[p]).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (auto& g : out.grads)
    for (double& x : g.data()) x *= inv;
  return out;
}

namespace {

void clip_global_norm(std::vector<Matrix>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g.data()) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double k = max_norm / norm;
  for (auto& g : grads)
    for (double& x : g.data()) x *= k;
}

}  // namespace

TrainResult train(TgcnModel& model, const Dataset& ds, const TrainConfig& config) {
  if (config.epochs == 0) throw ContractError("train: epochs must be at least 1");
  if (config.batch_size == 0) throw ContractError("train: batch_size must be at least 1");
  if (model.dims().nodes != ds.nodes() || model.dims().window != ds.window) {
    throw ShapeError("train: model dims do not match dataset (" + std::to_string(ds.nodes()) +
                     " nodes, window " + std::to_string(ds.window) + ")");
  }
  std::vector<Window> train_windows = make_windows(ds, Segment::train);
  const std::vector<Window> val_windows = make_windows(ds, Segment::validation);

  auto params = model.parameters();
  AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  AdamState adam = make_adam_state(adam_config, params);
  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(train_windows.begin(), train_windows.end());
    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < train_windows.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, train_windows.size() - start);
      std::span<const Window> batch(train_windows.data() + start, count);
      BatchGradients bg = batch_gradients(model, batch);
      if (!std::isfinite(bg.loss)) {
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(batch_index));
      }
      if (config.clip_norm > 0.0) clip_global_norm(bg.grads, config.clip_norm);
      adam_step(adam, params, bg.grads);
      weighted_loss += bg.loss * static_cast<double>(count);
      ++batch_index;
    }
    EpochLoss e;
    e.epoch = epoch;
    e.train_mse = weighted_loss / static_cast<double>(train_windows.size());
    e.val_mse = evaluate_mse(model, val_windows);
    if (!std::isfinite(e.val_mse)) {
      throw DivergenceError("train: non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back(e);
  }

  const auto& h = result.history;
  if (h.size() > 5) {
    const double before = h[h.size() - 6].train_mse;
    const double now = h.back().train_mse;
    result.recent_relative_change = before > 0.0 ? std::abs(before - now) / before : 0.0;
    result.converged = result.recent_relative_change < kConvergedRelativeChange;
  }
  model.set_fitted(true);
  return result;
}

std::vector<Matrix> predict_all(const TgcnModel& model, std::span<const Window> windows) {
  std::vector<Matrix> out;
  out.reserve(windows.size());
  for (const Window& w : windows) out.push_back(predict(model, w.inputs));
  return out;
}

double evaluate_mse(const TgcnModel& model, std::span<const Window> windows) {
  if (windows.empty()) throw ContractError("evaluate_mse: no windows");
  double sum = 0.0;
  for (const Window& w : windows) sum += mse_loss(predict(model, w.inputs), w.target);
  return sum / static_cast<double>(windows.size());
}

double persistence_mse(std::span<const Window> windows) {
  if (windows.empty()) throw ContractError("persistence_mse: no windows");
  double sum = 0.0;
  for (const Window& w : windows) sum += mse_loss(w.inputs.back(), w.target);
  return sum / static_cast<double>(windows.size());
}

std::string loss_history_csv(const TrainResult& result) {
  std::string out = "epoch,train_mse,val_mse\n";
  for (const auto& e : result.history) {
    out += std::to_string(e.epoch);
    out += ',';
    out += format_double(e.train_mse);
    out += ',';
    out += format_double(e.val_mse);
    out += '\n';
  }
  return out;
}

}  // namespace faultsev
