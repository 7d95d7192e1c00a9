#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "faultsev/graph.hpp"
#include "faultsev/matrix.hpp"
#include "faultsev/tape.hpp"

namespace faultsev {

struct ModelDims {
  std::size_t nodes = 0;   // N
  std::size_t window = 0;  // w, input steps per prediction
  std::size_t hidden = 0;  // H, GRU width and GCN output width
  std::size_t layers = 2;  // stacked GCN+GRU cells

  bool operator==(const ModelDims&) const = default;
};

/// Graph convolution sigma(A_hat X W). Weight is F_in x F_out.
struct GcnLayer {
  Matrix weight;
};

/// GRU whose gate inputs are [gcn_out, h_prev]. Weights are (F_gcn + H) x H, biases 1 x H.
struct GruCell {
  Matrix w_update, w_reset, w_cand;
  Matrix b_update, b_reset, b_cand;

  std::size_t hidden_dim() const noexcept { return b_update.cols(); }
};

struct TgcnLayer {
  GcnLayer gcn;
  GruCell gru;
};

/// Stacked T-GCN forecaster with a node-shared linear readout H -> 1.
///
/// Parameters, in declared (checkpoint) order: for each layer the GCN weight,
/// then w_update, w_reset, w_cand, b_update, b_reset, b_cand; finally the
/// readout weight (H x 1) and readout bias (1 x 1).
class TgcnModel {
 public:
  TgcnModel(ModelDims dims, Graph graph, std::vector<TgcnLayer> layers, Matrix readout_weight,
            Matrix readout_bias, std::uint64_t seed = 0);

  const ModelDims& dims() const noexcept { return dims_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Graph& graph() const noexcept { return graph_; }
  const NormalizedGraph& normalized() const noexcept { return normalized_; }
  const std::vector<TgcnLayer>& layers() const noexcept { return layers_; }
  std::vector<TgcnLayer>& layers() noexcept { return layers_; }
  const Matrix& readout_weight() const noexcept { return readout_weight_; }
  const Matrix& readout_bias() const noexcept { return readout_bias_; }

  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;

  /// Set once trained (or loaded from a trained checkpoint); scoring requires it.
  bool fitted() const noexcept { return fitted_; }
  void set_fitted(bool fitted) noexcept { fitted_ = fitted; }

  /// Same model on a different graph of the same size (used by equivariance checks).
  TgcnModel with_graph(Graph graph) const;

 private:
  void check_shapes() const;

  ModelDims dims_;
  Graph graph_;
  NormalizedGraph normalized_;
  std::vector<TgcnLayer> layers_;
  Matrix readout_weight_;
  Matrix readout_bias_;
  std::uint64_t seed_ = 0;
  bool fitted_ = false;
};

/// Glorot-uniform weights in +/- sqrt(6 / (fan_in + fan_out)), zero biases.
TgcnModel init_params(std::uint64_t seed, const ModelDims& dims, const Graph& graph);

double glorot_bound(std::size_t fan_in, std::size_t fan_out);

// ---- Tape-level building blocks -------------------------------------------------

struct GruVars {
  Var w_update, w_reset, w_cand, b_update, b_reset, b_cand;
};

struct GruGates {
  Var update, reset, candidate, hidden;
};

struct LayerVars {
  Var gcn_weight;
  GruVars gru;
};

struct ModelVars {
  Var a_hat;
  std::vector<LayerVars> layers;
  Var readout_weight, readout_bias;
};

Var gcn_apply(Tape& tape, Var a_hat, Var x, Var weight);
GruGates gru_step(Tape& tape, const GruVars& cell, Var gcn_out, Var h_prev);

/// Registers every model parameter on the tape in declared order.
ModelVars record_parameters(Tape& tape, const TgcnModel& model);

/// Interprets `params` (declared order) as the model's parameters; A_hat becomes a constant.
ModelVars bind_parameters(Tape& tape, const TgcnModel& model, std::span<const Var> params);

/// One-step-ahead prediction (N x 1) from a window of w inputs, each N x 1.
/// Hidden states start at zero for every window.
Var forward(Tape& tape, const TgcnModel& model, const ModelVars& vars,
            std::span<const Matrix> window);

// ---- Plain evaluation ----------------------------------------------------------

Matrix gcn_apply(const GcnLayer& layer, const Matrix& a_hat, const Matrix& x);

struct GruStepValues {
  Matrix update, reset, candidate, hidden;
};
GruStepValues gru_step(const GruCell& cell, const Matrix& gcn_out, const Matrix& h_prev);

Matrix predict(const TgcnModel& model, std::span<const Matrix> window);

}  // namespace faultsev
