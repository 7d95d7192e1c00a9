#include "faultsev/model.hpp"

#include <cmath>

#include "faultsev/error.hpp"
#include "faultsev/random.hpp"

namespace faultsev {

namespace {

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError("model: " + what + " is " + m.shape_string() + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix glorot(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = glorot_bound(fan_in, fan_out);
  Matrix m(fan_in, fan_out);
  for (double& x : m.data()) x = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

TgcnModel::TgcnModel(ModelDims dims, Graph graph, std::vector<TgcnLayer> layers,
                     Matrix readout_weight, Matrix readout_bias, std::uint64_t seed)
    : dims_(dims),
      graph_(std::move(graph)),
      normalized_(normalize(graph_)),
      layers_(std::move(layers)),
      readout_weight_(std::move(readout_weight)),
      readout_bias_(std::move(readout_bias)),
      seed_(seed) {
  check_shapes();
}

void TgcnModel::check_shapes() const {
  if (dims_.nodes == 0 || dims_.window == 0 || dims_.hidden == 0 || dims_.layers == 0) {
    throw ContractError("model: all dimensions must be positive");
  }
  if (graph_.n_nodes() != dims_.nodes) {
    throw ShapeError("model: graph has " + std::to_string(graph_.n_nodes()) + " nodes, dims say " +
                     std::to_string(dims_.nodes));
  }
  if (layers_.size() != dims_.layers) {
    throw ShapeError("model: " + std::to_string(layers_.size()) + " layers, dims say " +
                     std::to_string(dims_.layers));
  }
  const std::size_t h = dims_.hidden;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string tag = "layer " + std::to_string(l) + " ";
    const std::size_t f_in = l == 0 ? 1 : h;
    expect_shape(layers_[l].gcn.weight, f_in, h, tag + "gcn weight");
    const GruCell& g = layers_[l].gru;
    expect_shape(g.w_update, 2 * h, h, tag + "w_update");
    expect_shape(g.w_reset, 2 * h, h, tag + "w_reset");
    expect_shape(g.w_cand, 2 * h, h, tag + "w_cand");
    expect_shape(g.b_update, 1, h, tag + "b_update");
    expect_shape(g.b_reset, 1, h, tag + "b_reset");
    expect_shape(g.b_cand, 1, h, tag + "b_cand");
  }
  expect_shape(readout_weight_, h, 1, "readout weight");
  expect_shape(readout_bias_, 1, 1, "readout bias");
}

std::vector<Matrix*> TgcnModel::parameters() {
  std::vector<Matrix*> out;
  for (auto& l : layers_) {
    out.insert(out.end(), {&l.gcn.weight, &l.gru.w_update, &l.gru.w_reset, &l.gru.w_cand,
                           &l.gru.b_update, &l.gru.b_reset, &l.gru.b_cand});
  }
  out.push_back(&readout_weight_);
  out.push_back(&readout_bias_);
  return out;
}

std::vector<const Matrix*> TgcnModel::parameters() const {
  std::vector<const Matrix*> out;
  for (const auto& l : layers_) {
    out.insert(out.end(), {&l.gcn.weight, &l.gru.w_update, &l.gru.w_reset, &l.gru.w_cand,
                           &l.gru.b_update, &l.gru.b_reset, &l.gru.b_cand});
  }
  out.push_back(&readout_weight_);
  out.push_back(&readout_bias_);
  return out;
}

std::vector<std::string> TgcnModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* n : {"gcn.weight", "gru.w_update", "gru.w_reset", "gru.w_cand",
                          "gru.b_update", "gru.b_reset", "gru.b_cand"}) {
      names.push_back(p + n);
    }
  }
  names.emplace_back("readout.weight");
  names.emplace_back("readout.bias");
  return names;
}

std::size_t TgcnModel::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* p : parameters()) n += p->size();
  return n;
}

TgcnModel TgcnModel::with_graph(Graph graph) const {
  TgcnModel copy(dims_, std::move(graph), layers_, readout_weight_, readout_bias_, seed_);
  copy.fitted_ = fitted_;
  return copy;
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

TgcnModel init_params(std::uint64_t seed, const ModelDims& dims, const Graph& graph) {
  if (dims.nodes == 0 || dims.window == 0 || dims.hidden == 0 || dims.layers == 0) {
    throw ContractError("init_params: all dimensions must be positive");
  }
  Rng rng(seed);
  const std::size_t h = dims.hidden;
  std::vector<TgcnLayer> layers;
  layers.reserve(dims.layers);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    TgcnLayer layer;
    layer.gcn.weight = glorot(rng, l == 0 ? 1 : h, h);
    layer.gru.w_update = glorot(rng, 2 * h, h);
    layer.gru.w_reset = glorot(rng, 2 * h, h);
    layer.gru.w_cand = glorot(rng, 2 * h, h);
    layer.gru.b_update = Matrix(1, h);
    layer.gru.b_reset = Matrix(1, h);
    layer.gru.b_cand = Matrix(1, h);
    layers.push_back(std::move(layer));
  }
  Matrix readout = glorot(rng, h, 1);
  return TgcnModel(dims, graph, std::move(layers), std::move(readout), Matrix(1, 1), seed);
}

// ---- tape level ----

Var gcn_apply(Tape& tape, Var a_hat, Var x, Var weight) {
  return tape.sigmoid(tape.matmul(tape.matmul(a_hat, x), weight));
}

GruGates gru_step(Tape& tape, const GruVars& cell, Var gcn_out, Var h_prev) {
  GruGates g;
  const Var joint = tape.concat_features(gcn_out, h_prev);
  g.update = tape.sigmoid(tape.add_row_bias(tape.matmul(joint, cell.w_update), cell.b_update));
  g.reset = tape.sigmoid(tape.add_row_bias(tape.matmul(joint, cell.w_reset), cell.b_reset));
  const Var gated = tape.concat_features(gcn_out, tape.hadamard(g.reset, h_prev));
  g.candidate = tape.tanh(tape.add_row_bias(tape.matmul(gated, cell.w_cand), cell.b_cand));
  g.hidden = tape.add(tape.hadamard(g.update, h_prev),
                      tape.hadamard(tape.one_minus(g.update), g.candidate));
  return g;
}

ModelVars bind_parameters(Tape& tape, const TgcnModel& model, std::span<const Var> params) {
  const std::size_t expected = 7 * model.layers().size() + 2;
  if (params.size() != expected) {
    throw ContractError("bind_parameters: expected " + std::to_string(expected) +
                        " parameters, got " + std::to_string(params.size()));
  }
  ModelVars vars;
  vars.a_hat = tape.constant(model.normalized().a_hat);
  std::size_t k = 0;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    LayerVars lv;
    lv.gcn_weight = params[k++];
    lv.gru.w_update = params[k++];
    lv.gru.w_reset = params[k++];
    lv.gru.w_cand = params[k++];
    lv.gru.b_update = params[k++];
    lv.gru.b_reset = params[k++];
    lv.gru.b_cand = params[k++];
    vars.layers.push_back(lv);
  }
  vars.readout_weight = params[k++];
  vars.readout_bias = params[k++];
  return vars;
}

ModelVars record_parameters(Tape& tape, const TgcnModel& model) {
  std::vector<Var> params;
  for (const Matrix* p : model.parameters()) params.push_back(tape.parameter(*p));
  return bind_parameters(tape, model, params);
}

Var forward(Tape& tape, const TgcnModel& model, const ModelVars& vars,
            std::span<const Matrix> window) {
  const ModelDims& d = model.dims();
  if (window.size() != d.window) {
    throw ContractError("forward: window has " + std::to_string(window.size()) +
                        " steps, model expects " + std::to_string(d.window));
  }
  std::vector<Var> hidden;
  hidden.reserve(vars.layers.size());
  for (std::size_t l = 0; l < vars.layers.size(); ++l) hidden.push_back(tape.constant(Matrix(d.nodes, d.hidden)));

  for (const Matrix& x_t : window) {
    if (x_t.rows() != d.nodes || x_t.cols() != 1) {
      throw ShapeError("forward: input step is " + x_t.shape_string() + ", expected " +
                       std::to_string(d.nodes) + "x1");
    }
    Var input = tape.constant(x_t);
    for (std::size_t l = 0; l < vars.layers.size(); ++l) {
      const Var conv = gcn_apply(tape, vars.a_hat, input, vars.layers[l].gcn_weight);
      hidden[l] = gru_step(tape, vars.layers[l].gru, conv, hidden[l]).hidden;
      input = hidden[l];
    }
  }
  return tape.add_row_bias(tape.matmul(hidden.back(), vars.readout_weight), vars.readout_bias);
}

// ---- plain evaluation ----

Matrix gcn_apply(const GcnLayer& layer, const Matrix& a_hat, const Matrix& x) {
  Tape tape;
  return tape.value(gcn_apply(tape, tape.constant(a_hat), tape.constant(x), tape.constant(layer.weight)));
}

GruStepValues gru_step(const GruCell& cell, const Matrix& gcn_out, const Matrix& h_prev) {
  Tape tape;
  GruVars v{tape.constant(cell.w_update), tape.constant(cell.w_reset), tape.constant(cell.w_cand),
            tape.constant(cell.b_update), tape.constant(cell.b_reset), tape.constant(cell.b_cand)};
  const GruGates g = gru_step(tape, v, tape.constant(gcn_out), tape.constant(h_prev));
  return {tape.value(g.update), tape.value(g.reset), tape.value(g.candidate), tape.value(g.hidden)};
}

Matrix predict(const TgcnModel& model, std::span<const Matrix> window) {
  Tape tape;
  std::vector<Var> params;
  for (const Matrix* p : model.parameters()) params.push_back(tape.constant(*p));
  const ModelVars vars = bind_parameters(tape, model, params);
  return tape.value(forward(tape, model, vars, window));
}

}  // namespace faultsev
