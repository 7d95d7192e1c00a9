#include "faultsev/tape.hpp"

#include <string>

#include "faultsev/error.hpp"

namespace faultsev {

namespace {

// out += g * b^T
void accumulate_matmul_nt(Matrix& out, const Matrix& g, const Matrix& b) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto g_row = g.row(i);
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < b.rows(); ++k) {
      auto b_row = b.row(k);
      double s = 0.0;
      for (std::size_t j = 0; j < g_row.size(); ++j) s += g_row[j] * b_row[j];
      out_row[k] += s;
    }
  }
}

// out += a^T * g
void accumulate_matmul_tn(Matrix& out, const Matrix& a, const Matrix& g) {
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto a_row = a.row(k);
    auto g_row = g.row(k);
    for (std::size_t i = 0; i < a_row.size(); ++i) {
      const double aki = a_row[i];
      if (aki == 0.0) continue;
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < g_row.size(); ++j) out_row[j] += aki * g_row[j];
    }
  }
}

template <class F>
void accumulate(Matrix& out, const Matrix& g, F f) {
  auto dst = out.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += f(i, src[i]);
}

}  // namespace

Var Tape::push(Op op, Matrix value, Var a, Var b, double aux) {
  if (nodes_.size() >= UINT32_MAX - 1) throw ContractError("Tape: node limit reached");
  Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  n.aux = aux;
  n.needs_grad = (a.valid() && nodes_[a.id].needs_grad) || (b.valid() && nodes_[b.id].needs_grad);
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  has_gradients_ = false;
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw ContractError("Tape: variable " + std::to_string(v.id) + " is not on this tape");
  }
  return nodes_[v.id];
}

Var Tape::constant(Matrix value) { return push(Op::leaf, std::move(value)); }

Var Tape::parameter(Matrix value) {
  Var v = push(Op::leaf, std::move(value));
  nodes_[v.id].needs_grad = true;
  params_.push_back(v);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  return push(Op::matmul, faultsev::matmul(node(a).value, node(b).value), a, b);
}

Var Tape::add(Var a, Var b) { return push(Op::add, faultsev::add(node(a).value, node(b).value), a, b); }

Var Tape::subtract(Var a, Var b) {
  return push(Op::subtract, faultsev::subtract(node(a).value, node(b).value), a, b);
}

Var Tape::hadamard(Var a, Var b) {
  return push(Op::hadamard, faultsev::hadamard(node(a).value, node(b).value), a, b);
}

Var Tape::add_row_bias(Var a, Var bias) {
  return push(Op::add_row_bias, faultsev::add_row_bias(node(a).value, node(bias).value), a, bias);
}

Var Tape::scale(Var a, double factor) {
  return push(Op::scale, faultsev::scale(node(a).value, factor), a, {}, factor);
}

Var Tape::one_minus(Var a) {
  const Matrix& x = node(a).value;
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = 1.0 - x.data()[i];
  return push(Op::one_minus, std::move(out), a);
}

Var Tape::sigmoid(Var a) { return push(Op::sigmoid, faultsev::sigmoid(node(a).value), a); }

Var Tape::tanh(Var a) { return push(Op::tanh, faultsev::tanh(node(a).value), a); }

Var Tape::concat_features(Var a, Var b) {
  return push(Op::concat, faultsev::concat_features(node(a).value, node(b).value), a, b);
}

Var Tape::transpose(Var a) { return push(Op::transpose, faultsev::transpose(node(a).value), a); }

Var Tape::reduce_mean(Var a) {
  return push(Op::reduce_mean, Matrix(1, 1, faultsev::reduce_mean(node(a).value)), a);
}

Var Tape::reduce_max(Var a) {
  const Matrix& x = node(a).value;
  if (x.empty()) throw ShapeError("reduce_max: empty matrix");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x.data()[i] > x.data()[arg]) arg = i;
  return push(Op::reduce_max, Matrix(1, 1, x.data()[arg]), a, {}, static_cast<double>(arg));
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::gradient(Var v) const {
  const Node& n = node(v);
  if (!has_gradients_) throw ContractError("Tape::gradient: backward() has not run");
  return n.adjoint;
}

void Tape::clear() {
  nodes_.clear();
  params_.clear();
  has_gradients_ = false;
}

void Tape::backward(Var loss) {
  const Node& l = node(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw ContractError("backward: loss must be scalar, got " + l.value.shape_string());
  }
  for (auto& n : nodes_) {
    if (n.adjoint.same_shape(n.value)) {
      n.adjoint.fill(0.0);
    } else {
      n.adjoint = Matrix(n.value.rows(), n.value.cols());
    }
  }
  nodes_[loss.id].adjoint(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.op == Op::leaf || !n.needs_grad) continue;
    propagate(n);
  }
  has_gradients_ = true;
}

void Tape::propagate(const Node& n) {
  const Matrix& g = n.adjoint;
  Node* a = n.a != UINT32_MAX && nodes_[n.a].needs_grad ? &nodes_[n.a] : nullptr;
  Node* b = n.b != UINT32_MAX && nodes_[n.b].needs_grad ? &nodes_[n.b] : nullptr;

  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matmul:
      if (a) accumulate_matmul_nt(a->adjoint, g, nodes_[n.b].value);
      if (b) accumulate_matmul_tn(b->adjoint, nodes_[n.a].value, g);
      break;
    case Op::add:
      if (a) accumulate(a->adjoint, g, [](std::size_t, double x) { return x; });
      if (b) accumulate(b->adjoint, g, [](std::size_t, double x) { return x; });
      break;
    case Op::subtract:
      if (a) accumulate(a->adjoint, g, [](std::size_t, double x) { return x; });
      if (b) accumulate(b->adjoint, g, [](std::size_t, double x) { return -x; });
      break;
    case Op::hadamard: {
      const auto av = nodes_[n.a].value.data();
      const auto bv = nodes_[n.b].value.data();
      if (a) accumulate(a->adjoint, g, [&](std::size_t i, double x) { return x * bv[i]; });
      if (b) accumulate(b->adjoint, g, [&](std::size_t i, double x) { return x * av[i]; });
      break;
    }
    case Op::add_row_bias:
      if (a) accumulate(a->adjoint, g, [](std::size_t, double x) { return x; });
      if (b) {
        auto bias = b->adjoint.row(0);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto gr = g.row(r);
          for (std::size_t j = 0; j < gr.size(); ++j) bias[j] += gr[j];
        }
      }
      break;
    case Op::scale:
      if (a) accumulate(a->adjoint, g, [k = n.aux](std::size_t, double x) { return k * x; });
      break;
    case Op::one_minus:
      if (a) accumulate(a->adjoint, g, [](std::size_t, double x) { return -x; });
      break;
    case Op::sigmoid: {
      const auto y = n.value.data();
      if (a) accumulate(a->adjoint, g, [&](std::size_t i, double x) { return x * y[i] * (1.0 - y[i]); });
      break;
    }
    case Op::tanh: {
      const auto y = n.value.data();
      if (a) accumulate(a->adjoint, g, [&](std::size_t i, double x) { return x * (1.0 - y[i] * y[i]); });
      break;
    }
    case Op::concat: {
      const std::size_t left = nodes_[n.a].value.cols();
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto gr = g.row(r);
        if (a) {
          auto dst = a->adjoint.row(r);
          for (std::size_t j = 0; j < left; ++j) dst[j] += gr[j];
        }
        if (b) {
          auto dst = b->adjoint.row(r);
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += gr[left + j];
        }
      }
      break;
    }
    case Op::transpose:
      if (a) {
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) a->adjoint(c, r) += g(r, c);
      }
      break;
    case Op::reduce_mean:
      if (a) {
        const double share = g(0, 0) / static_cast<double>(a->value.size());
        accumulate(a->adjoint, a->value, [share](std::size_t, double) { return share; });
      }
      break;
    case Op::reduce_max:
      if (a) a->adjoint.data()[static_cast<std::size_t>(n.aux)] += g(0, 0);
      break;
  }
}

GradientMap backward(Tape& tape, Var loss) {
  tape.backward(loss);
  GradientMap grads;
  for (Var p : tape.parameters()) grads.emplace(p, tape.gradient(p));
  return grads;
}

}  // namespace faultsev
