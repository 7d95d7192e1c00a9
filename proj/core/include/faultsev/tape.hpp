#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "faultsev/matrix.hpp"

namespace faultsev {

/// Handle to a node recorded on a Tape. Only meaningful for the tape that made it.
struct Var {
  std::uint32_t id = UINT32_MAX;

  bool valid() const noexcept { return id != UINT32_MAX; }
  auto operator<=>(const Var&) const = default;
};

/// Define-by-run reverse-mode recorder over dense matrices.
///
/// Every operation computes its value eagerly and appends a node whose inputs
/// precede it, so the node vector is already in topological order. backward()
/// walks it once in reverse. Values are computed with the plain kernels from
/// matrix.hpp, so a recorded forward pass is bit-identical to an unrecorded one.
///
/// A tape is single-threaded. Independent tapes may live on different threads.
class Tape {
 public:
  Var constant(Matrix value);
  /// Leaf whose gradient is reported by gradient() and by backward(tape, loss).
  Var parameter(Matrix value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var subtract(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var add_row_bias(Var a, Var bias);
  Var scale(Var a, double factor);
  /// 1 - a, elementwise.
  Var one_minus(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var concat_features(Var a, Var b);
  Var transpose(Var a);
  /// 1x1 result.
  Var reduce_mean(Var a);
  /// 1x1 result; the gradient flows to the first maximal entry.
  Var reduce_max(Var a);

  const Matrix& value(Var v) const;
  /// Adjoint after the last backward(); zero for nodes the loss does not depend on.
  const Matrix& gradient(Var v) const;

  /// Accumulates d(loss)/d(node) for every node. loss must be 1x1.
  void backward(Var loss);

  std::span<const Var> parameters() const noexcept { return params_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Drops all nodes; keeps allocated capacity for reuse across windows.
  void clear();

 private:
  enum class Op : std::uint8_t {
    leaf,
    matmul,
    add,
    subtract,
    hadamard,
    add_row_bias,
    scale,
    one_minus,
    sigmoid,
    tanh,
    concat,
    transpose,
    reduce_mean,
    reduce_max,
  };

  struct Node {
    Op op = Op::leaf;
    std::uint32_t a = UINT32_MAX;
    std::uint32_t b = UINT32_MAX;
    bool needs_grad = false;
    double aux = 0.0;  // scale factor or argmax index
    Matrix value;
    Matrix adjoint;
  };

  Var push(Op op, Matrix value, Var a = {}, Var b = {}, double aux = 0.0);
  const Node& node(Var v) const;
  void propagate(const Node& n);

  std::vector<Node> nodes_;
  std::vector<Var> params_;
  bool has_gradients_ = false;
};

using GradientMap = std::map<Var, Matrix>;

/// Runs tape.backward(loss) and returns the gradient of every registered parameter.
GradientMap backward(Tape& tape, Var loss);

}  // namespace faultsev
