#include "faultsev/graph.hpp"

#include <cmath>

#include "faultsev/error.hpp"

namespace faultsev {

void validate(const Graph& g) {
  const Matrix& a = g.adjacency;
  if (a.rows() == 0) throw ConfigError("graph: at least one node is required");
  if (a.rows() != a.cols()) throw ConfigError("graph: adjacency must be square, got " + a.shape_string());
  if (!g.node_labels.empty() && g.node_labels.size() != a.rows()) {
    throw ConfigError("graph: " + std::to_string(g.node_labels.size()) + " labels for " +
                    std::to_string(a.rows()) + " nodes");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a(i, i) != 0.0) {
      throw ConfigError("graph: adjacency diagonal must be zero (node " + std::to_string(i) + ")");
    }
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double v = a(i, j);
      if (v != 0.0 && v != 1.0) {
        throw ConfigError("graph: adjacency entries must be 0 or 1, got " + std::to_string(v) +
                        " at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (v != a(j, i)) {
        throw ConfigError("graph: adjacency is not symmetric at (" + std::to_string(i) + "," +
                        std::to_string(j) + ")");
      }
    }
  }
}

Graph graph_from_adjacency(Matrix adjacency, std::vector<std::string> labels) {
  Graph g{std::move(adjacency), std::move(labels)};
  validate(g);
  return g;
}

Graph graph_from_edges(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) throw ConfigError("graph: at least one node is required");
  Matrix a(n, n);
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) {
      throw ConfigError("graph: edge (" + std::to_string(i) + "," + std::to_string(j) +
                      ") out of range for " + std::to_string(n) + " nodes");
    }
    if (i == j) throw ConfigError("graph: self edge on node " + std::to_string(i));
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return graph_from_adjacency(std::move(a));
}

Graph graph_from_preset(std::string_view name) {
  if (name == "path4") {
    Graph g = graph_from_adjacency({{0, 1, 0, 0},
                                    {1, 0, 1, 0},
                                    {0, 1, 0, 1},
                                    {0, 0, 1, 0}});
    g.node_labels = {"bearing1", "bearing2", "bearing3", "bearing4"};
    return g;
  }
  if (name == "pair2") {
    Graph g = graph_from_adjacency({{0, 1}, {1, 0}});
    g.node_labels = {"vibration_rms", "rpm"};
    return g;
  }
  throw ConfigError("graph: unknown preset '" + std::string(name) + "' (expected path4 or pair2)");
}

Matrix add_self_loops(const Graph& g) {
  return add(g.adjacency, Matrix::identity(g.n_nodes()));
}

NormalizedGraph normalize(const Graph& g) {
  validate(g);
  const Matrix looped = add_self_loops(g);
  const std::size_t n = looped.rows();
  NormalizedGraph out;
  out.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.degree[i] += looped(i, j);
  out.a_hat = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (looped(i, j) != 0.0) {
        out.a_hat(i, j) = looped(i, j) / std::sqrt(out.degree[i] * out.degree[j]);
      }
  return out;
}

}  // namespace faultsev
