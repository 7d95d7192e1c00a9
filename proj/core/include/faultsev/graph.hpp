#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "faultsev/matrix.hpp"

namespace faultsev {

/// Undirected sensor graph with a binary, symmetric, zero-diagonal adjacency.
struct Graph {
  Matrix adjacency;
  std::vector<std::string> node_labels;

  std::size_t n_nodes() const noexcept { return adjacency.rows(); }
};

/// Self-looped, symmetrically normalized adjacency D^-1/2 (A + I) D^-1/2.
struct NormalizedGraph {
  Matrix a_hat;
  std::vector<double> degree;  // row sums of A + I
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Throws ConfigError unless the adjacency is square, binary, symmetric, zero-diagonal, N >= 1.
void validate(const Graph& g);

/// Builds and validates a graph from an explicit adjacency. Never symmetrizes.
Graph graph_from_adjacency(Matrix adjacency, std::vector<std::string> labels = {});

/// Undirected edge list; both orientations of each edge are set.
Graph graph_from_edges(std::size_t n, const std::vector<Edge>& edges);

/// Named layouts: "path4" (four bearings on one shaft, neighbours only) and
/// "pair2" (fan vibration and RPM, mutually coupled).
Graph graph_from_preset(std::string_view name);

Matrix add_self_loops(const Graph& g);
NormalizedGraph normalize(const Graph& g);

}  // namespace faultsev
