#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "faultsev/graph.hpp"
#include "faultsev/matrix.hpp"

namespace faultsev {

/// Fault-injection scenario: graph-coupled sinusoids plus Gaussian noise; from
/// the onset on, faulted nodes are amplified by `gain` and pick up an extra
/// oscillation at an unrelated frequency.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  std::size_t length = 1000;           // T
  double onset_fraction = 0.5;
  std::vector<std::size_t> fault_nodes = {0};
  double gain = 1.5;
  double fault_oscillation = 0.5;      // amplitude of the incoherent component
  double noise = 0.05;                 // Gaussian noise std
  double period = 10.0;                // base period in samples
  double coupling = 0.5;               // weight of the neighbours' mean waveform
};

struct SyntheticSeries {
  Matrix values;  // N x T
  std::size_t onset_index = 0;
  std::vector<std::string> labels;
};

/// Node count comes from the graph. Throws ConfigError for bad parameters.
SyntheticSeries generate_synthetic(const SyntheticSpec& spec, const Graph& graph);

std::size_t onset_index(std::size_t length, double onset_fraction);

}  // namespace faultsev
