#include "faultsev/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "faultsev/error.hpp"
#include "faultsev/random.hpp"

namespace faultsev {

std::size_t onset_index(std::size_t length, double onset_fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(length) * onset_fraction));
}

SyntheticSeries generate_synthetic(const SyntheticSpec& spec, const Graph& graph) {
  validate(graph);
  const std::size_t n = graph.n_nodes();
  if (!(spec.onset_fraction > 0.0 && spec.onset_fraction < 1.0)) {
    throw ConfigError("synthetic.onset must lie in (0,1)");
  }
  if (spec.length < 2) throw ConfigError("synthetic.length must be at least 2");
  if (!(spec.period > 1.0)) throw ConfigError("synthetic.period must exceed 1");
  if (!(spec.noise >= 0.0)) throw ConfigError("synthetic.noise must be >= 0");
  if (!(spec.gain > 0.0)) throw ConfigError("synthetic.gain must be positive");
  if (!(spec.fault_oscillation >= 0.0)) throw ConfigError("synthetic.oscillation must be >= 0");
  std::vector<bool> faulted(n, false);
  for (std::size_t node : spec.fault_nodes) {
    if (node >= n) {
      throw ConfigError("synthetic.fault_nodes: node " + std::to_string(node) + " out of range for " +
                        std::to_string(n) + " nodes");
    }
    faulted[node] = true;
  }

  Rng rng(spec.seed);
  const double omega = 2.0 * std::numbers::pi / spec.period;
  // Incommensurate with the base frequency so the fault component never phase-locks.
  const double fault_omega = omega * (std::numbers::sqrt2 + 0.5);
  std::vector<double> phase(n);
  std::vector<double> fault_phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    phase[i] = 0.6 * static_cast<double>(i) + rng.uniform(0.0, 0.2);
    fault_phase[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  SyntheticSeries out;
  out.values = Matrix(n, spec.length);
  out.onset_index = onset_index(spec.length, spec.onset_fraction);
  for (std::size_t i = 0; i < n; ++i) out.labels.push_back("node" + std::to_string(i));

  for (std::size_t t = 0; t < spec.length; ++t) {
    const double time = static_cast<double>(t);
    for (std::size_t i = 0; i < n; ++i) {
      double neighbours = 0.0;
      std::size_t degree = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (graph.adjacency(i, j) != 0.0) {
          neighbours += std::sin(omega * time + phase[j]);
          ++degree;
        }
      }
      double clean = std::sin(omega * time + phase[i]);
      if (degree > 0) clean += spec.coupling * neighbours / static_cast<double>(degree);
      double value = clean;
      if (faulted[i] && t >= out.onset_index) {
        value = spec.gain * clean + spec.fault_oscillation * std::sin(fault_omega * time + fault_phase[i]);
      }
      out.values(i, t) = value + spec.noise * rng.normal();
    }
  }
  return out;
}

}  // namespace faultsev
