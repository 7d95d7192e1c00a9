#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "faultsev/graph.hpp"
#include "faultsev/ingest.hpp"
#include "faultsev/synthetic.hpp"

namespace faultsev {

/// Either a named preset ("path4", "pair2") or an explicit edge list.
struct GraphSpec {
  std::string preset;
  std::size_t n = 0;
  std::vector<Edge> edges;
};

Graph build_graph(const GraphSpec& spec);

struct InputSpec {
  SourceKind kind = SourceKind::synthetic;
  std::filesystem::path path;  // IMS directory or CSV file
  std::size_t channels = 0;    // IMS expected channel count; 0 = infer
};

struct RunConfig {
  std::string preset;
  GraphSpec graph;
  std::size_t window = 4;
  std::size_t hidden = 16;
  std::size_t layers = 2;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  double train_frac = 0.4;
  double val_frac = 0.2;
  double m = 2.0;
  std::uint64_t seed = 7;
  double clip_norm = 0.0;
  InputSpec input;
  SyntheticSpec synthetic;
  std::filesystem::path output_dir = "out";
};

/// "bearing", "fanjet" or "synthetic". Throws ConfigError for other names.
RunConfig preset_config(const std::string& name);

/// Parses a JSON document on top of the preset it names (default "synthetic").
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& config);

using ConfigOverride = std::pair<std::string, std::string>;

/// Preset -> file -> overrides, then validation. Override keys use dots for
/// nesting ("input.path", "synthetic.gain"); values are read as JSON when they
/// parse as JSON and as plain strings otherwise.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::optional<std::string>& preset,
                         const std::vector<ConfigOverride>& overrides);

/// Throws ConfigError naming the first offending field.
void validate(const RunConfig& config);

}  // namespace faultsev
