#include "faultsev/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"
#include "json.hpp"

namespace faultsev {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError("config: field '" + field + "' " + message);
}

std::size_t get_count(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  if (j.is_number_integer()) fail(field, "must be a non-negative integer, got " + j.dump());
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && std::floor(v) == v && v < 1e15) return static_cast<std::size_t>(v);
  }
  fail(field, "must be a non-negative integer, got " + j.dump());
}

double get_real(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number, got " + j.dump());
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "must be a string, got " + j.dump());
  return j.get<std::string>();
}

SourceKind parse_kind(const std::string& s) {
  if (s == "synthetic") return SourceKind::synthetic;
  if (s == "ims" || s == "ims-raw") return SourceKind::ims_raw;
  if (s == "csv") return SourceKind::csv;
  fail("input.kind", "must be one of synthetic, ims, csv; got '" + s + "'");
}

void check_keys(const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(prefix.empty() ? "<root>" : prefix, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(prefix.empty() ? key : prefix + "." + key, "is not a known setting");
  }
}

json graph_to_json(const GraphSpec& g) {
  if (!g.preset.empty()) return json{{"preset", g.preset}};
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  return json{{"n", g.n}, {"edges", edges}};
}

GraphSpec graph_from_json(const json& j) {
  check_keys(j, "graph", {"preset", "n", "edges"});
  GraphSpec g;
  if (j.contains("preset")) {
    if (j.contains("n") || j.contains("edges")) fail("graph", "takes either preset or n/edges, not both");
    g.preset = get_string(j.at("preset"), "graph.preset");
    return g;
  }
  if (!j.contains("n")) fail("graph", "needs a preset or n with edges");
  g.n = get_count(j.at("n"), "graph.n");
  if (j.contains("edges")) {
    const json& edges = j.at("edges");
    if (!edges.is_array()) fail("graph.edges", "must be a list of [i, j] pairs");
    for (const auto& e : edges) {
      if (!e.is_array() || e.size() != 2) fail("graph.edges", "must be a list of [i, j] pairs");
      g.edges.emplace_back(get_count(e[0], "graph.edges"), get_count(e[1], "graph.edges"));
    }
  }
  return g;
}

json to_json(const RunConfig& c) {
  const SyntheticSpec& s = c.synthetic;
  return json{
      {"preset", c.preset},
      {"graph", graph_to_json(c.graph)},
      {"window", c.window},
      {"hidden", c.hidden},
      {"layers", c.layers},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"train_frac", c.train_frac},
      {"val_frac", c.val_frac},
      {"m", c.m},
      {"seed", c.seed},
      {"clip_norm", c.clip_norm},
      {"input", {{"kind", c.input.kind == SourceKind::ims_raw ? "ims" : to_string(c.input.kind)},
                 {"path", c.input.path.generic_string()},
                 {"channels", c.input.channels}}},
      {"synthetic", {{"length", s.length},
                     {"onset", s.onset_fraction},
                     {"fault_nodes", s.fault_nodes},
                     {"gain", s.gain},
                     {"oscillation", s.fault_oscillation},
                     {"noise", s.noise},
                     {"period", s.period},
                     {"coupling", s.coupling}}},
      {"output_dir", c.output_dir.generic_string()},
  };
}

RunConfig from_json(const json& j) {
  check_keys(j, "", {"preset", "graph", "window", "hidden", "layers", "batch_size", "learning_rate",
                     "epochs", "train_frac", "val_frac", "m", "seed", "clip_norm", "input",
                     "synthetic", "output_dir"});
  RunConfig c;
  c.preset = get_string(j.at("preset"), "preset");
  c.graph = graph_from_json(j.at("graph"));
  c.window = get_count(j.at("window"), "window");
  c.hidden = get_count(j.at("hidden"), "hidden");
  c.layers = get_count(j.at("layers"), "layers");
  c.batch_size = get_count(j.at("batch_size"), "batch_size");
  c.learning_rate = get_real(j.at("learning_rate"), "learning_rate");
  c.epochs = get_count(j.at("epochs"), "epochs");
  c.train_frac = get_real(j.at("train_frac"), "train_frac");
  c.val_frac = get_real(j.at("val_frac"), "val_frac");
  c.m = get_real(j.at("m"), "m");
  c.seed = get_count(j.at("seed"), "seed");
  c.clip_norm = get_real(j.at("clip_norm"), "clip_norm");

  const json& in = j.at("input");
  check_keys(in, "input", {"kind", "path", "channels"});
  c.input.kind = parse_kind(get_string(in.at("kind"), "input.kind"));
  c.input.path = get_string(in.at("path"), "input.path");
  c.input.channels = get_count(in.at("channels"), "input.channels");

  const json& s = j.at("synthetic");
  check_keys(s, "synthetic",
             {"length", "onset", "fault_nodes", "gain", "oscillation", "noise", "period", "coupling"});
  c.synthetic.seed = c.seed;
  c.synthetic.length = get_count(s.at("length"), "synthetic.length");
  c.synthetic.onset_fraction = get_real(s.at("onset"), "synthetic.onset");
  c.synthetic.fault_nodes.clear();
  if (!s.at("fault_nodes").is_array()) fail("synthetic.fault_nodes", "must be a list of node indices");
  for (const auto& v : s.at("fault_nodes")) c.synthetic.fault_nodes.push_back(get_count(v, "synthetic.fault_nodes"));
  c.synthetic.gain = get_real(s.at("gain"), "synthetic.gain");
  c.synthetic.fault_oscillation = get_real(s.at("oscillation"), "synthetic.oscillation");
  c.synthetic.noise = get_real(s.at("noise"), "synthetic.noise");
  c.synthetic.period = get_real(s.at("period"), "synthetic.period");
  c.synthetic.coupling = get_real(s.at("coupling"), "synthetic.coupling");

  c.output_dir = get_string(j.at("output_dir"), "output_dir");
  return c;
}

// Applies a file or override document over a base; "graph" is replaced whole
// so a preset and an edge list never mix.
void overlay(json& base, const json& patch, const std::string& prefix = "") {
  if (!patch.is_object()) fail(prefix.empty() ? "<root>" : prefix, "must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) fail(field, "is not a known setting");
    if (key == "graph" && prefix.empty()) {
      base[key] = value;
    } else if (base[key].is_object() && value.is_object()) {
      overlay(base[key], value, field);
    } else {
      base[key] = value;
    }
  }
}

void apply_override(json& doc, const std::string& key, const std::string& raw) {
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  // Paths and names stay strings even when they look numeric.
  if (key == "input.path" || key == "output_dir" || key == "preset" || key == "graph.preset" ||
      key == "input.kind") {
    value = raw;
  }

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  if (parts.empty()) fail(key, "is not a known setting");

  if (parts[0] == "graph") {
    json& g = doc["graph"];
    if (parts.size() == 1) {
      g = value;
    } else if (parts.size() == 2 && parts[1] == "preset") {
      g = json{{"preset", value}};
    } else if (parts.size() == 2 && (parts[1] == "n" || parts[1] == "edges")) {
      g.erase("preset");
      g[parts[1]] = value;
    } else {
      fail(key, "is not a known setting");
    }
    return;
  }
  json* node = &doc;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) fail(key, "is not a known setting");
    node = &(*node)[parts[i]];
  }
  *node = value;
}

}  // namespace

Graph build_graph(const GraphSpec& spec) {
  if (!spec.preset.empty()) return graph_from_preset(spec.preset);
  return graph_from_edges(spec.n, spec.edges);
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "bearing") {
    c.graph.preset = "path4";
    c.window = 4;
    c.batch_size = 32;
    c.hidden = 128;
    c.layers = 2;
    c.learning_rate = 1e-3;
    c.epochs = 50;
    c.train_frac = 0.4;
    c.val_frac = 0.2;
    c.input.kind = SourceKind::ims_raw;
    c.input.channels = 4;
    return c;
  }
  if (name == "fanjet") {
    c.graph.preset = "pair2";
    c.window = 4;
    c.batch_size = 4;
    c.hidden = 256;
    c.layers = 2;
    c.learning_rate = 1e-3;
    c.epochs = 50;
    c.train_frac = 0.6;
    c.val_frac = 0.3;
    c.input.kind = SourceKind::csv;
    return c;
  }
  if (name == "synthetic") {
    c.graph.preset = "path4";
    c.window = 4;
    c.batch_size = 8;
    c.hidden = 16;
    c.layers = 2;
    c.learning_rate = 1e-3;
    c.epochs = 50;
    c.train_frac = 0.4;
    c.val_frac = 0.2;
    c.input.kind = SourceKind::synthetic;
    return c;
  }
  throw ConfigError("config: field 'preset' must be one of bearing, fanjet, synthetic; got '" + name + "'");
}

RunConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: document must be a JSON object");
  const std::string preset = doc.contains("preset") ? get_string(doc.at("preset"), "preset") : "synthetic";
  json base = to_json(preset_config(preset));
  overlay(base, doc);
  RunConfig c = from_json(base);
  validate(c);
  return c;
}

std::string config_to_json(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::optional<std::string>& preset,
                         const std::vector<ConfigOverride>& overrides) {
  json file_doc = json::object();
  if (file) {
    std::string text;
    try {
      text = read_text_file(*file);
    } catch (const DataError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    try {
      file_doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("config: " + file->string() + ": invalid JSON: " + e.what());
    }
    if (!file_doc.is_object()) throw ConfigError("config: " + file->string() + " must hold a JSON object");
  }
  std::string name = "synthetic";
  if (file_doc.contains("preset")) name = get_string(file_doc.at("preset"), "preset");
  if (preset) name = *preset;
  for (const auto& [k, v] : overrides)
    if (k == "preset") name = v;

  json doc = to_json(preset_config(name));
  file_doc.erase("preset");
  overlay(doc, file_doc);
  for (const auto& [k, v] : overrides) {
    if (k != "preset") apply_override(doc, k, v);
  }
  try {
    RunConfig c = from_json(doc);
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void validate(const RunConfig& c) {
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) fail(field, "must be positive");
  };
  auto fraction = [](double v, const char* field) {
    if (!(v > 0.0 && v < 1.0)) fail(field, "must lie in (0,1)");
  };
  positive(c.window, "window");
  positive(c.hidden, "hidden");
  positive(c.layers, "layers");
  positive(c.batch_size, "batch_size");
  positive(c.epochs, "epochs");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) fail("learning_rate", "must be positive");
  fraction(c.train_frac, "train_frac");
  fraction(c.val_frac, "val_frac");
  if (!(c.m >= 0.0) || !std::isfinite(c.m)) fail("m", "must be >= 0");
  if (!(c.clip_norm >= 0.0) || !std::isfinite(c.clip_norm)) fail("clip_norm", "must be >= 0 (0 disables clipping)");
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");

  Graph g;
  try {
    g = build_graph(c.graph);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: field 'graph': ") + e.what());
  }
  if (c.input.kind == SourceKind::synthetic) {
    const SyntheticSpec& s = c.synthetic;
    if (s.length < c.window + 2) fail("synthetic.length", "must be at least window + 2");
    fraction(s.onset_fraction, "synthetic.onset");
    for (std::size_t node : s.fault_nodes)
      if (node >= g.n_nodes()) fail("synthetic.fault_nodes", "contains node " + std::to_string(node) + " outside the graph");
    if (!(s.gain > 0.0)) fail("synthetic.gain", "must be positive");
    if (!(s.fault_oscillation >= 0.0)) fail("synthetic.oscillation", "must be >= 0");
    if (!(s.noise >= 0.0)) fail("synthetic.noise", "must be >= 0");
    if (!(s.period > 1.0)) fail("synthetic.period", "must exceed 1");
  } else {
    if (c.input.path.empty()) fail("input.path", "is required for " + std::string(to_string(c.input.kind)) + " input");
    if (c.input.kind == SourceKind::ims_raw && c.input.channels != 0 && c.input.channels != g.n_nodes()) {
      fail("input.channels", "must match the graph's " + std::to_string(g.n_nodes()) + " nodes");
    }
  }
}

}  // namespace faultsev
