#include "faultsev/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "faultsev/error.hpp"
#include "json.hpp"

namespace faultsev {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "faultsev-checkpoint";
constexpr int kVersion = 1;

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw DataError("checkpoint: " + what + " has " + std::to_string(data.size()) +
                    " values for shape " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

std::string checkpoint_to_json(const TgcnModel& model) {
  const ModelDims& d = model.dims();
  json params = json::array();
  const auto names = model.parameter_names();
  const auto values = model.parameters();
  for (std::size_t i = 0; i < values.size(); ++i) {
    json p = matrix_to_json(*values[i]);
    p["name"] = names[i];
    params.push_back(std::move(p));
  }
  json doc{
      {"format", kFormat},
      {"version", kVersion},
      {"dims", {{"nodes", d.nodes}, {"window", d.window}, {"hidden", d.hidden}, {"layers", d.layers}}},
      {"seed", model.seed()},
      {"fitted", model.fitted()},
      {"graph", {{"adjacency", matrix_to_json(model.graph().adjacency)},
                 {"labels", model.graph().node_labels}}},
      {"parameters", std::move(params)},
  };
  return doc.dump(1) + "\n";
}

TgcnModel checkpoint_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) throw DataError("checkpoint: unknown format");
    if (doc.at("version").get<int>() != kVersion) throw DataError("checkpoint: unsupported version");
    const json& jd = doc.at("dims");
    ModelDims dims{jd.at("nodes").get<std::size_t>(), jd.at("window").get<std::size_t>(),
                   jd.at("hidden").get<std::size_t>(), jd.at("layers").get<std::size_t>()};
    Graph graph = graph_from_adjacency(matrix_from_json(doc.at("graph").at("adjacency"), "adjacency"),
                                       doc.at("graph").at("labels").get<std::vector<std::string>>());

    // Start from a correctly shaped model, then overwrite every parameter.
    TgcnModel model = init_params(doc.at("seed").get<std::uint64_t>(), dims, graph);
    const json& params = doc.at("parameters");
    auto slots = model.parameters();
    const auto names = model.parameter_names();
    if (params.size() != slots.size()) {
      throw DataError("checkpoint: " + std::to_string(params.size()) + " parameters, model needs " +
                      std::to_string(slots.size()));
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (params[i].at("name").get<std::string>() != names[i]) {
        throw DataError("checkpoint: parameter " + std::to_string(i) + " is '" +
                        params[i].at("name").get<std::string>() + "', expected '" + names[i] + "'");
      }
      Matrix m = matrix_from_json(params[i], names[i]);
      if (!m.same_shape(*slots[i])) {
        throw DataError("checkpoint: " + names[i] + " is " + m.shape_string() + ", expected " +
                        slots[i]->shape_string());
      }
      *slots[i] = std::move(m);
    }
    model.set_fitted(doc.at("fitted").get<bool>());
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const TgcnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot write " + path.string());
  out << checkpoint_to_json(model);
}

TgcnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace faultsev
