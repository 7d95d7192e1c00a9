#include "faultsev/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"

namespace faultsev {

namespace {

// Six dot-separated integer fields: year.month.day.hour.minute.second
bool parse_timestamp(const std::string& name, std::array<long, 6>& out) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t end = k + 1 < out.size() ? name.find('.', pos) : name.size();
    if (end == std::string::npos || end == pos) return false;
    const char* first = name.data() + pos;
    const char* last = name.data() + end;
    const auto [ptr, ec] = std::from_chars(first, last, out[k]);
    if (ec != std::errc() || ptr != last) return false;
    pos = end + 1;
  }
  return true;
}

}  // namespace

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::ims_raw: return "ims-raw";
    case SourceKind::csv: return "csv";
    case SourceKind::synthetic: return "synthetic";
  }
  return "?";
}

std::vector<double> column_rms(const Matrix& samples) {
  if (samples.rows() == 0) throw DataError("rms: snapshot has no samples");
  std::vector<double> out(samples.cols(), 0.0);
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    const auto row = samples.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * row[c];
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(samples.rows()));
  return out;
}

Matrix read_ims_snapshot(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("ims: cannot open " + file.string());
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string field;
    std::size_t count = 0;
    while (fields >> field) {
      values.push_back(parse_double(field, "ims: " + file.string() + ":" + std::to_string(line_no)));
      ++count;
    }
    if (count == 0) continue;
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw DataError("ims: " + file.string() + ":" + std::to_string(line_no) + ": ragged row with " +
                      std::to_string(count) + " values, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("ims: " + file.string() + " contains no samples");
  return Matrix(rows, cols, std::move(values));
}

bool is_ims_timestamp(const std::string& filename) {
  std::array<long, 6> ts{};
  return parse_timestamp(filename, ts);
}

FeatureTable ingest_ims_files(std::vector<std::filesystem::path> files, std::size_t channels) {
  if (files.empty()) throw DataError("ims: no snapshot files");
  std::vector<std::pair<std::array<long, 6>, std::filesystem::path>> keyed;
  keyed.reserve(files.size());
  for (auto& f : files) {
    std::array<long, 6> ts{};
    if (!parse_timestamp(f.filename().string(), ts)) {
      throw DataError("ims: file name is not a timestamp: " + f.string());
    }
    keyed.emplace_back(ts, std::move(f));
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t k = 1; k < keyed.size(); ++k) {
    if (keyed[k].first == keyed[k - 1].first) {
      throw DataError("ims: duplicate timestamp in " + keyed[k].second.string());
    }
  }

  FeatureTable table;
  table.manifest.kind = SourceKind::ims_raw;
  std::vector<std::vector<double>> columns;
  columns.reserve(keyed.size());
  for (const auto& [ts, path] : keyed) {
    const Matrix snap = read_ims_snapshot(path);
    if (channels == 0) channels = snap.cols();
    if (snap.cols() != channels) {
      throw DataError("ims: " + path.string() + " has " + std::to_string(snap.cols()) +
                      " channels, expected " + std::to_string(channels));
    }
    if (table.manifest.files.empty()) {
      table.manifest.samples_per_snapshot = snap.rows();
    } else if (table.manifest.samples_per_snapshot != snap.rows()) {
      table.manifest.samples_per_snapshot = 0;
    }
    columns.push_back(column_rms(snap));
    table.manifest.files.push_back(path);
  }
  table.manifest.channels = channels;
  table.values = Matrix(channels, columns.size());
  for (std::size_t t = 0; t < columns.size(); ++t)
    for (std::size_t c = 0; c < channels; ++c) table.values(c, t) = columns[t][c];
  for (std::size_t c = 0; c < channels; ++c) table.labels.push_back("ch" + std::to_string(c + 1));
  return table;
}

FeatureTable ingest_ims(const std::filesystem::path& dir, std::size_t channels) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw DataError("ims: not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    files.push_back(entry.path());
  }
  return ingest_ims_files(std::move(files), channels);
}

FeatureTable ingest_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv_file(path);
  if (csv.rows.empty()) throw DataError("csv: " + path.string() + " has a header but no data rows");
  FeatureTable table;
  table.labels = csv.header;
  table.manifest.kind = SourceKind::csv;
  table.manifest.files = {path};
  table.manifest.channels = csv.header.size();
  table.values = Matrix(csv.header.size(), csv.rows.size());
  for (std::size_t t = 0; t < csv.rows.size(); ++t) {
    const std::string where = "csv: " + path.string() + " row " + std::to_string(t + 1) + " (line " +
                              std::to_string(csv.line_numbers[t]) + ")";
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      if (csv.rows[t][c].empty()) throw DataError(where + ": missing value for '" + csv.header[c] + "'");
      table.values(c, t) = parse_double(csv.rows[t][c], where);
    }
  }
  return table;
}

std::string features_csv(const Matrix& values, std::span<const std::string> labels) {
  if (labels.size() != values.rows()) throw ShapeError("features_csv: label count mismatch");
  std::string out;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (c) out += ',';
    out += labels[c];
  }
  out += '\n';
  for (std::size_t t = 0; t < values.cols(); ++t) {
    for (std::size_t c = 0; c < values.rows(); ++c) {
      if (c) out += ',';
      out += format_double(values(c, t));
    }
    out += '\n';
  }
  return out;
}

}  // namespace faultsev
