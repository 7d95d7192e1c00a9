#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "faultsev/matrix.hpp"

namespace faultsev {

enum class SourceKind { ims_raw, csv, synthetic };

const char* to_string(SourceKind kind);

struct IngestManifest {
  SourceKind kind = SourceKind::csv;
  std::vector<std::filesystem::path> files;  // chronological
  std::size_t channels = 0;
  std::size_t samples_per_snapshot = 0;      // IMS only; 0 when unknown or varying
};

struct FeatureTable {
  Matrix values;  // N x T
  std::vector<std::string> labels;
  IngestManifest manifest;
};

/// Root mean square of each column of a samples x channels block.
std::vector<double> column_rms(const Matrix& samples);

/// Whitespace-separated numeric snapshot (one row per sample, one column per channel).
Matrix read_ims_snapshot(const std::filesystem::path& file);

/// True for IMS-style names such as 2004.02.12.10.32.39.
bool is_ims_timestamp(const std::string& filename);

/// Sorts snapshot files by the timestamp in their names, then reduces each to
/// one RMS column per channel. `channels` = 0 accepts whatever the first file has.
FeatureTable ingest_ims_files(std::vector<std::filesystem::path> files, std::size_t channels);
FeatureTable ingest_ims(const std::filesystem::path& dir, std::size_t channels);

/// Header row names the channels; each following row is one time step.
FeatureTable ingest_csv(const std::filesystem::path& path);

/// Writes a feature table back out in the ingest_csv layout.
std::string features_csv(const Matrix& values, std::span<const std::string> labels);

}  // namespace faultsev
