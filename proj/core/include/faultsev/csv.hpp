#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace faultsev {

/// Shortest representation that parses back to the same double; '.' decimal point.
std::string format_double(double value);

/// Parses a whole field as a double; throws DataError naming `where` on failure.
double parse_double(std::string_view field, const std::string& where);

/// Comma-separated table with a mandatory header row. Fields are trimmed of
/// surrounding whitespace; quoting is not supported.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Index of a header column; throws DataError if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source);
CsvTable read_csv_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace faultsev
