#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace faultsev {

/// One node's curves as read back from the anomaly and severity CSVs.
struct NodeTrace {
  std::size_t node = 0;
  std::vector<double> t;
  std::vector<double> score;
  std::vector<int> flag;
  double threshold = 0.0;
  std::vector<double> mu;     // empty when no severity rows exist
  std::vector<double> index;  // mu + m * sigma
};

/// Reads `t,node,score,threshold,flag` and, if given, the severity CSV.
/// Throws DataError with the offending line number on malformed input.
std::vector<NodeTrace> read_traces(const std::filesystem::path& anomaly_csv,
                                   const std::optional<std::filesystem::path>& severity_csv);

/// Maps data coordinates into the SVG viewport.
struct PlotFrame {
  double width = 800.0;
  double height = 360.0;
  double margin_left = 60.0;
  double margin_right = 20.0;
  double margin_top = 30.0;
  double margin_bottom = 40.0;
  double t_min = 0.0, t_max = 1.0;
  double y_min = 0.0, y_max = 1.0;

  double x(double t) const;
  double y(double v) const;
};

PlotFrame frame_for(const NodeTrace& trace);

/// Score line (black), threshold (green), flagged points (red), mu (solid
/// blue) and mu + m sigma (dashed blue).
std::string render_svg(const NodeTrace& trace, const std::string& title);

/// Writes node_<i>.svg per node into `out_dir` and returns the paths.
std::vector<std::filesystem::path> render_plots(const std::filesystem::path& anomaly_csv,
                                                const std::optional<std::filesystem::path>& severity_csv,
                                                const std::filesystem::path& out_dir,
                                                const std::vector<std::string>& labels = {});

}  // namespace faultsev
