#include "faultsev/plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>

#include "faultsev/csv.hpp"
#include "faultsev/error.hpp"

namespace faultsev {

namespace {

std::string fixed(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
  if (ec != std::errc()) return "0";
  return std::string(buf.data(), end);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string polyline(const PlotFrame& f, const std::vector<double>& t, const std::vector<double>& v,
                     const std::string& cls, const std::string& style) {
  std::string pts;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) pts += ' ';
    pts += fixed(f.x(t[k])) + ',' + fixed(f.y(v[k]));
  }
  return "  <polyline class=\"" + cls + "\" fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}


std::size_t as_index(const std::string& field, const std::string& where) {
  const double v = parse_double(field, where);
  if (v < 0 || std::floor(v) != v) throw DataError(where + ": expected a non-negative integer, got '" + field + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

double PlotFrame::x(double t) const {
  const double span = t_max > t_min ? t_max - t_min : 1.0;
  return margin_left + (t - t_min) / span * (width - margin_left - margin_right);
}

double PlotFrame::y(double v) const {
  const double span = y_max > y_min ? y_max - y_min : 1.0;
  return height - margin_bottom - (v - y_min) / span * (height - margin_top - margin_bottom);
}

std::vector<NodeTrace> read_traces(const std::filesystem::path& anomaly_csv,
                                   const std::optional<std::filesystem::path>& severity_csv) {
  std::map<std::size_t, NodeTrace> traces;
  {
    const CsvTable table = read_csv_file(anomaly_csv);
    const std::size_t c_t = table.column("t"), c_node = table.column("node"),
                      c_score = table.column("score"), c_tau = table.column("threshold"),
                      c_flag = table.column("flag");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string where = anomaly_csv.string() + ":" + std::to_string(table.line_numbers[r]);
      const auto& row = table.rows[r];
      NodeTrace& tr = traces[as_index(row[c_node], where)];
      tr.node = as_index(row[c_node], where);
      tr.t.push_back(parse_double(row[c_t], where));
      tr.score.push_back(parse_double(row[c_score], where));
      tr.threshold = parse_double(row[c_tau], where);
      const std::size_t fl = as_index(row[c_flag], where);
      if (fl > 1) throw DataError(where + ": flag must be 0 or 1");
      tr.flag.push_back(static_cast<int>(fl));
    }
  }
  if (severity_csv) {
    const CsvTable table = read_csv_file(*severity_csv);
    const std::size_t c_t = table.column("t"), c_node = table.column("node"), c_mu = table.column("mu"),
                      c_index = table.column("index");
    std::map<std::size_t, std::size_t> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string where = severity_csv->string() + ":" + std::to_string(table.line_numbers[r]);
      const auto& row = table.rows[r];
      const std::size_t node = as_index(row[c_node], where);
      auto it = traces.find(node);
      if (it == traces.end()) throw DataError(where + ": node " + std::to_string(node) + " absent from anomaly CSV");
      NodeTrace& tr = it->second;
      const std::size_t k = seen[node]++;
      if (k >= tr.t.size() || parse_double(row[c_t], where) != tr.t[k]) {
        throw DataError(where + ": severity rows do not align with anomaly rows");
      }
      tr.mu.push_back(parse_double(row[c_mu], where));
      tr.index.push_back(parse_double(row[c_index], where));
    }
    for (auto& [node, tr] : traces) {
      if (!tr.mu.empty() && tr.mu.size() != tr.t.size()) {
        throw DataError(severity_csv->string() + ": node " + std::to_string(node) + " has incomplete severity rows");
      }
    }
  }
  std::vector<NodeTrace> out;
  for (auto& [node, tr] : traces) out.push_back(std::move(tr));
  return out;
}

PlotFrame frame_for(const NodeTrace& trace) {
  PlotFrame f;
  if (!trace.t.empty()) {
    f.t_min = *std::min_element(trace.t.begin(), trace.t.end());
    f.t_max = *std::max_element(trace.t.begin(), trace.t.end());
  }
  double top = trace.threshold;
  for (double v : trace.score) top = std::max(top, v);
  for (double v : trace.index) top = std::max(top, v);
  f.y_min = 0.0;
  f.y_max = top > 0.0 ? top * 1.05 : 1.0;
  return f;
}

std::string render_svg(const NodeTrace& trace, const std::string& title) {
  const PlotFrame f = frame_for(trace);
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(f.width) + "\" height=\"" +
       fixed(f.height) + "\" viewBox=\"0 0 " + fixed(f.width) + " " + fixed(f.height) +
       "\" data-node=\"" + std::to_string(trace.node) + "\">\n";
  s += "  <title>" + escape_xml(title) + "</title>\n";
  s += "  <rect x=\"0\" y=\"0\" width=\"" + fixed(f.width) + "\" height=\"" + fixed(f.height) +
       "\" fill=\"white\"/>\n";
  // axes
  const double x0 = f.margin_left, x1 = f.width - f.margin_right;
  const double y0 = f.height - f.margin_bottom, y1 = f.margin_top;
  s += "  <line class=\"axis\" x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x1) +
       "\" y2=\"" + fixed(y0) + "\" stroke=\"#444\"/>\n";
  s += "  <line class=\"axis\" x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x0) +
       "\" y2=\"" + fixed(y1) + "\" stroke=\"#444\"/>\n";
  s += "  <text x=\"" + fixed(x0) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" +
       escape_xml(title) + "</text>\n";
  s += "  <text x=\"" + fixed(x0) + "\" y=\"" + fixed(f.height - 10) +
       "\" font-family=\"sans-serif\" font-size=\"11\">t = " + format_double(f.t_min) + " .. " +
       format_double(f.t_max) + "</text>\n";
  s += "  <text x=\"4\" y=\"" + fixed(y1 + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
       format_double(f.y_max) + "</text>\n";

  if (!trace.t.empty()) {
    s += polyline(f, trace.t, trace.score, "score", "stroke=\"black\" stroke-width=\"1\"");
  }
  s += "  <line class=\"threshold\" data-value=\"" + format_double(trace.threshold) + "\" x1=\"" + fixed(x0) +
       "\" y1=\"" + fixed(f.y(trace.threshold)) + "\" x2=\"" + fixed(x1) + "\" y2=\"" +
       fixed(f.y(trace.threshold)) + "\" stroke=\"green\" stroke-width=\"1.5\"/>\n";
  for (std::size_t k = 0; k < trace.t.size(); ++k) {
    if (!trace.flag[k]) continue;
    s += "  <circle class=\"flag\" cx=\"" + fixed(f.x(trace.t[k])) + "\" cy=\"" + fixed(f.y(trace.score[k])) +
         "\" r=\"2\" fill=\"red\"/>\n";
  }
  if (!trace.mu.empty()) {
    s += polyline(f, trace.t, trace.mu, "mu", "stroke=\"blue\" stroke-width=\"1.5\"");
    s += polyline(f, trace.t, trace.index, "index",
                  "stroke=\"blue\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"");
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::filesystem::path> render_plots(const std::filesystem::path& anomaly_csv,
                                                const std::optional<std::filesystem::path>& severity_csv,
                                                const std::filesystem::path& out_dir,
                                                const std::vector<std::string>& labels) {
  const auto traces = read_traces(anomaly_csv, severity_csv);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const NodeTrace& tr : traces) {
    std::string title = "node " + std::to_string(tr.node);
    if (tr.node < labels.size()) title += " (" + labels[tr.node] + ")";
    const auto path = out_dir / ("node_" + std::to_string(tr.node) + ".svg");
    write_text_file(path, render_svg(tr, title + ": anomaly score and severity"));
    written.push_back(path);
  }
  return written;
}

}  // namespace faultsev
