#include "dictminimax/report_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <utility>

namespace dictminimax {

namespace {

void write_file(const std::string& content, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fixed(double value) {
  std::array<char, 64> buffer{};
  const int n = std::snprintf(buffer.data(), buffer.size(), "%.2f", value);
  return std::string(buffer.data(), static_cast<std::size_t>(n));
}

struct SeriesKey {
  std::string dictionary_kind;
  double snr_db;
  auto operator<=>(const SeriesKey&) const = default;
};

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& row : rows) {
    out += row.experiment_id;
    out += ',' + row.dictionary_kind;
    out += ',' + std::to_string(row.m);
    out += ',' + std::to_string(row.p);
    out += ',' + std::to_string(row.s);
    out += ',' + format_double(row.snr_db);
    out += ',' + std::to_string(row.n_samples);
    out += ',' + (row.trial ? std::to_string(*row.trial) : std::string("mean"));
    out += ',' + format_double(row.mse);
    out += ',' + (row.mse_std_error ? format_double(*row.mse_std_error) : std::string());
    out += ',' + format_double(row.bound_value);
    out += row.bound_conditions_met ? ",true" : ",false";
    out += ',' + std::to_string(row.seed);
    out += '\n';
  }
  return out;
}

std::string render_svg(const std::vector<ResultRow>& rows) {
  // Series in first-appearance order.
  std::vector<SeriesKey> order;
  std::map<SeriesKey, std::vector<std::pair<double, double>>> mse_points;
  std::map<SeriesKey, std::vector<std::pair<double, double>>> bound_points;
  for (const auto& row : rows) {
    if (!row.is_aggregate() || !(row.mse > 0.0) || !(row.bound_value > 0.0)) continue;
    const SeriesKey key{row.dictionary_kind, row.snr_db};
    if (!mse_points.contains(key)) order.push_back(key);
    const double x = std::log2(static_cast<double>(row.n_samples));
    mse_points[key].emplace_back(x, std::log2(row.mse));
    bound_points[key].emplace_back(x, std::log2(row.bound_value));
  }

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto* points : {&mse_points, &bound_points}) {
    for (const auto& [key, series] : *points) {
      for (const auto& [x, y] : series) {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (order.empty()) {
    x_min = 0.0;
    x_max = 1.0;
    y_min = 0.0;
    y_max = 1.0;
  }
  x_min = std::floor(x_min);
  x_max = std::max(std::ceil(x_max), x_min + 1.0);
  y_min = std::floor(y_min);
  y_max = std::max(std::ceil(y_max), y_min + 1.0);

  constexpr double width = 800.0;
  constexpr double height = 520.0;
  constexpr double left = 70.0;
  constexpr double right = 230.0;
  constexpr double top = 20.0;
  constexpr double bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

  static constexpr std::array<const char*, 8> palette = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"520\" "
         "viewBox=\"0 0 800 520\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"520\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(plot_w) +
         "\" height=\"" + fixed(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";

  const double y_step = std::max(1.0, std::ceil((y_max - y_min) / 12.0));
  for (double x = x_min; x <= x_max + 1e-9; x += 1.0) {
    svg += "<text x=\"" + fixed(px(x)) + "\" y=\"" + fixed(top + plot_h + 18.0) +
           "\" text-anchor=\"middle\">" + format_double(x) + "</text>\n";
  }
  for (double y = y_min; y <= y_max + 1e-9; y += y_step) {
    svg += "<text x=\"" + fixed(left - 8.0) + "\" y=\"" + fixed(py(y) + 4.0) +
           "\" text-anchor=\"end\">" + format_double(y) + "</text>\n";
  }
  svg += "<text x=\"" + fixed(left + plot_w / 2.0) + "\" y=\"" + fixed(height - 15.0) +
         "\" text-anchor=\"middle\">log2 N</text>\n";
  svg += "<text x=\"18\" y=\"" + fixed(top + plot_h / 2.0) + "\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 " + fixed(top + plot_h / 2.0) + ")\">log2 MSE</text>\n";

  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& key = order[i];
    const char* color = palette[i % palette.size()];
    const std::string label = key.dictionary_kind + ", SNR=" + format_double(key.snr_db) + "dB";
    auto polyline = [&](const std::vector<std::pair<double, double>>& points, const char* cls,
                        const char* extra) {
      std::string line = "<polyline class=\"" + std::string(cls) + "\" data-series=\"" + label +
                         "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" + extra +
                         " points=\"";
      for (std::size_t k = 0; k < points.size(); ++k) {
        if (k > 0) line += ' ';
        line += fixed(px(points[k].first)) + "," + fixed(py(points[k].second));
      }
      line += "\"/>\n";
      return line;
    };
    svg += polyline(mse_points.at(key), "series", "");
    svg += polyline(bound_points.at(key), "bound", " stroke-dasharray=\"6,4\"");
    const double ly = top + 14.0 + 18.0 * static_cast<double>(i);
    svg += "<text x=\"" + fixed(left + plot_w + 12.0) + "\" y=\"" + fixed(ly) + "\" fill=\"" +
           color + "\">" + label + "</text>\n";
  }
  const double note_y = top + 14.0 + 18.0 * static_cast<double>(order.size()) + 6.0;
  svg += "<text x=\"" + fixed(left + plot_w + 12.0) + "\" y=\"" + fixed(note_y) +
         "\">dashed: minimax lower bound</text>\n";
  svg += "</svg>\n";
  return svg;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::domain_error("no rows to write");
  write_file(format_csv(rows), path);
}

void emit_plot_svg(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::domain_error("no rows to plot");
  write_file(render_svg(rows), path);
}

}  // namespace dictminimax
