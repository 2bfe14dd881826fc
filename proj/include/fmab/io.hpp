#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmab {

// Locale-free, shortest round-trip numeric formatting so reruns produce
// byte-identical files.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots; enough for eyeballing regret curves.

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

inline std::string render_svg_plot(const std::string& title,
                                   const std::vector<PlotSeries>& series) {
  const int width = 760, height = 480;
  const int ml = 70, mr = 20, mt = 40, mb = 50;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = s.y[i];
        first = false;
      }
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  const auto px = [&](double x) {
    return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr);
  };
  const auto py = [&](double y) {
    return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
  };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_int(width) + "\" height=\"" + format_int(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_int(width / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title +
         "</text>\n";
  // axes
  svg += "<line x1=\"" + format_double(px(x_lo)) + "\" y1=\"" +
         format_double(py(y_lo)) + "\" x2=\"" + format_double(px(x_hi)) +
         "\" y2=\"" + format_double(py(y_lo)) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(px(x_lo)) + "\" y1=\"" +
         format_double(py(y_lo)) + "\" x2=\"" + format_double(px(x_lo)) +
         "\" y2=\"" + format_double(py(y_hi)) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + format_double(px(x_lo)) + "\" y=\"" +
         format_int(height - 16) + "\" font-size=\"12\">" + format_double(x_lo) +
         "</text>\n";
  svg += "<text x=\"" + format_double(px(x_hi)) + "\" y=\"" +
         format_int(height - 16) + "\" text-anchor=\"end\" font-size=\"12\">" +
         format_double(x_hi) + "</text>\n";
  svg += "<text x=\"8\" y=\"" + format_double(py(y_lo)) +
         "\" font-size=\"12\">" + format_double(y_lo) + "</text>\n";
  svg += "<text x=\"8\" y=\"" + format_double(py(y_hi)) +
         "\" font-size=\"12\">" + format_double(y_hi) + "</text>\n";
  int color = 0;
  int legend_y = mt + 8;
  for (const auto& s : series) {
    const char* c = colors[color % 6];
    ++color;
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      points += format_double(px(s.x[i]));
      points += ',';
      points += format_double(py(s.y[i]));
      points += ' ';
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += c;
    svg += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    svg += "<text x=\"" + format_int(width - mr - 150) + "\" y=\"" +
           format_int(legend_y) + "\" font-size=\"12\" fill=\"";
    svg += c;
    svg += "\">" + s.label + "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace fmab
