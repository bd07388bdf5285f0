#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nlspec/error.hpp"

namespace nlspec {

/// %.17g, which round-trips every double.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string num(std::size_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }
inline std::string num(bool v) { return v ? "1" : "0"; }

/// '#'-prefixed key,value metadata lines, then a header and rows.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void note(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
  void note(std::string key, double value) { meta.emplace_back(std::move(key), num(value)); }

  static std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  std::string csv() const {
    std::ostringstream os;
    for (const auto& [k, v] : meta) os << "# " << k << "," << field(v) << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << field(header[i]);
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << field(r[i]);
      os << "\n";
    }
    return os.str();
  }
};

/// Writes through a temporary sibling and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cli", "writable_path", "cannot open '" + tmp.string() + "'");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error("cli", "writable_path", "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cli", "writable_path", "cannot rename into '" + path.string() + "': " + ec.message());
  }
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotLabels {
  std::string title;
  std::string x;
  std::string y;
};

namespace detail {
inline std::string svg_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

inline std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}
}  // namespace detail

/// Standalone SVG line chart of one or more series.
inline std::string render_plot(const std::vector<Series>& series, const PlotLabels& labels) {
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw Error("cli", "series_lengths", "series '" + s.name + "' has unequal x and y");
    points += s.x.size();
  }
  if (points == 0) throw Error("cli", "nonempty_series", "nothing to plot");

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  auto widen = [](double& lo, double& hi) {
    if (hi - lo <= 1e-300) {
      const double pad = std::max(std::fabs(lo) * 0.05, 1e-12);
      lo -= pad;
      hi += pad;
    }
  };
  widen(x0, x1);
  widen(y0, y1);

  const double W = 640, H = 420, L = 80, R = 160, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  using detail::coord;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << coord(L + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"15\">" << detail::svg_escape(labels.title) << "</text>\n";
  os << "<line x1=\"" << coord(L) << "\" y1=\"" << coord(T + ph) << "\" x2=\"" << coord(L + pw) << "\" y2=\""
     << coord(T + ph) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << coord(L) << "\" y1=\"" << coord(T) << "\" x2=\"" << coord(L) << "\" y2=\"" << coord(T + ph)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << coord(px(fx)) << "\" y=\"" << coord(T + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::tick(fx) << "</text>\n";
    os << "<text x=\"" << coord(L - 6) << "\" y=\"" << coord(py(fy) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::tick(fy) << "</text>\n";
  }
  os << "<text x=\"" << coord(L + pw / 2) << "\" y=\"" << coord(H - 16)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << detail::svg_escape(labels.x)
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << coord(T + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"13\" transform=\"rotate(-90 18 " << coord(T + ph / 2) << ")\">" << detail::svg_escape(labels.y)
     << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* color = palette[s % 6];
    if (sr.x.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < sr.x.size(); ++i) os << (i ? " " : "") << coord(px(sr.x[i])) << "," << coord(py(sr.y[i]));
      os << "\"/>\n";
    }
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      os << "<circle cx=\"" << coord(px(sr.x[i])) << "\" cy=\"" << coord(py(sr.y[i])) << "\" r=\"3.5\" fill=\""
         << color << "\"/>\n";
    const double ly = T + 14 + 18 * static_cast<double>(s);
    os << "<line x1=\"" << coord(L + pw + 12) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(L + pw + 32)
       << "\" y2=\"" << coord(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << coord(L + pw + 38) << "\" y=\"" << coord(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::svg_escape(sr.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void emit_plot(const std::vector<Series>& series, const PlotLabels& labels, const std::filesystem::path& path) {
  write_atomic(path, render_plot(series, labels));
}

}  // namespace nlspec
