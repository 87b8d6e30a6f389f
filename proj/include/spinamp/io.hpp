#pragma once

// Artifact serialization: trace CSV, summary JSON, SVG line plots, atomic file writes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spinamp/dynamics.hpp"
#include "spinamp/errors.hpp"
#include "spinamp/metrics.hpp"
#include "spinamp/parameters.hpp"

namespace spinamp {

/// Writes `content` to `path` via a sibling temp file and rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 12 significant digits.
inline std::string format_csv_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// One row per grid point: t, t_omega1, P_S, P_1..P_N, P_total, delta_P.
/// Parameters are echoed as leading '#' lines.
inline std::string trace_csv(const PolarizationTrace& trace, const ParameterList& header) {
  std::string out;
  for (const auto& [k, v] : header) out += "# " + k + " = " + v + "\n";
  const auto n = trace.n_i_spins();
  out += "t,t_omega1,P_S";
  for (std::size_t k = 1; k <= n; ++k) out += ",P_" + std::to_string(k);
  out += ",P_total,delta_P\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_csv_number(trace.times[i]);
    out += ',';
    out += format_csv_number(trace.times_omega1[i]);
    for (std::size_t s = 0; s <= n; ++s) {
      out += ',';
      out += format_csv_number(trace.polarization(s, i));
    }
    out += ',';
    out += format_csv_number(trace.total_i[i]);
    out += ',';
    out += format_csv_number(trace.delta_p[i]);
    out += '\n';
  }
  return out;
}

/// Column count of trace_csv for N I spins.
inline std::size_t trace_csv_columns(std::size_t n_i_spins) { return n_i_spins + 5; }

inline std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// --- SVG --------------------------------------------------------------------

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 440;
};

inline std::string xml_escape(std::string_view s) {
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

inline std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Static line plot, one polyline per series, legend keyed by series name.
inline std::string svg_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#000000", "#aec7e8"};
  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x0 = x1 = s.x[i];
        y0 = y1 = s.y[i];
        first = false;
      }
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + svg_number(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         xml_escape(opt.title) + "</text>\n";
  out += "<rect x=\"" + svg_number(left) + "\" y=\"" + svg_number(top) + "\" width=\"" + svg_number(pw) +
         "\" height=\"" + svg_number(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    char lbl[32];
    std::snprintf(lbl, sizeof lbl, "%.3g", xv);
    out += "<text x=\"" + svg_number(px(xv)) + "\" y=\"" + svg_number(top + ph + 18) +
           "\" text-anchor=\"middle\">" + lbl + "</text>\n";
    std::snprintf(lbl, sizeof lbl, "%.3g", yv);
    out += "<text x=\"" + svg_number(left - 6) + "\" y=\"" + svg_number(py(yv) + 4) + "\" text-anchor=\"end\">" +
           lbl + "</text>\n";
  }
  out += "<text x=\"" + svg_number(left + pw / 2) + "\" y=\"" + svg_number(opt.height - 12.0) +
         "\" text-anchor=\"middle\">" + xml_escape(opt.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + svg_number(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         xml_escape(opt.y_label) + "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % (sizeof palette / sizeof *palette)];
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(color) + "\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) out += ' ';
      out += svg_number(px(series[s].x[i])) + "," + svg_number(py(series[s].y[i]));
    }
    out += "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out += "<line x1=\"" + svg_number(left + pw + 12) + "\" y1=\"" + svg_number(ly) + "\" x2=\"" +
           svg_number(left + pw + 36) + "\" y2=\"" + svg_number(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + svg_number(left + pw + 42) + "\" y=\"" + svg_number(ly + 4) + "\">" +
           xml_escape(series[s].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Per-spin P_k(t) against omega1 t.
inline std::string svg_trace_plot(const PolarizationTrace& trace, const std::string& title) {
  std::vector<PlotSeries> series;
  for (std::size_t s = 0; s <= trace.n_i_spins(); ++s) {
    PlotSeries ps{s == 0 ? "S" : "I" + std::to_string(s), trace.times_omega1, {}};
    ps.y.resize(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) ps.y[i] = trace.polarization(s, i);
    series.push_back(std::move(ps));
  }
  return svg_line_plot(series, {title, "omega1 t", "polarization", 720, 440});
}

/// Delta P(t) overlay for several runs.
inline std::string svg_delta_p_plot(const std::vector<std::pair<std::string, const PolarizationTrace*>>& runs,
                                    const std::string& title) {
  std::vector<PlotSeries> series;
  for (const auto& [name, trace] : runs) series.push_back({name, trace->times_omega1, trace->delta_p});
  return svg_line_plot(series, {title, "omega1 t", "Delta P", 720, 440});
}

}  // namespace spinamp
