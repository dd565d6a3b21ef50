#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cvi/integrators.hpp"

namespace cvi::cli {

inline constexpr const char* kTraceHeader =
    "k,t,f,grad_norm,constraint_violation,error_vs_oracle,newton_iters";

/// %.17g, so that reruns diff byte for byte.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trace_row(std::ostream& out, const TraceRow& r) {
  out << r.k << ',' << format_number(r.t) << ',' << format_number(r.f) << ','
      << format_number(r.grad_norm) << ',' << format_number(r.constraint_violation) << ',';
  if (r.error_vs_oracle) out << format_number(*r.error_vs_oracle);
  out << ',';
  if (r.newton_iters) out << *r.newton_iters;
  out << '\n';
}

/// A failed run ends with a row of NaNs at the iteration that failed.
inline void write_failure_row(std::ostream& out, long k) {
  out << k << ",nan,nan,nan,nan,nan,\n";
}

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) write_trace_row(out, r);
  if (trace.failed) write_failure_row(out, trace.rows.empty() ? 0 : trace.rows.back().k + 1);
}

inline void write_combined_csv(std::ostream& out, const std::vector<std::string>& labels,
                               const std::vector<Trace>& traces) {
  out << "method," << kTraceHeader << '\n';
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& r : traces[i].rows) {
      out << labels[i] << ',';
      write_trace_row(out, r);
    }
    if (traces[i].failed) {
      out << labels[i] << ',';
      write_failure_row(out, traces[i].rows.empty() ? 0 : traces[i].rows.back().k + 1);
    }
  }
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Convergence plot: one polyline per series, optional log10 y axis.
inline void write_svg_plot(std::ostream& out, const std::vector<Series>& series,
                           const std::string& title, const std::string& y_label, bool log_y) {
  constexpr double width = 800, height = 500;
  constexpr double left = 80, right = 180, top = 40, bottom = 60;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(y) || !std::isfinite(s.x[i])) continue;
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = y;
        any = true;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << format_number(std::round(xv))
        << "</text>\n";
    char ybuf[32];
    std::snprintf(ybuf, sizeof ybuf, log_y ? "1e%.1f" : "%.3g", yv);
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << ybuf << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\" font-size=\"13\">iteration</text>\n";
  out << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\" text-anchor=\"middle\" font-size=\"13\">" << y_label
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* color = colors[s % (sizeof colors / sizeof *colors)];
    const std::size_t stride = std::max<std::size_t>(1, sr.x.size() / 2000);
    out << "<polyline class=\"series\" data-label=\"" << sr.label
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sr.x.size(); i += stride) {
      const double y = ty(sr.y[i]);
      if (!std::isfinite(y)) continue;
      out << px(sr.x[i]) << ',' << py(y) << ' ';
    }
    if (!sr.x.empty() && (sr.x.size() - 1) % stride != 0 && std::isfinite(ty(sr.y.back())))
      out << px(sr.x.back()) << ',' << py(ty(sr.y.back()));
    out << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
        << left + plot_w + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << sr.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace cvi::cli
