#include "chemoflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "chemoflow/errors.hpp"

namespace chemoflow {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<PlotSeries>& series, bool log_y) {
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (log_y && !(s.y[k] > 0.0))) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * (x - x0) / (x1 - x0); };
  auto py = [&](double y) { return kTop + ph * (1.0 - (ty(y) - y0) / (y1 - y0)); };

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << fmt::format(R"svg(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)svg",
                     kWidth, kHeight)
      << "\n";
  out << fmt::format(R"svg(<rect width="{}" height="{}" fill="white"/>)svg", kWidth, kHeight) << "\n";
  out << fmt::format(R"svg(<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>)svg", kWidth / 2, escape(title))
      << "\n";
  out << fmt::format(R"svg(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)svg", kLeft, kTop, pw, ph)
      << "\n";
  out << fmt::format(R"svg(<text x="{}" y="{}" text-anchor="middle">{}</text>)svg", kLeft + pw / 2, kHeight - 10,
                     escape(x_label))
      << "\n";
  out << fmt::format(R"svg(<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>)svg",
                     kTop + ph / 2, kTop + ph / 2, escape(log_y ? "log10 " + y_label : y_label))
      << "\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    out << fmt::format(R"svg(<text x="{:.1f}" y="{}" text-anchor="middle">{:.4g}</text>)svg", px(xv), kTop + ph + 16, xv)
        << "\n";
    out << fmt::format(R"svg(<text x="{}" y="{:.1f}" text-anchor="end">{:.4g}</text>)svg", kLeft - 6,
                       kTop + ph * (1.0 - static_cast<double>(k) / 4) + 4, yv)
        << "\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % std::size(kColors)];
    out << fmt::format(R"svg(<polyline fill="none" stroke="{}" stroke-width="1.5" points=")svg", color);
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (log_y && !(s.y[k] > 0.0))) continue;
      out << fmt::format("{:.2f},{:.2f} ", px(s.x[k]), py(s.y[k]));
    }
    out << "\"/>\n";
    out << fmt::format(R"svg(<text x="{}" y="{}" fill="{}">{}</text>)svg", kLeft + 10, kTop + 16 + 16 * si, color,
                       escape(s.label))
        << "\n";
  }
  out << "</svg>\n";
}

}  // namespace chemoflow
