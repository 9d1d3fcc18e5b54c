#include "hatebench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hatebench::svg {

std::string num(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::rect(double x, double y, double w, double h, std::string_view fill,
                    std::string_view stroke) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) +
           "\"/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, std::string_view stroke,
                    double width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
           "\"/>\n";
}

void Document::polyline(const std::vector<std::pair<double, double>>& points,
                        std::string_view stroke, double width, std::string_view dash) {
  body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" +
           num(width) + "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + std::string(dash) + "\"";
  body_ += " points=\"";
  for (const auto& [px, py] : points) body_ += num(px) + "," + num(py) + " ";
  body_ += "\"/>\n";
}

void Document::text(double x, double y, std::string_view content, double size,
                    std::string_view anchor, std::string_view fill) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size, 1) +
           "\" font-family=\"sans-serif\" text-anchor=\"" + std::string(anchor) + "\" fill=\"" +
           std::string(fill) + "\">" + escape(content) + "</text>\n";
}

std::string Document::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_, 0) + "\" height=\"" +
         num(height_, 0) + "\" viewBox=\"0 0 " + num(width_, 0) + " " + num(height_, 0) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

namespace {

double nice_max(double v) {
  if (v <= 0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (step * mag >= v) return step * mag;
  return 10 * mag;
}

}  // namespace

void bar_panel(Document& doc, double x, double y, double w, double h, std::string_view title,
               const std::vector<std::string>& labels, const std::vector<double>& values,
               const std::vector<std::string>& colours) {
  const double left = x + 45, top = y + 25, plot_w = w - 55, plot_h = h - 60;
  doc.text(x + w / 2, y + 15, title, 13, "middle");
  const double vmax = nice_max(values.empty() ? 1.0 : *std::max_element(values.begin(), values.end()));
  for (int k = 0; k <= 4; ++k) {
    const double gy = top + plot_h - plot_h * k / 4.0;
    doc.line(left, gy, left + plot_w, gy, "#ddd");
    doc.text(left - 4, gy + 4, num(vmax * k / 4.0, vmax >= 20 ? 0 : 1), 9, "end");
  }
  const std::size_t n = values.size();
  if (n == 0) return;
  const double slot = plot_w / static_cast<double>(n);
  const bool dense = n > 12;
  for (std::size_t i = 0; i < n; ++i) {
    const double bh = plot_h * values[i] / vmax;
    const double bx = left + slot * static_cast<double>(i) + (dense ? 0.5 : slot * 0.15);
    const double bw = dense ? std::max(slot - 1.0, 0.5) : slot * 0.7;
    doc.rect(bx, top + plot_h - bh, bw, bh, colours.empty() ? "#4c72b0" : colours[i % colours.size()]);
    const bool show_label = !dense || i % std::max<std::size_t>(1, n / 10) == 0;
    if (show_label && i < labels.size())
      doc.text(bx + bw / 2, top + plot_h + 14, labels[i], dense ? 8 : 10, "middle");
    if (!dense) doc.text(bx + bw / 2, top + plot_h - bh - 3, num(values[i], 0), 9, "middle");
  }
  doc.line(left, top + plot_h, left + plot_w, top + plot_h, "#333");
}

void line_panel(Document& doc, double x, double y, double w, double h, std::string_view title,
                std::string_view x_label, const std::vector<Series>& series) {
  const double left = x + 50, top = y + 25, plot_w = w - 130, plot_h = h - 60;
  doc.text(x + (w - 80) / 2, y + 15, title, 13, "middle");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n = 0;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = 0, hi = 1;
  if (hi - lo < 1e-9) hi = lo + 1;
  const double pad = (hi - lo) * 0.05;
  lo -= pad;
  hi += pad;
  for (int k = 0; k <= 4; ++k) {
    const double gy = top + plot_h - plot_h * k / 4.0;
    doc.line(left, gy, left + plot_w, gy, "#ddd");
    doc.text(left - 4, gy + 4, num(lo + (hi - lo) * k / 4.0, 3), 9, "end");
  }
  doc.line(left, top + plot_h, left + plot_w, top + plot_h, "#333");
  doc.line(left, top, left, top + plot_h, "#333");
  doc.text(left + plot_w / 2, top + plot_h + 30, x_label, 10, "middle");
  const double dx = n > 1 ? plot_w / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (n <= 20 || i % (n / 10) == 0)
      doc.text(left + dx * static_cast<double>(i), top + plot_h + 14, std::to_string(i + 1), 9,
               "middle");
  double legend_y = top + 10;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!std::isfinite(s.values[i])) continue;
      pts.emplace_back(left + dx * static_cast<double>(i),
                       top + plot_h - plot_h * (s.values[i] - lo) / (hi - lo));
    }
    doc.polyline(pts, s.colour, 1.8, s.dash);
    doc.line(left + plot_w + 10, legend_y, left + plot_w + 30, legend_y, s.colour, 2);
    doc.text(left + plot_w + 34, legend_y + 4, s.label, 10);
    legend_y += 16;
  }
}

}  // namespace hatebench::svg
