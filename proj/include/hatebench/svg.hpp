#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hatebench::svg {

/// Minimal self-contained SVG writer for the report figures.
class Document {
 public:
  Document(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view stroke = "none");
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& points, std::string_view stroke,
                double width = 1.5, std::string_view dash = "");
  void text(double x, double y, std::string_view content, double size = 12,
            std::string_view anchor = "start", std::string_view fill = "#222");

  std::string str() const;

 private:
  double width_, height_;
  std::string body_;
};

struct Series {
  std::string label;
  std::vector<double> values;
  std::string colour;
  std::string dash;
};

/// Adds a labelled vertical bar chart inside the box (x, y, w, h).
void bar_panel(Document& doc, double x, double y, double w, double h, std::string_view title,
               const std::vector<std::string>& labels, const std::vector<double>& values,
               const std::vector<std::string>& colours);

/// Adds a line chart over x = 1..n inside the box (x, y, w, h).
void line_panel(Document& doc, double x, double y, double w, double h, std::string_view title,
                std::string_view x_label, const std::vector<Series>& series);

std::string escape(std::string_view text);
std::string num(double v, int precision = 2);

}  // namespace hatebench::svg
