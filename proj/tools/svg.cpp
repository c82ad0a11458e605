#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace cdtkit::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string scatter_svg(const Eigen::MatrixXd& xy, const std::vector<int>& labels,
                        const std::vector<bool>& hollow, const ScatterStyle& style) {
  const double left = 60, right = 130, top = 40, bottom = 50;
  const double plot_w = style.width - left - right;
  const double plot_h = style.height - top - bottom;

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (xy.rows() > 0) {
    x0 = xy.col(0).minCoeff();
    x1 = xy.col(0).maxCoeff();
    y0 = xy.col(1).minCoeff();
    y1 = xy.col(1).maxCoeff();
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo > 0 ? hi - lo : std::max(1.0, std::abs(lo));
    lo -= 0.05 * span;
    hi += 0.05 * span;
  };
  pad(x0, x1);
  pad(y0, y1);
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * plot_h; };

  std::map<int, std::size_t> colour;
  for (int l : labels) colour.emplace(l, 0);
  std::size_t k = 0;
  for (auto& [label, c] : colour) c = k++ % std::size(kPalette);

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
       "\" height=\"" + std::to_string(style.height) + "\" viewBox=\"0 0 " +
       std::to_string(style.width) + " " + std::to_string(style.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"24\" text-anchor=\"middle\" " +
       "font-family=\"sans-serif\" font-size=\"15\">" + escape(style.title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) +
       "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Ticks at the ends and middle of each axis.
  for (int t = 0; t <= 2; ++t) {
    const double fx = x0 + (x1 - x0) * t / 2.0;
    const double fy = y0 + (y1 - y0) * t / 2.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", fx);
    s += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(top + plot_h + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + buf +
         "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", fy);
    s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(fy) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + buf +
         "</text>\n";
  }
  s += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(style.height - 12.0) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       escape(style.x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num(top + plot_h / 2) + "\" text-anchor=\"middle\" " +
       "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
       num(top + plot_h / 2) + ")\">" + escape(style.y_label) + "</text>\n";

  for (const auto& [label, c] : colour) {
    s += "<g class=\"label-" + std::to_string(label) + "\" fill=\"" + kPalette[c] + "\" stroke=\"" +
         kPalette[c] + "\">\n";
    for (Eigen::Index i = 0; i < xy.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] != label) continue;
      const bool open = !hollow.empty() && hollow[static_cast<std::size_t>(i)];
      s += "<circle cx=\"" + num(px(xy(i, 0))) + "\" cy=\"" + num(py(xy(i, 1))) + "\" r=\"4\"" +
           (open ? " fill=\"none\"" : "") + "/>\n";
    }
    s += "</g>\n";
  }

  double ly = top + 10;
  for (const auto& [label, c] : colour) {
    s += "<circle cx=\"" + num(left + plot_w + 20) + "\" cy=\"" + num(ly) + "\" r=\"5\" fill=\"" +
         kPalette[c] + "\"/>\n";
    s += "<text x=\"" + num(left + plot_w + 30) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">class " + std::to_string(label) +
         "</text>\n";
    ly += 18;
  }
  if (!hollow.empty()) {
    s += "<circle cx=\"" + num(left + plot_w + 20) + "\" cy=\"" + num(ly + 6) +
         "\" r=\"5\" fill=\"none\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + num(left + plot_w + 30) + "\" y=\"" + num(ly + 10) +
         "\" font-family=\"sans-serif\" font-size=\"12\">training</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cdtkit::cli
