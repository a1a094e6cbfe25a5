#include "capfactor/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace capfactor {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void text(double x, double y, const std::string& s, int size = 12, const char* anchor = "start",
            double rotate = 0.0) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
          << "\" text-anchor=\"" << anchor << '"';
    if (rotate != 0.0) body_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
    body_ << '>' << escape(s) << "</text>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill, const char* stroke = "none") {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
          << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke = "#000", double width = 1.0) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }
  void circle(double x, double y, double r, const char* fill) {
    body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
          << "\" fill-opacity=\"0.35\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke, double width = 1.5) {
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\" points=\"";
    for (const auto& [x, y] : pts) body_ << num(x) << ',' << num(y) << ' ';
    body_ << "\"/>\n";
  }
  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
        << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

/// Blue (-1) / white (0) / red (+1).
std::string diverging(double v, double scale) {
  const double t = scale > 0.0 ? std::clamp(v / scale, -1.0, 1.0) : 0.0;
  int r = 255, g = 255, b = 255;
  if (t >= 0.0) {
    g = b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  } else {
    r = g = static_cast<int>(std::lround(255.0 * (1.0 + t)));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

struct Axes {
  double x0, y0, w, h;  // plot area in pixels
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void draw_frame(Svg& svg, const Axes& ax) {
  svg.rect(ax.x0, ax.y0, ax.w, ax.h, "none", "#888");
  svg.text(ax.x0, ax.y0 + ax.h + 12, num(ax.xmin), 9);
  svg.text(ax.x0 + ax.w, ax.y0 + ax.h + 12, num(ax.xmax), 9, "end");
  svg.text(ax.x0 - 3, ax.y0 + ax.h, num(ax.ymin), 9, "end");
  svg.text(ax.x0 - 3, ax.y0 + 8, num(ax.ymax), 9, "end");
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (!(hi > lo)) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Subsample to keep files small; deterministic stride.
std::vector<Eigen::Index> point_subset(Eigen::Index n, Eigen::Index cap = 1500) {
  std::vector<Eigen::Index> idx;
  const Eigen::Index stride = std::max<Eigen::Index>(1, (n + cap - 1) / cap);
  for (Eigen::Index j = 0; j < n; j += stride) idx.push_back(j);
  return idx;
}

}  // namespace

std::string heatmap_svg(const Matrix& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title) {
  const double cell = 28.0;
  const double left = 220.0;
  const double top = 150.0;
  const auto rows = values.rows();
  const auto cols = values.cols();
  Svg svg(left + cell * static_cast<double>(cols) + 40.0, top + cell * static_cast<double>(rows) + 40.0);
  svg.text(10, 20, title, 14);
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double y = top + cell * static_cast<double>(i);
    if (static_cast<std::size_t>(i) < row_labels.size())
      svg.text(left - 6, y + cell * 0.65, row_labels[static_cast<std::size_t>(i)], 10, "end");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double x = left + cell * static_cast<double>(j);
      svg.rect(x, y, cell, cell, diverging(values(i, j), scale), "#ddd");
      svg.text(x + cell / 2, y + cell * 0.62, num(values(i, j)), 8, "middle");
    }
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (static_cast<std::size_t>(j) >= col_labels.size()) break;
    const double x = left + cell * static_cast<double>(j) + cell * 0.6;
    svg.text(x, top - 6, col_labels[static_cast<std::size_t>(j)], 10, "start", -60.0);
  }
  return svg.str();
}

std::string bar_chart_svg(const Vector& values, const std::vector<std::string>& labels, const std::string& title) {
  const double bar = 40.0;
  const double left = 60.0;
  const double top = 40.0;
  const double height = 240.0;
  const auto n = values.size();
  Svg svg(left + (bar + 12.0) * static_cast<double>(n) + 40.0, top + height + 60.0);
  svg.text(10, 20, title, 14);
  const double vmax = std::max(values.maxCoeff(), 1e-12);
  svg.line(left, top + height, left + (bar + 12.0) * static_cast<double>(n), top + height, "#888");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = std::max(values[i], 0.0) / vmax * height;
    const double x = left + (bar + 12.0) * static_cast<double>(i) + 6.0;
    svg.rect(x, top + height - h, bar, h, "#4477aa");
    svg.text(x + bar / 2, top + height - h - 4, num(values[i]), 10, "middle");
    if (static_cast<std::size_t>(i) < labels.size())
      svg.text(x + bar / 2, top + height + 16, labels[static_cast<std::size_t>(i)], 10, "middle");
  }
  return svg.str();
}

std::string scree_svg(const ParallelResult& pa, const std::string& title) {
  const auto p = pa.real_eigenvalues.size();
  Svg svg(640, 420);
  svg.text(10, 20, title, 14);
  const double ymax = std::max(pa.real_eigenvalues.maxCoeff(), pa.simulated_eigenvalues.maxCoeff());
  Axes ax{60, 40, 540, 320, 0.5, static_cast<double>(p) + 0.5, 0.0, ymax * 1.05};
  draw_frame(svg, ax);
  std::vector<std::pair<double, double>> real, sim;
  for (Eigen::Index r = 0; r < p; ++r) {
    real.emplace_back(ax.px(static_cast<double>(r + 1)), ax.py(pa.real_eigenvalues[r]));
    sim.emplace_back(ax.px(static_cast<double>(r + 1)), ax.py(pa.simulated_eigenvalues[r]));
  }
  svg.polyline(real, "#1f4e9c", 2.0);
  svg.polyline(sim, "#c0392b", 2.0);
  for (const auto& [x, y] : real) svg.circle(x, y, 3.5, "#1f4e9c");
  svg.text(400, 60, "real data", 11);
  svg.line(380, 56, 396, 56, "#1f4e9c", 2.0);
  svg.text(400, 76, "simulated (" + pa.criterion.describe() + ")", 11);
  svg.line(380, 72, 396, 72, "#c0392b", 2.0);
  svg.text(400, 92, "retained: " + std::to_string(pa.retained), 11);
  svg.text(ax.x0 + ax.w / 2, 400, "rank", 11, "middle");
  return svg.str();
}

std::string item_fit_panel_svg(const Dataset& ds, const std::vector<ItemFit>& fits) {
  const int cols = 4;
  const auto p = static_cast<int>(ds.p());
  const int rows = (p + cols - 1) / cols;
  const double pw = 240.0, ph = 190.0;
  Svg svg(cols * pw + 20.0, rows * ph + 40.0);
  svg.text(10, 20, "Subtask accuracy vs ln(parameters) with 3PL fits", 14);
  const Vector log_n = ds.log_params();
  const auto [xlo, xhi] = padded_range(log_n.minCoeff(), log_n.maxCoeff());
  const auto subset = point_subset(log_n.size());
  for (int i = 0; i < p; ++i) {
    const double ox = 10.0 + (i % cols) * pw;
    const double oy = 30.0 + (i / cols) * ph;
    Axes ax{ox + 40, oy + 24, pw - 60, ph - 60, xlo, xhi, 0.0, 1.0};
    draw_frame(svg, ax);
    const auto& fit = fits[static_cast<std::size_t>(i)];
    svg.text(ox + 40, oy + 16, ds.subtasks[static_cast<std::size_t>(i)].name + "  R2=" + num(fit.r_squared), 10);
    for (Eigen::Index j : subset) svg.circle(ax.px(log_n[j]), ax.py(ds.scores(i, j)), 1.4, "#1f4e9c");
    std::vector<std::pair<double, double>> curve;
    for (int t = 0; t <= 60; ++t) {
      const double x = xlo + (xhi - xlo) * t / 60.0;
      curve.emplace_back(ax.px(x), ax.py(predict_item(fit.params, x)));
    }
    svg.polyline(curve, "#c0392b", 1.8);
  }
  return svg.str();
}

std::string capability_scatter_svg(const Matrix& scores, const Vector& log_n, const std::string& title) {
  const auto k = static_cast<int>(scores.rows());
  const double pw = 260.0, ph = 220.0;
  Svg svg(k * pw + 20.0, ph + 50.0);
  svg.text(10, 20, title, 14);
  const auto [xlo, xhi] = padded_range(log_n.minCoeff(), log_n.maxCoeff());
  const auto subset = point_subset(log_n.size());
  for (int f = 0; f < k; ++f) {
    const Vector y = scores.row(f).transpose();
    const auto [ylo, yhi] = padded_range(y.minCoeff(), y.maxCoeff());
    const double ox = 10.0 + f * pw;
    Axes ax{ox + 40, 50, pw - 60, ph - 50, xlo, xhi, ylo, yhi};
    draw_frame(svg, ax);
    for (Eigen::Index j : subset) svg.circle(ax.px(log_n[j]), ax.py(y[j]), 1.4, "#1f4e9c");
    std::string label = "Factor " + std::to_string(f + 1);
    try {
      const LogisticTrend trend = fit_logistic_trend(log_n, y);
      std::vector<std::pair<double, double>> curve;
      for (int t = 0; t <= 60; ++t) {
        const double x = xlo + (xhi - xlo) * t / 60.0;
        curve.emplace_back(ax.px(x), ax.py(std::clamp(trend(x), ylo, yhi)));
      }
      svg.polyline(curve, "#c0392b", 1.8);
      label += "  R2=" + num(trend.r_squared);
    } catch (const std::exception&) {
      label += "  (no trend)";
    }
    svg.text(ox + 40, 44, label, 10);
  }
  return svg.str();
}

}  // namespace capfactor
