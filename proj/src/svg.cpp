#include "emloc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "emloc/errors.hpp"

namespace emloc::svg {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char *const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

void header(std::ostringstream &os, const std::string &title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream &os, double x0, double x1, double y0, double y1,
          const std::string &xl, const std::string &yl) {
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = kLeft + pw * t / 4.0, fy = kTop + ph * (1.0 - t / 4.0);
    os << "<text x=\"" << num(fx) << "\" y=\"" << kTop + ph + 16
       << "\" text-anchor=\"middle\">" << num(x0 + (x1 - x0) * t / 4.0) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(fy + 4)
       << "\" text-anchor=\"end\">" << num(y0 + (y1 - y0) * t / 4.0) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + ph / 2 << ")\">" << escape(yl) << "</text>\n";
}

} // namespace

std::string line_plot(const std::string &title, const std::vector<Series> &series,
                      const std::string &x_label, const std::string &y_label) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series &s : series)
    for (Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i)))
        continue;
      x0 = std::min(x0, s.x(i));
      x1 = std::max(x1, s.x(i));
      y0 = std::min(y0, s.y(i));
      y1 = std::max(y1, s.y(i));
    }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 1 : 0;
    x1 = x0 + 2;
  }
  if (!(y1 > y0)) {
    y0 = std::isfinite(y0) ? y0 - 1 : 0;
    y1 = y0 + 2;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  std::ostringstream os;
  header(os, title);
  axes(os, x0, x1, y0, y1, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series &s = series[k];
    const char *color = kColors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i)))
        continue;
      os << num(kLeft + pw * (s.x(i) - x0) / (x1 - x0)) << ","
         << num(kTop + ph * (1.0 - (s.y(i) - y0) / (y1 - y0))) << " ";
    }
    os << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\""
       << kWidth - kRight + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const std::string &title, const Eigen::MatrixXd &grid,
                    const std::string &x_label, const std::string &y_label) {
  const double lo = grid.minCoeff(), hi = grid.maxCoeff();
  const bool diverging = lo < 0 && hi > 0;
  const double span = diverging ? std::max(-lo, hi) : (hi > lo ? hi - lo : 1.0);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double cw = pw / static_cast<double>(grid.cols()), ch = ph / static_cast<double>(grid.rows());
  std::ostringstream os;
  header(os, title);
  auto color = [&](double v) {
    double t = diverging ? v / span : (v - lo) / span * 2.0 - 1.0; // in [-1, 1]
    t = std::clamp(t, -1.0, 1.0);
    int r, g, b;
    if (t < 0) {
      r = g = static_cast<int>(255 * (1 + t));
      b = 255;
    } else {
      r = 255;
      g = b = static_cast<int>(255 * (1 - t));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };
  for (Index i = 0; i < grid.rows(); ++i)
    for (Index j = 0; j < grid.cols(); ++j)
      os << "<rect x=\"" << num(kLeft + cw * static_cast<double>(j)) << "\" y=\""
         << num(kTop + ph - ch * static_cast<double>(i + 1)) << "\" width=\"" << num(cw + 0.3)
         << "\" height=\"" << num(ch + 0.3) << "\" fill=\"" << color(grid(i, j)) << "\"/>\n";
  axes(os, 0, static_cast<double>(grid.cols()), 0, static_cast<double>(grid.rows()), x_label,
       y_label);
  os << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 14 << "\">max "
     << num(diverging ? span : hi) << "</text>\n";
  os << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 32 << "\">min "
     << num(diverging ? -span : lo) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write(const std::string &path, const std::string &svg) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error("cannot write " + path);
  f << svg;
}

} // namespace emloc::svg
