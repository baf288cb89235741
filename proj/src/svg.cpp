#include "k3dyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "k3dyn/error.hpp"

namespace k3dyn::svg {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 40.0;

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string num(double x) { return fmt("%.2f", x); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '-':
        // "--" is not allowed inside comments.
        out += (!out.empty() && out.back() == '-') ? " -" : "-";
        break;
      default: out += c;
    }
  }
  return out;
}

std::string open(const std::string& header) {
  const std::string total = num(kSize + 2 * kMargin);
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- " + escape(header) +
         " -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + total + "\" height=\"" + total +
         "\" viewBox=\"0 0 " + total + " " + total + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

std::string color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const auto ch = [&](double lo, double hi) { return static_cast<int>(std::lround(lo + (hi - lo) * v)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(255, 8), ch(255, 48), ch(255, 107));
  return buf;
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"" +
         anchor + "\">" + escape(s) + "</text>\n";
}

}  // namespace

std::string histogram2d(const std::vector<double>& mass, std::size_t bins, const std::string& header) {
  if (bins == 0 || mass.size() != bins * bins) throw EmptyResults("histogram has no bins");
  const double mx = *std::max_element(mass.begin(), mass.end());
  if (!(mx > 0.0)) throw EmptyResults("histogram has no mass");
  std::string s = open(header);
  const double cell = kSize / static_cast<double>(bins);
  for (std::size_t i = 0; i < bins; ++i)
    for (std::size_t j = 0; j < bins; ++j) {
      const double v = mass[i * bins + j];
      if (v <= 0.0) continue;
      // theta_1 runs left to right, theta_2 bottom to top.
      const double x = kMargin + static_cast<double>(i) * cell;
      const double y = kMargin + kSize - static_cast<double>(j + 1) * cell;
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
           "\" fill=\"" + color(v / mx) + "\"/>\n";
    }
  s += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kSize) + "\" height=\"" +
       num(kSize) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  s += text(kMargin + kSize / 2, kMargin + kSize + 28, "theta1 in [-pi, pi)");
  s += text(kMargin + kSize / 2, 24, "theta2 in [-pi, pi) upward");
  s += "</svg>\n";
  return s;
}

std::string scatter(const std::vector<std::array<double, 2>>& points, const std::string& header) {
  if (points.empty()) throw EmptyResults("no boundary classes to plot");
  std::string s = open(header);
  const double c = kMargin + kSize / 2, r = kSize / 2;
  s += "<circle cx=\"" + num(c) + "\" cy=\"" + num(c) + "\" r=\"" + num(r) +
       "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (const auto& p : points) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
    s += "<circle cx=\"" + num(c + r * p[0]) + "\" cy=\"" + num(c - r * p[1]) +
         "\" r=\"2.50\" fill=\"#08306b\" fill-opacity=\"0.6\"/>\n";
  }
  s += text(c, kMargin + kSize + 28, "Klein disk: (x1/x0, x2/x0)");
  s += "</svg>\n";
  return s;
}

std::string growth(const std::vector<GrowthSeries>& series, const std::string& header) {
  double ymin = INFINITY, ymax = -INFINITY;
  std::size_t nmax = 0;
  for (const auto& g : series) {
    nmax = std::max(nmax, g.norms.size());
    for (double v : g.norms)
      if (v > 0.0 && std::isfinite(v)) {
        ymin = std::min(ymin, std::log(v));
        ymax = std::max(ymax, std::log(v));
      }
  }
  if (nmax < 2 || !std::isfinite(ymin)) throw EmptyResults("no growth data to plot");
  if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
  const double xmax = std::log(static_cast<double>(nmax));
  std::string s = open(header);
  static const char* palette[] = {"#08306b", "#a50f15", "#006d2c", "#54278f", "#7f2704", "#252525"};
  std::size_t k = 0;
  for (const auto& g : series) {
    std::string pts;
    for (std::size_t i = 0; i < g.norms.size(); ++i) {
      const double v = g.norms[i];
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      const double x = kMargin + kSize * std::log(static_cast<double>(i + 1)) / xmax;
      const double y = kMargin + kSize - kSize * (std::log(v) - ymin) / (ymax - ymin);
      pts += num(x) + "," + num(y) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    const char* col = palette[k % 6];
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + col + "\" stroke-width=\"1\"/>\n";
    s += text(kMargin + 8, kMargin + 16 + 14 * static_cast<double>(k), g.label + " slope=" + fmt("%.4f", g.slope),
              "start");
    ++k;
  }
  s += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kSize) + "\" height=\"" +
       num(kSize) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  s += text(kMargin + kSize / 2, kMargin + kSize + 28, "log n");
  s += text(kMargin + kSize / 2, 24, "log |D h^n|");
  s += "</svg>\n";
  return s;
}

}  // namespace k3dyn::svg
