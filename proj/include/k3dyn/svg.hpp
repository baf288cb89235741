#pragma once

// Self-contained SVG plots. Output depends only on the inputs, so identical
// results give byte-identical files.

#include <array>
#include <string>
#include <vector>

namespace k3dyn::svg {

// Heatmap over (theta_1, theta_2) in [-pi, pi)^2; mass[i * bins + j] is the
// weight of theta_1 bin i and theta_2 bin j. Throws EmptyResults when there
// is no bin or no mass.
std::string histogram2d(const std::vector<double>& mass, std::size_t bins, const std::string& header);

// Points of the Klein disk with the unit circle drawn. Throws EmptyResults
// without points.
std::string scatter(const std::vector<std::array<double, 2>>& points, const std::string& header);

struct GrowthSeries {
  std::string label;
  std::vector<double> norms;  // norms[k] at n = k + 1
  double slope = 0.0;         // fitted log-log slope
};

// log |D h^n| against log n, one polyline per series with its slope.
std::string growth(const std::vector<GrowthSeries>& series, const std::string& header);

}  // namespace k3dyn::svg
