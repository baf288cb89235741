#pragma once

// Spaces of planar pentagons with fixed side lengths and their folding maps.
//
// A pentagon is stored by its unit turn directions t_0..t_4 (side i is the
// vector l_i t_i), gauge-fixed by t_0 = 1 and a_0 = 0, so vertices are
// a_0 = 0 and a_{i+1} = a_i + l_i t_i. The same surface sits in P^4 as
//   sum l_i z_i = 0,   sum l_i / z_i = 0,
// whose real locus (all |z_i| = 1) is the pentagon space.

#include <json.hpp>

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace k3dyn::pentagon {

using Complex = std::complex<double>;
using Lengths = std::array<double, 5>;

class SideLengths {
 public:
  // Throws InvalidLengths unless all lengths are positive, a pentagon exists
  // (2 max < sum) and the surface is smooth (no signed sum vanishes).
  explicit SideLengths(const Lengths& l);

  [[nodiscard]] const Lengths& values() const { return l_; }
  double operator[](int i) const { return l_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] double total() const;
  [[nodiscard]] double max() const;

  [[nodiscard]] nlohmann::json to_json() const { return {{"lengths", l_}}; }
  static SideLengths from_json(const nlohmann::json& j);

 private:
  Lengths l_;
};

struct SmoothnessReport {
  double min_signed_sum = 0.0;    // min over sign patterns of |sum eps_i l_i|
  double existence_margin = 0.0;  // sum - 2 max
  bool smooth = false;
  bool pentagon_exists = false;
  // Nodes q_ij: z_i = l_j, z_j = -l_i, other coordinates zero; i < j.
  std::vector<std::array<double, 5>> nodes;
};

// Throws InvalidLengths for a nonpositive length.
SmoothnessReport smoothness(const Lengths& l);

class PentagonConfig {
 public:
  // Rotates so that t_0 = 1 and renormalizes |t_i| = 1; throws NoClosure if
  // the polygon does not close to 1e-9 relative.
  PentagonConfig(const SideLengths& l, const std::array<Complex, 5>& turns);

  [[nodiscard]] const SideLengths& lengths() const { return l_; }
  [[nodiscard]] const std::array<Complex, 5>& turns() const { return t_; }
  [[nodiscard]] std::array<Complex, 5> vertices() const;
  // Argument of t_i in (-pi, pi]; theta(0) = 0.
  [[nodiscard]] double theta(int i) const;
  // Side of a_4 with respect to the directed line a_3 -> a_0 (+1 left).
  [[nodiscard]] int branch() const;
  [[nodiscard]] double closure_residual() const;

 private:
  SideLengths l_;
  std::array<Complex, 5> t_;
};

// Chart (theta_1, theta_2, branch): places a_4 on the intersection of the
// circles |a - a_3| = l_3 and |a| = l_4.
PentagonConfig solve_config(const SideLengths& l, double theta1, double theta2, int branch);
// Number of distinct configurations over (theta_1, theta_2): 0, 1 or 2.
int chart_solution_count(const SideLengths& l, double theta1, double theta2);
// Unit pairs (t_c, t_d) with l_c t_c + l_d t_d = w, left branch first; empty
// when the circles miss. Throws DegenerateChart when they coincide.
std::vector<std::array<Complex, 2>> dependent_turns(double lc, double ld, Complex w);

// Reflects vertex a_i across the line through a_{i-1} and a_{i+1}.
PentagonConfig fold_geometric(const PentagonConfig& p, int vertex);

// Mirror image (the orientation-reversing symmetry z -> 1/z on the real locus).
PentagonConfig mirror(const PentagonConfig& p);

class DarbouxPoint {
 public:
  // Normalized to max modulus 1 with z_0 real and positive when z_0 != 0.
  explicit DarbouxPoint(const std::array<Complex, 5>& z);

  [[nodiscard]] const std::array<Complex, 5>& z() const { return z_; }
  Complex operator[](int i) const { return z_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] bool on_real_locus(double tol = 1e-9) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static DarbouxPoint from_json(const nlohmann::json& j);

 private:
  std::array<Complex, 5> z_;
};

DarbouxPoint lift(const PentagonConfig& p);
// Inverse of lift on the real locus; throws NoClosure off it.
PentagonConfig to_config(const SideLengths& l, const DarbouxPoint& z);

// sigma_ij: z_i' = v z_j, z_j' = v z_i, v = (l_i z_i + l_j z_j) / (l_i z_j + l_j z_i).
DarbouxPoint fold_algebraic(const SideLengths& l, const DarbouxPoint& z, int i, int j);

struct DarbouxResidual {
  double r1 = 0.0;  // |sum l_i z_i|
  double r2 = 0.0;  // |sum l_i prod_{j != i} z_j|
};
DarbouxResidual darboux_residual(const Lengths& l, const std::array<Complex, 5>& z);

// Chart k in {0,1,2,3} uses free angles (a, b) and dependent angles (c, d):
//   0: (1,2 | 3,4)   1: (2,3 | 4,1)   2: (3,4 | 1,2)   3: (4,1 | 2,3)
struct ChartIndices {
  int a, b, c, d;
};
ChartIndices chart_indices(int chart);

// Invariant area density with respect to d(theta_a) d(theta_b) in the given
// chart. Chart 0 gives |dH/dz_3|^{-1} for the affine Darboux equation H; the
// other charts carry the factor l_4 / l_d so that all charts describe one
// measure. Throws ChartSingular when |dH/dz_c| < 1e-12.
double vol_density(const PentagonConfig& p, int chart);

struct DensityValue {
  double density;
  int chart;
};
// First valid chart in the order 0, 1, 2, 3.
DensityValue vol_density(const PentagonConfig& p);

struct ConsistencyReport {
  double adjacent_vs_geometric = 0.0;  // max over the five adjacent folds
  double disjoint_commutator = 0.0;    // max over the 15 disjoint pairs
  double fiber_ratio_drift = 0.0;      // max over consecutive triples
};
ConsistencyReport consistency(const PentagonConfig& p);

// CSV row: theta1,theta2,branch,closure_residual
std::string config_csv_row(const PentagonConfig& p);

// Maximum over i of |t_i - s_i|.
double turn_distance(const PentagonConfig& p, const PentagonConfig& q);
double point_distance(const DarbouxPoint& p, const DarbouxPoint& q);

}  // namespace k3dyn::pentagon
