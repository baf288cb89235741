#pragma once

// Real Wehler surfaces: hypersurfaces of tri-degree (2,2,2) in P1 x P1 x P1.
//
// Points of P1 are unit vectors (u, v) with affine value x = u / v; the angle
// chart x = tan(theta / 2) corresponds to (u, v) = (sin(theta/2), cos(theta/2))
// and puts the point at infinity at theta = -pi. Axes are numbered 0, 1, 2.

#include <json.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "k3dyn/exact.hpp"
#include "k3dyn/minkowski.hpp"

namespace k3dyn::wehler {

struct P1Point {
  double u = 0.0;
  double v = 1.0;

  P1Point() = default;
  // Normalizes (u, v); throws NumericError for (0, 0) or non-finite input.
  P1Point(double u, double v);

  static P1Point affine(double x) { return {x, 1.0}; }
  static P1Point infinity() { return {1.0, 0.0}; }
  static P1Point from_angle(double theta);

  // Angle in [-pi, pi).
  [[nodiscard]] double angle() const;
  [[nodiscard]] std::optional<double> affine_value() const;
  [[nodiscard]] bool same_as(const P1Point& o, double tol = 1e-12) const {
    return std::abs(u * o.v - o.u * v) < tol;
  }
};

using Triple = std::array<P1Point, 3>;

struct SurfacePoint {
  Triple x;
  double residual = 0.0;
};

// Coefficients of A t^2 + B t + C, the equation restricted to a fiber of the
// projection forgetting one axis (t = u/v on that axis).
struct FiberQuadratic {
  double a = 0.0, b = 0.0, c = 0.0;
};

class WehlerSurface {
 public:
  // coeffs[9 i + 3 j + k] multiplies x1^i x2^j x3^k.
  using Coeffs = std::array<double, 27>;

  explicit WehlerSurface(const Coeffs& coeffs);

  // x1^2 + x2^2 + x3^2 + x1^2 x2^2 x3^2 - 4
  static WehlerSurface sample();

  [[nodiscard]] const Coeffs& coeffs() const { return coeffs_; }
  [[nodiscard]] double coeff(int i, int j, int k) const { return coeffs_[9 * i + 3 * j + k]; }
  // Largest absolute coefficient.
  [[nodiscard]] double scale() const { return scale_; }

  // Tri-homogenized value at unit-normalized points.
  [[nodiscard]] double evaluate(const Triple& p) const;
  [[nodiscard]] FiberQuadratic fiber(int axis, const Triple& p) const;
  // Partial derivative of the homogenized value with respect to the angle of
  // `axis` (the other two points held fixed).
  [[nodiscard]] double angle_derivative(const Triple& p, int axis) const;
  // d/du_m and d/dv_m for m = 0, 1, 2, interleaved.
  [[nodiscard]] std::array<std::complex<double>, 6> gradient(
      const std::array<std::array<std::complex<double>, 2>, 3>& p) const;
  [[nodiscard]] std::complex<double> evaluate(
      const std::array<std::array<std::complex<double>, 2>, 3>& p) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static WehlerSurface from_json(const nlohmann::json& j);

 private:
  Coeffs coeffs_;
  double scale_;
};

struct ValidationReport {
  std::size_t points_tested = 0;
  std::size_t fibers_tested = 0;
  double min_gradient_norm = 0.0;  // relative to the coefficient scale
  double min_fiber_coeff = 0.0;    // min over fibers of max(|A|,|B|,|C|), relative
  bool degenerate_fiber_found = false;
  bool accepted = false;
};

// Randomized necessary-condition scan for smoothness and for fibers of the
// projections contained in the surface.
ValidationReport validate(const WehlerSurface& s, std::size_t samples, std::uint64_t seed);

SurfacePoint make_point(const WehlerSurface& s, const Triple& x);

// The involution swapping the two points of the fiber forgetting `axis`.
// Ends with one Newton step on the moved coordinate.
SurfacePoint sigma(const WehlerSurface& s, int axis, const SurfacePoint& p);

// Real points above (x_i, x_j) in the fiber forgetting `axis`; the entries of
// `fixed` on the other two axes are used, the entry on `axis` is ignored.
struct FiberPoints {
  std::vector<SurfacePoint> points;
  bool double_root = false;
};
FiberPoints real_fiber_points(const WehlerSurface& s, int axis, const Triple& fixed);

struct RealSampleSet {
  std::vector<SurfacePoint> points;
  std::size_t double_roots = 0;
  bool empty_real_locus = false;  // warning, not an error
};
RealSampleSet sample_real(const WehlerSurface& s, std::size_t n, std::uint64_t seed);

// Invariant area density with respect to d(theta_i) d(theta_j), where axis is
// the dependent coordinate. Throws ChartSingular where that chart degenerates.
double vol_density(const WehlerSurface& s, const SurfacePoint& p, int axis);

// Point CSV row: theta1,theta2,theta3,residual
std::string point_csv_row(const SurfacePoint& p);

struct WehlerCohomology {
  IntersectionForm form;
  std::array<exact::ZMatrix, 3> sigma_star;
};

// Exact matrices of the pullbacks sigma_k^* on span(c1, c2, c3).
WehlerCohomology coh_matrices();

// Pullback matrix of the word applying involutions in the given order:
// for word {k1, ..., km} (k1 first) this is M_{k1} ... M_{km}.
exact::ZMatrix word_pullback(const WehlerCohomology& coh, const std::vector<int>& word);

}  // namespace k3dyn::wehler
