#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "k3dyn/wehler.hpp"

using namespace k3dyn;
using namespace k3dyn::wehler;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct affine evaluation of x^2 + y^2 + z^2 + x^2 y^2 z^2 - 4.
double f_affine(double x, double y, double z) { return x * x + y * y + z * z + x * x * y * y * z * z - 4.0; }

Triple affine(double x, double y, double z) { return {P1Point::affine(x), P1Point::affine(y), P1Point::affine(z)}; }

// x3^2 - x1^2: over x1 = 0 the x3-fiber is a double root at 0, exactly.
WehlerSurface double_root_surface() {
  WehlerSurface::Coeffs c{};
  c[9 * 0 + 3 * 0 + 2] = 1.0;
  c[9 * 2 + 3 * 0 + 0] = -1.0;
  return WehlerSurface(c);
}

// Real points of the sample surface with all coordinates finite.
std::vector<SurfacePoint> random_points(const WehlerSurface& s, std::size_t n, std::uint64_t seed) {
  auto set = sample_real(s, n, seed);
  return set.points;
}

// theta_3 over (theta_1, theta_2) on the root nearest to `near`, by solving
// the affine quadratic (1 + x^2 y^2) z^2 + (x^2 + y^2 - 4) = 0.
double theta3_near(double t1, double t2, double near) {
  const double x = std::tan(t1 / 2), y = std::tan(t2 / 2);
  const double a = 1 + x * x * y * y, c = x * x + y * y - 4;
  const double z = std::sqrt(-c / a);
  const double r1 = 2 * std::atan(z), r2 = -r1;
  return std::abs(r1 - near) < std::abs(r2 - near) ? r1 : r2;
}

}  // namespace

TEST_CASE("P1 points") {
  const P1Point p(3.0, 4.0);
  CHECK(p.u == doctest::Approx(0.6));
  CHECK(p.v == doctest::Approx(0.8));
  CHECK(P1Point::infinity().angle() == doctest::Approx(-kPi));
  CHECK_FALSE(P1Point::infinity().affine_value().has_value());
  CHECK(P1Point::from_angle(kPi / 2).affine_value().value() == doctest::Approx(1.0));
  CHECK(P1Point(1.0, 2.0).same_as(P1Point(-2.0, -4.0)));
  CHECK_THROWS_AS(P1Point(0.0, 0.0), NumericError);
}

TEST_CASE("validate") {
  const auto s = WehlerSurface::sample();
  CHECK(s.evaluate(affine(1, 1, 1)) == doctest::Approx(0.0));
  const auto rep = validate(s, 1000, 1);
  CHECK(rep.points_tested > 0);
  CHECK(rep.min_gradient_norm > 0.0);
  CHECK_FALSE(rep.degenerate_fiber_found);

  WehlerSurface::Coeffs zero{};
  CHECK_THROWS_AS(WehlerSurface{zero}, InvalidSurface);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  WehlerSurface::Coeffs c{};
  for (auto& v : c) v = nd(rng);
  const auto r2 = validate(WehlerSurface(c), 1000, 2);
  CHECK(r2.points_tested == 1000);
  CHECK(r2.min_gradient_norm > 0.0);
}

TEST_CASE("evaluation matches the affine polynomial") {
  const auto s = WehlerSurface::sample();
  CHECK(std::abs(s.evaluate(affine(1, 1, -1))) < 1e-15);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double x = d(rng), y = d(rng), z = d(rng);
    // Unit normalization divides by (1+x^2)(1+y^2)(1+z^2).
    const double expect = f_affine(x, y, z) / ((1 + x * x) * (1 + y * y) * (1 + z * z));
    CHECK(s.evaluate(affine(x, y, z)) == doctest::Approx(expect).epsilon(1e-12));
  }
  // At x1 = infinity only the x1^2 slice survives: y^2 z^2 + 1 (times v's).
  const Triple inf{P1Point::infinity(), P1Point::affine(1), P1Point::affine(1)};
  CHECK(s.evaluate(inf) == doctest::Approx(2.0 / 4.0));
}

TEST_CASE("involutions on the sample surface") {
  const auto s = WehlerSurface::sample();
  const auto p = make_point(s, affine(1, 1, 1));
  const auto q3 = sigma(s, 2, p);
  CHECK(q3.x[2].affine_value().value() == doctest::Approx(-1.0));
  CHECK(q3.x[0].same_as(p.x[0]));
  const auto q1 = sigma(s, 0, p);
  CHECK(q1.x[0].affine_value().value() == doctest::Approx(-1.0));
  CHECK_THROWS_AS(sigma(s, 3, p), DimensionError);

  SUBCASE("double root is fixed") {
    const auto t = double_root_surface();
    const auto d = make_point(t, affine(0.0, 0.5, 0.0));
    const auto e = sigma(t, 2, d);
    CHECK(e.x[2].same_as(d.x[2], 1e-12));
  }
}

TEST_CASE("involutivity, fiber preservation and residuals on random points") {
  const auto s = WehlerSurface::sample();
  const auto pts = random_points(s, 1500, 17);
  REQUIRE(pts.size() >= 1000);
  for (const auto& p : pts) {
    for (int k = 0; k < 3; ++k) {
      const auto q = sigma(s, k, p);
      for (int m = 0; m < 3; ++m)
        if (m != k) CHECK((q.x[m].u == p.x[m].u && q.x[m].v == p.x[m].v));
      const auto r = sigma(s, k, q);
      CHECK(r.x[k].same_as(p.x[k], 1e-10));
      CHECK(r.residual < 1e-10);
    }
  }
}

TEST_CASE("long words stay on the surface") {
  const auto s = WehlerSurface::sample();
  const auto start = random_points(s, 20, 3);
  REQUIRE_FALSE(start.empty());
  auto p = start.front();
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    p = sigma(s, static_cast<int>(rng() % 3), p);
    worst = std::max(worst, p.residual);
  }
  CHECK(worst < 1e-9 * s.scale());
}

TEST_CASE("real sampling") {
  const auto s = WehlerSurface::sample();
  const auto two = real_fiber_points(s, 2, affine(1, 1, 0));
  REQUIRE(two.points.size() == 2);
  CHECK(std::abs(std::abs(two.points[0].x[2].affine_value().value()) - 1.0) < 1e-12);
  CHECK(two.points[0].x[2].affine_value().value() == doctest::Approx(-two.points[1].x[2].affine_value().value()));
  CHECK(real_fiber_points(s, 2, affine(3, 3, 0)).points.empty());
  const auto dbl = real_fiber_points(double_root_surface(), 2, affine(0, 0.5, 0));
  CHECK(dbl.double_root);
  CHECK(dbl.points.size() == 1);

  const auto set = sample_real(s, 500, 4);
  CHECK_FALSE(set.empty_real_locus);
  CHECK(set.points.size() <= 1000);
  for (const auto& p : set.points) CHECK(p.residual < 1e-10);
  // Every sample point lies over (theta_1, theta_2) with x^2 + y^2 < 4.
  for (const auto& p : set.points) {
    const auto xv = p.x[0].affine_value(), yv = p.x[1].affine_value();
    REQUIRE((xv && yv));
    CHECK(*xv * *xv + *yv * *yv <= 4.0 + 1e-9);
  }
}

TEST_CASE("area density") {
  const auto s = WehlerSurface::sample();
  const auto p = make_point(s, affine(1, 1, 1));
  CHECK(vol_density(s, p, 2) == doctest::Approx(0.25).epsilon(1e-14));

  SUBCASE("closed form in the affine chart") {
    for (const auto& q : random_points(s, 100, 8)) {
      const double x = *q.x[0].affine_value(), y = *q.x[1].affine_value(), z = *q.x[2].affine_value();
      const double fz = 2 * z + 2 * x * x * y * y * z;
      const double expect = (1 + x * x) / 2 * (1 + y * y) / 2 / std::abs(fz);
      if (std::abs(fz) < 1e-6) continue;
      CHECK(vol_density(s, q, 2) == doctest::Approx(expect).epsilon(1e-10));
    }
  }

  SUBCASE("chart change by implicit differentiation") {
    const double h = 1e-5;
    for (const auto& q : random_points(s, 100, 12)) {
      const double t1 = q.x[0].angle(), t2 = q.x[1].angle(), t3 = q.x[2].angle();
      double r3, r1;
      try {
        r3 = vol_density(s, q, 2);
        r1 = vol_density(s, q, 0);
      } catch (const ChartSingular&) {
        continue;
      }
      // |d theta_3 / d theta_1| at fixed theta_2, from the fiber roots.
      const double a = theta3_near(t1 + h, t2, t3), b = theta3_near(t1 - h, t2, t3);
      if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a - b) > 0.1) continue;
      const double jac = std::abs(a - b) / (2 * h);
      if (jac > 1e3 || jac < 1e-3) continue;
      CHECK(r3 == doctest::Approx(r1 * jac).epsilon(1e-6));
    }
  }

  SUBCASE("singular chart") {
    const auto t = double_root_surface();
    CHECK_THROWS_AS(vol_density(t, make_point(t, affine(0, 0.5, 0)), 2), ChartSingular);
  }
}

TEST_CASE("density is invariant under the involutions") {
  // In the chart (theta_1, theta_2) the involution sigma_3 is the identity,
  // so invariance reads rho(sigma_3 p) = rho(p). For sigma_1 the chart map is
  // theta_1 -> theta_1' at fixed theta_2, differentiated numerically.
  const auto s = WehlerSurface::sample();
  const double h = 1e-6;
  int checked = 0;
  for (const auto& p : random_points(s, 100, 33)) {
    const auto q = sigma(s, 2, p);
    CHECK(vol_density(s, q, 2) == doctest::Approx(vol_density(s, p, 2)).epsilon(1e-9));

    const double t1 = p.x[0].angle(), t2 = p.x[1].angle(), t3 = p.x[2].angle();
    auto image_t1 = [&](double a) {
      const double b3 = theta3_near(a, t2, t3);
      const auto moved = sigma(s, 0, make_point(s, {P1Point::from_angle(a), P1Point::from_angle(t2),
                                                    P1Point::from_angle(b3)}));
      return moved.x[0].angle();
    };
    const auto img = sigma(s, 0, p);
    double d1 = image_t1(t1 + h) - image_t1(t1 - h);
    d1 = std::remainder(d1, 2 * kPi);
    const double jac = std::abs(d1) / (2 * h);
    double rp, rq;
    try {
      rp = vol_density(s, p, 2);
      rq = vol_density(s, img, 2);
    } catch (const ChartSingular&) {
      continue;
    }
    if (rp > 1e3 || rq > 1e3) continue;
    CHECK(rq * jac == doctest::Approx(rp).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("cohomology matrices") {
  const auto coh = coh_matrices();
  const auto g = *coh.form.exact_gram();
  const auto id = exact::ZMatrix::identity(3);
  for (int k = 0; k < 3; ++k) {
    const auto& m = coh.sigma_star[static_cast<std::size_t>(k)];
    CHECK(m * m == id);
    CHECK(m.transpose() * g * m == g);
    // Column k is -c_k + 2 c_i + 2 c_j.
    for (int r = 0; r < 3; ++r) CHECK(m(r, k) == (r == k ? -1 : 2));
  }
  CHECK(coh.sigma_star[0] == exact::to_zmatrix({{-1, 0, 0}, {2, 1, 0}, {2, 0, 1}}));

  SUBCASE("word convention on a noncommuting pair") {
    const auto w = word_pullback(coh, {0, 1});
    CHECK(w == coh.sigma_star[0] * coh.sigma_star[1]);
    CHECK_FALSE(w == coh.sigma_star[1] * coh.sigma_star[0]);
  }
}

TEST_CASE("JSON and CSV") {
  const auto s = WehlerSurface::sample();
  const auto t = WehlerSurface::from_json(s.to_json());
  CHECK(t.coeffs() == s.coeffs());
  CHECK_THROWS_AS(WehlerSurface::from_json(nlohmann::json{{"coeffs", {1, 2}}}), InvalidSurface);
  const auto row = point_csv_row(make_point(s, affine(1, 1, 1)));
  CHECK(std::count(row.begin(), row.end(), ',') == 3);
}
