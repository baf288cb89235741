#include "k3dyn/wehler.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "k3dyn/rng.hpp"

namespace k3dyn::wehler {

namespace {

using Coeffs = WehlerSurface::Coeffs;

template <class T>
using HomPoint = std::array<std::array<T, 2>, 3>;

// mono[m][e] = u_m^e v_m^(2-e)
template <class T>
std::array<std::array<T, 3>, 3> monomials(const HomPoint<T>& p) {
  std::array<std::array<T, 3>, 3> mono{};
  for (int m = 0; m < 3; ++m) {
    const T u = p[m][0], v = p[m][1];
    mono[m] = {v * v, u * v, u * u};
  }
  return mono;
}

template <class T>
T eval_hom(const Coeffs& c, const HomPoint<T>& p) {
  const auto mono = monomials(p);
  T acc(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double cijk = c[9 * i + 3 * j + k];
        if (cijk != 0.0) acc += cijk * mono[0][i] * mono[1][j] * mono[2][k];
      }
  return acc;
}

// {C, B, A}: coefficient of u^e v^(2-e) on `axis`, for e = 0, 1, 2.
template <class T>
std::array<T, 3> fiber_coeffs(const Coeffs& c, int axis, const HomPoint<T>& p) {
  const auto mono = monomials(p);
  std::array<T, 3> out{T(0), T(0), T(0)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double cijk = c[9 * i + 3 * j + k];
        if (cijk == 0.0) continue;
        const std::array<int, 3> e{i, j, k};
        T w(cijk);
        for (int m = 0; m < 3; ++m)
          if (m != axis) w *= mono[m][e[m]];
        out[e[axis]] += w;
      }
  return out;
}

template <class T>
std::array<T, 6> gradient_hom(const Coeffs& c, const HomPoint<T>& p) {
  const auto mono = monomials(p);
  // d/du and d/dv of u^e v^(2-e)
  std::array<std::array<T, 3>, 3> du{}, dv{};
  for (int m = 0; m < 3; ++m) {
    const T u = p[m][0], v = p[m][1];
    du[m] = {T(0), v, T(2) * u};
    dv[m] = {T(2) * v, u, T(0)};
  }
  std::array<T, 6> g{};
  g.fill(T(0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double cijk = c[9 * i + 3 * j + k];
        if (cijk == 0.0) continue;
        const std::array<int, 3> e{i, j, k};
        for (int m = 0; m < 3; ++m) {
          T pu(cijk), pv(cijk);
          for (int o = 0; o < 3; ++o) {
            pu *= (o == m) ? du[o][e[o]] : mono[o][e[o]];
            pv *= (o == m) ? dv[o][e[o]] : mono[o][e[o]];
          }
          g[2 * m] += pu;
          g[2 * m + 1] += pv;
        }
      }
  return g;
}

HomPoint<double> hom(const Triple& p) {
  return {{{p[0].u, p[0].v}, {p[1].u, p[1].v}, {p[2].u, p[2].v}}};
}

// One Newton step for a u^2 + b u v + c v^2 = 0 along the unit circle.
P1Point newton_polish(const FiberQuadratic& q, P1Point x) {
  const double f = q.a * x.u * x.u + q.b * x.u * x.v + q.c * x.v * x.v;
  const double df = (2 * q.a * x.u + q.b * x.v) * x.v - (q.b * x.u + 2 * q.c * x.v) * x.u;
  if (std::abs(df) <= 1e-300 || !std::isfinite(f / df)) return x;
  const double s = -f / df;
  return {x.u + s * x.v, x.v - s * x.u};
}

// One homogeneous root [u : v] of a u^2 + b u v + c v^2.
std::array<std::complex<double>, 2> complex_root(std::complex<double> a, std::complex<double> b,
                                                 std::complex<double> c) {
  const auto disc = std::sqrt(b * b - 4.0 * a * c);
  const auto s = std::real(std::conj(b) * disc) >= 0 ? disc : -disc;
  const auto q = -0.5 * (b + s);
  std::array<std::complex<double>, 2> root = std::abs(a) >= std::abs(c)
                                                 ? std::array<std::complex<double>, 2>{q, a}
                                                 : std::array<std::complex<double>, 2>{c, q};
  if (std::abs(root[0]) + std::abs(root[1]) == 0.0) root = {1.0, 0.0};
  return root;
}

}  // namespace

P1Point::P1Point(double u_in, double v_in) {
  const double n = std::hypot(u_in, v_in);
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("degenerate point of P1");
  u = u_in / n;
  v = v_in / n;
}

P1Point P1Point::from_angle(double theta) { return {std::sin(0.5 * theta), std::cos(0.5 * theta)}; }

double P1Point::angle() const {
  double uu = u, vv = v;
  if (vv < 0.0 || (vv == 0.0 && uu < 0.0)) {
    uu = -uu;
    vv = -vv;
  }
  double t = 2.0 * std::atan2(uu, vv);
  if (t >= std::numbers::pi) t -= 2.0 * std::numbers::pi;
  return t;
}

std::optional<double> P1Point::affine_value() const {
  if (v == 0.0) return std::nullopt;
  return u / v;
}

WehlerSurface::WehlerSurface(const Coeffs& coeffs) : coeffs_(coeffs), scale_(0.0) {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw InvalidSurface("non-finite coefficient");
    scale_ = std::max(scale_, std::abs(c));
  }
  if (scale_ == 0.0) throw InvalidSurface("coefficient tensor is identically zero");
}

WehlerSurface WehlerSurface::sample() {
  Coeffs c{};
  c[9 * 2] = 1.0;               // x1^2
  c[3 * 2] = 1.0;               // x2^2
  c[2] = 1.0;                   // x3^2
  c[9 * 2 + 3 * 2 + 2] = 1.0;   // x1^2 x2^2 x3^2
  c[0] = -4.0;
  return WehlerSurface(c);
}

double WehlerSurface::evaluate(const Triple& p) const {
  const double v = eval_hom(coeffs_, hom(p));
  if (!std::isfinite(v)) throw NumericError("non-finite surface value");
  return v;
}

std::complex<double> WehlerSurface::evaluate(const HomPoint<std::complex<double>>& p) const {
  return eval_hom(coeffs_, p);
}

FiberQuadratic WehlerSurface::fiber(int axis, const Triple& p) const {
  const auto f = fiber_coeffs(coeffs_, axis, hom(p));
  return {f[2], f[1], f[0]};
}

double WehlerSurface::angle_derivative(const Triple& p, int axis) const {
  const auto q = fiber(axis, p);
  const double u = p[axis].u, v = p[axis].v;
  return (q.a - q.c) * u * v + 0.5 * q.b * (v * v - u * u);
}

std::array<std::complex<double>, 6> WehlerSurface::gradient(
    const HomPoint<std::complex<double>>& p) const {
  return gradient_hom(coeffs_, p);
}

nlohmann::json WehlerSurface::to_json() const { return {{"coeffs", coeffs_}}; }

WehlerSurface WehlerSurface::from_json(const nlohmann::json& j) {
  const auto& c = j.at("coeffs");
  if (!c.is_array() || c.size() != 27) throw InvalidSurface("\"coeffs\" must hold 27 numbers");
  Coeffs out{};
  for (std::size_t i = 0; i < 27; ++i) out[i] = c[i].get<double>();
  return WehlerSurface(out);
}

ValidationReport validate(const WehlerSurface& s, std::size_t samples, std::uint64_t seed) {
  using C = std::complex<double>;
  ValidationReport rep;
  rep.min_gradient_norm = std::numeric_limits<double>::infinity();
  rep.min_fiber_coeff = std::numeric_limits<double>::infinity();
  CounterRng rng(seed);
  auto random_p1 = [&]() {
    std::array<C, 2> z{C(rng.normal(), rng.normal()), C(rng.normal(), rng.normal())};
    const double n = std::sqrt(std::norm(z[0]) + std::norm(z[1]));
    return std::array<C, 2>{z[0] / n, z[1] / n};
  };
  const double sc = s.scale();
  for (std::size_t t = 0; t < samples; ++t) {
    HomPoint<C> p{random_p1(), random_p1(), random_p1()};
    // Fiber scan on every axis.
    for (int axis = 0; axis < 3; ++axis) {
      const auto f = fiber_coeffs(s.coeffs(), axis, p);
      const double m = std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2])}) / sc;
      rep.min_fiber_coeff = std::min(rep.min_fiber_coeff, m);
      ++rep.fibers_tested;
      if (m < 1e-9) rep.degenerate_fiber_found = true;
    }
    // A point on the surface above (x1, x2), then its gradient.
    const auto f = fiber_coeffs(s.coeffs(), 2, p);
    if (std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2])}) < 1e-12 * sc) continue;
    const auto root = complex_root(f[2], f[1], f[0]);
    const double n = std::sqrt(std::norm(root[0]) + std::norm(root[1]));
    p[2] = {root[0] / n, root[1] / n};
    const auto g = s.gradient(p);
    double gn = 0.0;
    for (const auto& gi : g) gn += std::norm(gi);
    rep.min_gradient_norm = std::min(rep.min_gradient_norm, std::sqrt(gn) / sc);
    ++rep.points_tested;
  }
  rep.accepted = rep.points_tested > 0 && rep.min_gradient_norm > 1e-9 && !rep.degenerate_fiber_found;
  return rep;
}

SurfacePoint make_point(const WehlerSurface& s, const Triple& x) {
  return {x, std::abs(s.evaluate(x))};
}

SurfacePoint sigma(const WehlerSurface& s, int axis, const SurfacePoint& p) {
  if (axis < 0 || axis > 2) throw DimensionError("axis must be 0, 1 or 2");
  const double tol = 1e-12 * s.scale();
  const auto q = s.fiber(axis, p.x);
  if (std::max({std::abs(q.a), std::abs(q.b), std::abs(q.c)}) < tol)
    throw DegenerateFiber("fiber is contained in the surface");
  const double u = p.x[axis].u, v = p.x[axis].v;
  // The companion root, from the product (t t' = C/A) or sum (t + t' = -B/A)
  // of roots; both are projectively equal, keep the better conditioned one.
  const double pu = q.c * v, pv = q.a * u;
  const double su = -q.b * v - q.a * u, sv = q.a * v;
  const double pn = std::hypot(pu, pv), sn = std::hypot(su, sv);
  if (std::max(pn, sn) < tol) throw IndeterminateRoot("both root-swap formulas degenerate");
  P1Point other = pn >= sn ? P1Point(pu, pv) : P1Point(su, sv);
  other = newton_polish(q, other);
  Triple x = p.x;
  x[axis] = other;
  return make_point(s, x);
}

FiberPoints real_fiber_points(const WehlerSurface& s, int axis, const Triple& fixed) {
  const auto q = s.fiber(axis, fixed);
  const double sc = s.scale();
  if (std::max({std::abs(q.a), std::abs(q.b), std::abs(q.c)}) < 1e-12 * sc)
    throw DegenerateFiber("fiber is contained in the surface");
  FiberPoints out;
  const double disc = q.b * q.b - 4.0 * q.a * q.c;
  const double disc_scale = q.b * q.b + 4.0 * std::abs(q.a * q.c);
  std::vector<P1Point> roots;
  if (std::abs(disc) <= 1e-14 * disc_scale) {
    out.double_root = true;
    if (q.a != 0.0 || q.b != 0.0)
      roots.emplace_back(-q.b, 2.0 * q.a);
    else
      roots.push_back(P1Point::infinity());
  } else if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (q.b + std::copysign(sq, q.b));
    roots.emplace_back(qq, q.a);
    roots.emplace_back(q.c, qq);
  }
  for (auto r : roots) {
    if (!out.double_root) r = newton_polish(q, r);
    Triple x = fixed;
    x[axis] = r;
    out.points.push_back(make_point(s, x));
  }
  return out;
}

RealSampleSet sample_real(const WehlerSurface& s, std::size_t n, std::uint64_t seed) {
  RealSampleSet out;
  CounterRng rng(seed);
  for (std::size_t t = 0; t < n; ++t) {
    const double t1 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double t2 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Triple fixed{P1Point::from_angle(t1), P1Point::from_angle(t2), P1Point()};
    try {
      auto fp = real_fiber_points(s, 2, fixed);
      if (fp.double_root) ++out.double_roots;
      for (auto& p : fp.points) out.points.push_back(p);
    } catch (const DegenerateFiber&) {
      continue;
    }
  }
  out.empty_real_locus = out.points.empty();
  return out;
}

double vol_density(const WehlerSurface& s, const SurfacePoint& p, int axis) {
  const double d = s.angle_derivative(p.x, axis);
  if (std::abs(d) < 1e-12 * s.scale())
    throw ChartSingular("dF/dtheta vanishes on axis " + std::to_string(axis));
  return 1.0 / (8.0 * std::abs(d));
}

std::string point_csv_row(const SurfacePoint& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", p.x[0].angle(), p.x[1].angle(),
                p.x[2].angle(), p.residual);
  return buf;
}

WehlerCohomology coh_matrices() {
  WehlerCohomology coh{IntersectionForm::wehler(),
                       {exact::to_zmatrix({{-1, 0, 0}, {2, 1, 0}, {2, 0, 1}}),
                        exact::to_zmatrix({{1, 2, 0}, {0, -1, 0}, {0, 2, 1}}),
                        exact::to_zmatrix({{1, 0, 2}, {0, 1, 2}, {0, 0, -1}})}};
  const auto& g = *coh.form.exact_gram();
  const auto id = exact::ZMatrix::identity(3);
  for (int k = 0; k < 3; ++k) {
    const auto& m = coh.sigma_star[static_cast<std::size_t>(k)];
    if (!(m * m == id) || !(m.transpose() * g * m == g))
      throw std::logic_error("Wehler involution matrices are inconsistent");
    for (int c = 0; c < 3; ++c) {
      const long long expect = c == k ? -1 : 2;
      if (m(static_cast<std::size_t>(c), static_cast<std::size_t>(k)) != expect)
        throw std::logic_error("sigma_k^* c_k != -c_k + 2 c_i + 2 c_j");
    }
  }
  return coh;
}

exact::ZMatrix word_pullback(const WehlerCohomology& coh, const std::vector<int>& word) {
  auto m = exact::ZMatrix::identity(3);
  for (int k : word) {
    if (k < 0 || k > 2) throw DimensionError("Wehler involution index must be 0, 1 or 2");
    m = exact::multiply(m, coh.sigma_star[static_cast<std::size_t>(k)]);
  }
  return m;
}

}  // namespace k3dyn::wehler
