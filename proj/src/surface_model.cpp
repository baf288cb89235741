#include "k3dyn/surface_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "k3dyn/error.hpp"

namespace k3dyn {

using std::numbers::pi;

double angle_diff(double x, double y) {
  double d = std::remainder(x - y, 2.0 * pi);
  if (d <= -pi) d += 2.0 * pi;
  return d;
}

std::vector<int> SurfaceModel::chart_order(const State& x) const {
  std::vector<int> order(static_cast<std::size_t>(num_charts()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> cond(order.size());
  for (int c : order) cond[static_cast<std::size_t>(c)] = conditioning(x, c);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return cond[static_cast<std::size_t>(a)] > cond[static_cast<std::size_t>(b)];
  });
  return order;
}

std::optional<Mat2> SurfaceModel::differential(int gen, const State& x, int chart_in, int chart_out,
                                               double h) const {
  try {
    const Coords c0 = coords(x, chart_in);
    const Coords y0 = coords(apply(gen, x), chart_out);
    Mat2 d;
    for (int j = 0; j < 2; ++j) {
      std::array<Coords, 2> out{};
      for (int s = 0; s < 2; ++s) {
        Coords c = c0;
        c[static_cast<std::size_t>(j)] += s == 0 ? h : -h;
        const auto xp = lift(chart_in, c, x);
        if (!xp) return std::nullopt;
        out[static_cast<std::size_t>(s)] = coords(apply(gen, *xp), chart_out);
      }
      for (int i = 0; i < 2; ++i) {
        const auto k = static_cast<std::size_t>(i);
        d(i, j) = (angle_diff(out[0][k], y0[k]) - angle_diff(out[1][k], y0[k])) / (2.0 * h);
      }
    }
    if (!d.allFinite()) return std::nullopt;
    return d;
  } catch (const Error&) {
    return std::nullopt;
  }
}

State SurfaceModel::random_point(CounterRng& rng, int retries) const {
  int failures = 0;
  for (int attempt = 0; attempt < 100000 && failures < retries; ++attempt) {
    const Coords c{rng.uniform(-pi, pi), rng.uniform(-pi, pi)};
    const auto pts = fiber(0, c);
    if (pts.empty()) continue;
    const State x = pts[static_cast<std::size_t>(rng() % pts.size())];
    bool ok = false;
    try {
      ok = conditioning(x, best_chart(x)) >= 1e-3 && std::isfinite(density(x, best_chart(x)));
    } catch (const Error&) {
      ok = false;
    }
    if (ok) return x;
    ++failures;
  }
  throw SamplerError("no well-conditioned start point found");
}

double density_invariance_defect(const SurfaceModel& m, int gen, const State& x) {
  const State y = m.apply(gen, x);
  const int cin = m.best_chart(x), cout = m.best_chart(y);
  const auto d = m.differential(gen, x, cin, cout, 1e-6);
  if (!d) throw ChartSingular("differential unavailable");
  return std::abs(m.density(y, cout) * std::abs(d->determinant()) / m.density(x, cin) - 1.0);
}

// ---------------------------------------------------------------- Wehler

State WehlerModel::to_state(const wehler::Triple& t) {
  return {t[0].angle(), t[1].angle(), t[2].angle(), 0.0, 0.0};
}

wehler::Triple WehlerModel::to_triple(const State& x) {
  return {wehler::P1Point::from_angle(x[0]), wehler::P1Point::from_angle(x[1]),
          wehler::P1Point::from_angle(x[2])};
}

State WehlerModel::apply(int gen, const State& x) const {
  if (gen < 0 || gen > 2) throw DimensionError("Wehler generator index must be 0, 1 or 2");
  return to_state(wehler::sigma(s_, gen, wehler::make_point(s_, to_triple(x))).x);
}

double WehlerModel::residual(const State& x) const {
  return std::abs(s_.evaluate(to_triple(x))) / s_.scale();
}

State WehlerModel::project(const State& x) const {
  const int c = best_chart(x);
  return lift(c, coords(x, c), x).value_or(x);
}

namespace {
std::array<int, 2> others(int axis) {
  switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    case 2: return {0, 1};
    default: throw DimensionError("Wehler chart index must be 0, 1 or 2");
  }
}
}  // namespace

Coords WehlerModel::coords(const State& x, int chart) const {
  const auto o = others(chart);
  return {x[static_cast<std::size_t>(o[0])], x[static_cast<std::size_t>(o[1])]};
}

std::vector<State> WehlerModel::fiber(int chart, const Coords& c) const {
  const auto o = others(chart);
  wehler::Triple t{};
  t[static_cast<std::size_t>(o[0])] = wehler::P1Point::from_angle(c[0]);
  t[static_cast<std::size_t>(o[1])] = wehler::P1Point::from_angle(c[1]);
  std::vector<State> out;
  try {
    for (const auto& p : wehler::real_fiber_points(s_, chart, t).points) {
      State x = to_state(p.x);
      // Keep the free angles exactly as given.
      x[static_cast<std::size_t>(o[0])] = c[0];
      x[static_cast<std::size_t>(o[1])] = c[1];
      out.push_back(x);
    }
  } catch (const DegenerateFiber&) {
  }
  return out;
}

std::optional<State> WehlerModel::lift(int chart, const Coords& c, const State& near) const {
  const auto pts = fiber(chart, c);
  if (pts.empty()) return std::nullopt;
  const auto k = static_cast<std::size_t>(chart);
  const auto best = std::min_element(pts.begin(), pts.end(), [&](const State& a, const State& b) {
    return std::abs(angle_diff(a[k], near[k])) < std::abs(angle_diff(b[k], near[k]));
  });
  return *best;
}

double WehlerModel::conditioning(const State& x, int chart) const {
  const auto t = to_triple(x);
  double n2 = 0.0;
  for (int a = 0; a < 3; ++a) n2 += std::pow(s_.angle_derivative(t, a), 2);
  if (n2 == 0.0) return 0.0;
  return std::abs(s_.angle_derivative(t, chart)) / std::sqrt(n2);
}

double WehlerModel::density(const State& x, int chart) const {
  return wehler::vol_density(s_, wehler::make_point(s_, to_triple(x)), chart);
}

int WehlerModel::branch(const State& x) const {
  try {
    const State y = apply(2, x);
    return angle_diff(x[2], y[2]) > 0.0 ? 1 : 0;
  } catch (const Error&) {
    return 0;
  }
}

nlohmann::json WehlerModel::to_json() const {
  auto j = s_.to_json();
  j["type"] = "wehler";
  return j;
}

// ---------------------------------------------------------------- Pentagon

State PentagonModel::to_state(const pentagon::PentagonConfig& p) {
  State x{};
  for (int i = 0; i < 5; ++i) x[static_cast<std::size_t>(i)] = p.theta(i);
  x[0] = 0.0;
  return x;
}

pentagon::PentagonConfig PentagonModel::to_config(const State& x) const {
  std::array<pentagon::Complex, 5> t{};
  for (std::size_t i = 0; i < 5; ++i) t[i] = std::polar(1.0, x[i]);
  return {l_, t};
}

State PentagonModel::apply(int gen, const State& x) const {
  if (gen < 0 || gen > 4) throw DimensionError("pentagon generator index must be 0..4");
  return to_state(pentagon::fold_geometric(to_config(x), (gen + 1) % 5));
}

double PentagonModel::residual(const State& x) const {
  pentagon::Complex s = 0.0;
  for (std::size_t i = 0; i < 5; ++i) s += l_[static_cast<int>(i)] * std::polar(1.0, x[i]);
  return std::abs(s) / l_.total();
}

State PentagonModel::project(const State& x) const {
  const int c = best_chart(x);
  return lift(c, coords(x, c), x).value_or(x);
}

Coords PentagonModel::coords(const State& x, int chart) const {
  const auto ci = pentagon::chart_indices(chart);
  return {x[static_cast<std::size_t>(ci.a)], x[static_cast<std::size_t>(ci.b)]};
}

std::vector<State> PentagonModel::fiber(int chart, const Coords& c) const {
  const auto ci = pentagon::chart_indices(chart);
  const pentagon::Complex w =
      -(l_[0] + l_[ci.a] * std::polar(1.0, c[0]) + l_[ci.b] * std::polar(1.0, c[1]));
  std::vector<State> out;
  try {
    for (const auto& s : pentagon::dependent_turns(l_[ci.c], l_[ci.d], w)) {
      State x{};
      x[static_cast<std::size_t>(ci.a)] = c[0];
      x[static_cast<std::size_t>(ci.b)] = c[1];
      x[static_cast<std::size_t>(ci.c)] = std::arg(s[0]);
      x[static_cast<std::size_t>(ci.d)] = std::arg(s[1]);
      out.push_back(x);
    }
  } catch (const DegenerateChart&) {
  }
  return out;
}

std::optional<State> PentagonModel::lift(int chart, const Coords& c, const State& near) const {
  const auto pts = fiber(chart, c);
  if (pts.empty()) return std::nullopt;
  const auto ci = pentagon::chart_indices(chart);
  const auto kc = static_cast<std::size_t>(ci.c), kd = static_cast<std::size_t>(ci.d);
  auto dist = [&](const State& a) {
    return std::abs(angle_diff(a[kc], near[kc])) + std::abs(angle_diff(a[kd], near[kd]));
  };
  return *std::min_element(pts.begin(), pts.end(),
                           [&](const State& a, const State& b) { return dist(a) < dist(b); });
}

double PentagonModel::conditioning(const State& x, int chart) const {
  const auto ci = pentagon::chart_indices(chart);
  return std::abs(std::sin(x[static_cast<std::size_t>(ci.c)] - x[static_cast<std::size_t>(ci.d)]));
}

double PentagonModel::density(const State& x, int chart) const {
  return pentagon::vol_density(to_config(x), chart);
}

int PentagonModel::branch(const State& x) const { return to_config(x).branch() > 0 ? 1 : 0; }

nlohmann::json PentagonModel::to_json() const {
  auto j = l_.to_json();
  j["type"] = "pentagon";
  return j;
}

}  // namespace k3dyn
