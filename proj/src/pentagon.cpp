#include "k3dyn/pentagon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "k3dyn/error.hpp"

namespace k3dyn::pentagon {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(((i % 5) + 5) % 5); }

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

Complex unit(Complex z) {
  const double n = std::abs(z);
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("cannot normalize a zero turn");
  return z / n;
}

}  // namespace

SideLengths::SideLengths(const Lengths& l) : l_(l) {
  const auto rep = smoothness(l);
  if (!rep.pentagon_exists)
    throw InvalidLengths("no pentagon with these side lengths (2 max >= sum)");
  if (!rep.smooth) throw InvalidLengths("side lengths give a singular surface (a signed sum vanishes)");
}

double SideLengths::total() const { return std::accumulate(l_.begin(), l_.end(), 0.0); }
double SideLengths::max() const { return *std::max_element(l_.begin(), l_.end()); }

SideLengths SideLengths::from_json(const nlohmann::json& j) {
  const auto& a = j.at("lengths");
  if (!a.is_array() || a.size() != 5) throw InvalidLengths("\"lengths\" must hold 5 numbers");
  Lengths l{};
  for (std::size_t i = 0; i < 5; ++i) l[i] = a[i].get<double>();
  return SideLengths(l);
}

SmoothnessReport smoothness(const Lengths& l) {
  for (double x : l)
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidLengths("side lengths must be positive");
  SmoothnessReport rep;
  const double sum = std::accumulate(l.begin(), l.end(), 0.0);
  const double mx = *std::max_element(l.begin(), l.end());
  rep.existence_margin = sum - 2.0 * mx;
  rep.pentagon_exists = rep.existence_margin > 1e-9;
  rep.min_signed_sum = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < 16; ++mask) {
    double s = l[0];
    for (int i = 1; i < 5; ++i) s += ((mask >> (i - 1)) & 1U) ? -l[idx(i)] : l[idx(i)];
    rep.min_signed_sum = std::min(rep.min_signed_sum, std::abs(s));
  }
  rep.smooth = rep.min_signed_sum > 1e-9;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      std::array<double, 5> q{};
      q[idx(i)] = l[idx(j)];
      q[idx(j)] = -l[idx(i)];
      rep.nodes.push_back(q);
    }
  return rep;
}

PentagonConfig::PentagonConfig(const SideLengths& l, const std::array<Complex, 5>& turns)
    : l_(l), t_(turns) {
  for (auto& t : t_) t = unit(t);
  const Complex g = std::conj(t_[0]);
  for (auto& t : t_) t *= g;
  t_[0] = 1.0;
  if (closure_residual() > 1e-9 * l_.total()) throw NoClosure("turns do not close the pentagon");
}

std::array<Complex, 5> PentagonConfig::vertices() const {
  std::array<Complex, 5> a{};
  for (int i = 1; i < 5; ++i) a[idx(i)] = a[idx(i - 1)] + l_[i - 1] * t_[idx(i - 1)];
  return a;
}

double PentagonConfig::theta(int i) const { return std::arg(t_[idx(i)]); }

int PentagonConfig::branch() const {
  const auto a = vertices();
  return cross(a[0] - a[3], a[4] - a[3]) >= 0.0 ? 1 : -1;
}

double PentagonConfig::closure_residual() const {
  Complex s = 0.0;
  for (int i = 0; i < 5; ++i) s += l_[i] * t_[idx(i)];
  return std::abs(s);
}

namespace {

// Unit p, q with lc p + ld q = w; `side` picks the sign of cross(w, lc p).
struct PairSolution {
  int count = 0;
  Complex p, q;
};

PairSolution solve_pair(double lc, double ld, Complex w, int side) {
  PairSolution s;
  const double d = std::abs(w);
  const double scale = lc + ld;
  if (d <= 1e-14 * scale) {
    if (std::abs(lc - ld) <= 1e-14 * scale) throw DegenerateChart("coincident circles");
    throw NoClosure("concentric circles do not meet");
  }
  if (d > lc + ld || d < std::abs(lc - ld)) throw NoClosure("circles do not meet");
  const Complex e = w / d;
  const double x = (d * d + lc * lc - ld * ld) / (2.0 * d);
  const double h2 = lc * lc - x * x;
  const double h = h2 > 0.0 ? std::sqrt(h2) : 0.0;
  s.count = h > 0.0 ? 2 : 1;
  const Complex pp = x * e + (side >= 0 ? 1.0 : -1.0) * h * Complex(0.0, 1.0) * e;
  s.p = unit(pp);
  s.q = unit(w - lc * s.p);
  return s;
}

}  // namespace

std::vector<std::array<Complex, 2>> dependent_turns(double lc, double ld, Complex w) {
  std::vector<std::array<Complex, 2>> out;
  PairSolution s;
  try {
    s = solve_pair(lc, ld, w, 1);
  } catch (const NoClosure&) {
    return out;
  }
  out.push_back({s.p, s.q});
  if (s.count == 2) {
    const auto t = solve_pair(lc, ld, w, -1);
    out.push_back({t.p, t.q});
  }
  return out;
}

PentagonConfig solve_config(const SideLengths& l, double theta1, double theta2, int branch) {
  std::array<Complex, 5> t{};
  t[0] = 1.0;
  t[1] = std::polar(1.0, theta1);
  t[2] = std::polar(1.0, theta2);
  const Complex a3 = l[0] * t[0] + l[1] * t[1] + l[2] * t[2];
  const auto s = solve_pair(l[3], l[4], -a3, branch);
  t[3] = s.p;
  t[4] = s.q;
  return PentagonConfig(l, t);
}

int chart_solution_count(const SideLengths& l, double theta1, double theta2) {
  try {
    const Complex a3 = l[0] + l[1] * std::polar(1.0, theta1) + l[2] * std::polar(1.0, theta2);
    return solve_pair(l[3], l[4], -a3, 1).count;
  } catch (const NoClosure&) {
    return 0;
  }
}

PentagonConfig fold_geometric(const PentagonConfig& p, int vertex) {
  auto a = p.vertices();
  const Complex prev = a[idx(vertex - 1)], next = a[idx(vertex + 1)];
  const double scale = p.lengths().total();
  const double len = std::abs(next - prev);
  if (len < 1e-12 * scale) throw UndefinedAxis("neighbours of the folded vertex coincide");
  const Complex dir = (next - prev) / len;
  a[idx(vertex)] = prev + dir * dir * std::conj(a[idx(vertex)] - prev);
  std::array<Complex, 5> t{};
  for (int i = 0; i < 5; ++i) t[idx(i)] = (a[idx(i + 1)] - a[idx(i)]) / p.lengths()[i];
  return PentagonConfig(p.lengths(), t);
}

PentagonConfig mirror(const PentagonConfig& p) {
  std::array<Complex, 5> t{};
  for (int i = 0; i < 5; ++i) t[idx(i)] = std::conj(p.turns()[idx(i)]);
  return PentagonConfig(p.lengths(), t);
}

DarbouxPoint::DarbouxPoint(const std::array<Complex, 5>& z) : z_(z) {
  double m = 0.0;
  for (const auto& c : z_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw NumericError("non-finite coordinate");
    m = std::max(m, std::abs(c));
  }
  if (m == 0.0) throw NumericError("zero tuple is not a projective point");
  for (auto& c : z_) c /= m;
  if (std::abs(z_[0]) > 0.0) {
    const Complex phase = std::conj(z_[0]) / std::abs(z_[0]);
    for (auto& c : z_) c *= phase;
    z_[0] = std::abs(z_[0]);
  }
}

bool DarbouxPoint::on_real_locus(double tol) const {
  return std::all_of(z_.begin(), z_.end(), [&](Complex c) { return std::abs(std::abs(c) - 1.0) <= tol; });
}

nlohmann::json DarbouxPoint::to_json() const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : z_) a.push_back({c.real(), c.imag()});
  return a;
}

DarbouxPoint DarbouxPoint::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 5) throw NumericError("Darboux point needs 5 complex pairs");
  std::array<Complex, 5> z{};
  for (std::size_t i = 0; i < 5; ++i) z[i] = {j[i].at(0).get<double>(), j[i].at(1).get<double>()};
  return DarbouxPoint(z);
}

DarbouxPoint lift(const PentagonConfig& p) { return DarbouxPoint(p.turns()); }

PentagonConfig to_config(const SideLengths& l, const DarbouxPoint& z) {
  if (!z.on_real_locus()) throw NoClosure("point is not on the real locus");
  return PentagonConfig(l, z.z());
}

DarbouxPoint fold_algebraic(const SideLengths& l, const DarbouxPoint& z, int i, int j) {
  if (idx(i) == idx(j)) throw DimensionError("fold needs two distinct indices");
  const std::size_t ii = idx(i), jj = idx(j);
  const double li = l[static_cast<int>(ii)], lj = l[static_cast<int>(jj)];
  const Complex den = li * z[static_cast<int>(jj)] + lj * z[static_cast<int>(ii)];
  if (std::abs(den) < 1e-12 * l.max())
    throw IndeterminacyPoint("l_i z_j + l_j z_i vanishes");
  const Complex v = (li * z[static_cast<int>(ii)] + lj * z[static_cast<int>(jj)]) / den;
  auto w = z.z();
  w[ii] = v * z.z()[jj];
  w[jj] = v * z.z()[ii];
  return DarbouxPoint(w);
}

DarbouxResidual darboux_residual(const Lengths& l, const std::array<Complex, 5>& z_in) {
  double m = 0.0;
  for (const auto& c : z_in) m = std::max(m, std::abs(c));
  if (m == 0.0) throw NumericError("zero tuple is not a projective point");
  std::array<Complex, 5> z{};
  for (std::size_t i = 0; i < 5; ++i) z[i] = z_in[i] / m;
  Complex s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    s1 += l[i] * z[i];
    Complex prod = 1.0;
    for (std::size_t j = 0; j < 5; ++j)
      if (j != i) prod *= z[j];
    s2 += l[i] * prod;
  }
  return {std::abs(s1), std::abs(s2)};
}

ChartIndices chart_indices(int chart) {
  switch (chart) {
    case 0: return {1, 2, 3, 4};
    case 1: return {2, 3, 4, 1};
    case 2: return {3, 4, 1, 2};
    case 3: return {4, 1, 2, 3};
    default: throw DimensionError("pentagon chart index must be 0..3");
  }
}

double vol_density(const PentagonConfig& p, int chart) {
  const auto [a, b, c, d] = chart_indices(chart);
  const auto& l = p.lengths();
  const auto& z = p.turns();
  const Complex lin = l[0] * z[0] + l[a] * z[idx(a)] + l[b] * z[idx(b)] + l[c] * z[idx(c)];
  const Complex zc = z[idx(c)];
  const Complex dh = -l[c] / (zc * zc) + l[d] * l[d] * l[c] / (lin * lin);
  const double m = std::abs(dh);
  if (!(m >= 1e-12)) throw ChartSingular("dH/dz vanishes in pentagon chart " + std::to_string(chart));
  return l[4] / (l[d] * m);
}

DensityValue vol_density(const PentagonConfig& p) {
  for (int chart = 0; chart < 4; ++chart) {
    try {
      return {vol_density(p, chart), chart};
    } catch (const ChartSingular&) {
    }
  }
  throw ChartSingular("no valid pentagon chart");
}

double turn_distance(const PentagonConfig& p, const PentagonConfig& q) {
  double m = 0.0;
  for (std::size_t i = 0; i < 5; ++i) m = std::max(m, std::abs(p.turns()[i] - q.turns()[i]));
  return m;
}

double point_distance(const DarbouxPoint& p, const DarbouxPoint& q) {
  double m = 0.0;
  for (std::size_t i = 0; i < 5; ++i) m = std::max(m, std::abs(p.z()[i] - q.z()[i]));
  return m;
}

ConsistencyReport consistency(const PentagonConfig& p) {
  ConsistencyReport rep;
  const auto& l = p.lengths();
  const DarbouxPoint z = lift(p);
  for (int i = 0; i < 5; ++i) {
    const int j = (i + 1) % 5;
    const auto alg = to_config(l, fold_algebraic(l, z, i, j));
    const auto geo = fold_geometric(p, j);
    rep.adjacent_vs_geometric = std::max(rep.adjacent_vs_geometric, turn_distance(alg, geo));
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) pairs.emplace_back(i, j);
  for (std::size_t x = 0; x < pairs.size(); ++x)
    for (std::size_t y = x + 1; y < pairs.size(); ++y) {
      const auto [i, j] = pairs[x];
      const auto [k, m] = pairs[y];
      if (i == k || i == m || j == k || j == m) continue;
      const auto ab = fold_algebraic(l, fold_algebraic(l, z, k, m), i, j);
      const auto ba = fold_algebraic(l, fold_algebraic(l, z, i, j), k, m);
      rep.disjoint_commutator = std::max(rep.disjoint_commutator, point_distance(ab, ba));
    }
  for (int i = 0; i < 5; ++i) {
    const int j = (i + 1) % 5, k = (i + 2) % 5, lx = (i + 3) % 5, mx = (i + 4) % 5;
    const auto w = fold_algebraic(l, fold_algebraic(l, z, j, k), i, j);
    const Complex before = z[lx] / z[mx];
    const Complex after = w[lx] / w[mx];
    rep.fiber_ratio_drift = std::max(rep.fiber_ratio_drift, std::abs(before - after));
  }
  return rep;
}

std::string config_csv_row(const PentagonConfig& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g", p.theta(1), p.theta(2), p.branch(),
                p.closure_residual());
  return buf;
}

}  // namespace k3dyn::pentagon
