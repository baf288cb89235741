#include "k3dyn/minkowski.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numeric>

namespace k3dyn {

Mat to_real(const exact::ZMatrix& m) {
  Mat r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(exact::to_long_double(m(i, j)));
  return r;
}

namespace {

void require_dim(const IntersectionForm& form, const CohClass& a) {
  if (a.dim() != form.dim())
    throw DimensionError("class has dimension " + std::to_string(a.dim()) + ", form has " +
                         std::to_string(form.dim()));
}

// Largest real root of p (ascending, monic), polished in extended precision.
double largest_real_root(const exact::Poly<exact::BigInt>& p) {
  const auto deg = static_cast<Eigen::Index>(p.size() - 1);
  std::vector<long double> c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = exact::to_long_double(p[i]);
  Mat companion = Mat::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i)
    companion(i, deg - 1) = -static_cast<double>(c[static_cast<std::size_t>(i)] / c.back());
  Eigen::EigenSolver<Mat> es(companion, false);
  long double best = 0.0L;
  double best_mod = -1.0;
  for (Eigen::Index i = 0; i < deg; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z) > best_mod) {
      best_mod = std::abs(z);
      best = z.real();
    }
  }
  long double x = best;
  for (int it = 0; it < 50; ++it) {
    long double f = 0.0L, df = 0.0L;
    for (std::size_t k = c.size(); k-- > 0;) {
      df = df * x + f;
      f = f * x + c[k];
    }
    if (df == 0.0L) break;
    const long double step = f / df;
    x -= step;
    if (std::fabs(step) <= 1e-30L * std::fabs(x)) break;
  }
  return static_cast<double>(x);
}

}  // namespace

IntersectionForm::IntersectionForm(Mat gram) : gram_(std::move(gram)) {
  if (gram_.rows() != gram_.cols() || gram_.rows() < 1)
    throw DimensionError("Gram matrix must be square and nonempty");
  if (!(gram_.array().isFinite().all())) throw SignatureError("Gram matrix has non-finite entries");
  if (gram_ != gram_.transpose()) throw SignatureError("Gram matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Mat> es(gram_);
  const Vec& ev = es.eigenvalues();
  const double margin = 1e-9 * ev.cwiseAbs().maxCoeff();
  int positive = 0, negative = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > margin) ++positive;
    else if (ev(i) < -margin) ++negative;
  }
  if (positive != 1 || negative != ev.size() - 1)
    throw SignatureError("form does not have signature (1," + std::to_string(ev.size() - 1) + ")");

  const Vec ones = Vec::Ones(dim());
  const double q1 = ones.dot(gram_ * ones);
  if (q1 > margin) {
    e0_ = ones / std::sqrt(q1);
  } else {
    Vec v = es.eigenvectors().col(ev.size() - 1);
    if (v.sum() < 0) v = -v;
    e0_ = v / std::sqrt(v.dot(gram_ * v));
  }
}

IntersectionForm IntersectionForm::from_integer(const exact::ZMatrix& gram) {
  IntersectionForm f(to_real(gram));
  f.exact_gram_ = gram;
  return f;
}

IntersectionForm IntersectionForm::from_real(const Mat& gram) { return IntersectionForm(gram); }

IntersectionForm IntersectionForm::wehler() {
  auto f = from_integer(exact::to_zmatrix({{0, 2, 2}, {2, 0, 2}, {2, 2, 0}}));
  return f.with_reference(CohClass(Vec::Ones(3) / std::sqrt(12.0)));
}

IntersectionForm IntersectionForm::with_reference(const CohClass& kappa0, double tol) const {
  require_dim(*this, kappa0);
  if (!on_hyperboloid(kappa0, tol))
    throw NotOnHyperboloid("reference class must satisfy q = 1 on the positive sheet");
  IntersectionForm f = *this;
  f.kappa0_ = kappa0;
  return f;
}

const CohClass& IntersectionForm::reference() const {
  if (!kappa0_) throw ConfigError("no reference class configured");
  return *kappa0_;
}

double IntersectionForm::pair(const CohClass& a, const CohClass& b) const {
  require_dim(*this, a);
  require_dim(*this, b);
  return a.coords.dot(gram_ * b.coords);
}

double IntersectionForm::mass(const CohClass& a) const { return pair(a, reference()); }

bool IntersectionForm::on_hyperboloid(const CohClass& a, double tol) const {
  return std::abs(q(a) - 1.0) <= tol && a.coords.dot(gram_ * e0_) > 0.0;
}

double hyperbolic_distance(const IntersectionForm& form, const CohClass& u, const CohClass& v,
                           double tol) {
  if (!form.on_hyperboloid(u, tol) || !form.on_hyperboloid(v, tol))
    throw NotOnHyperboloid("hyperbolic distance needs classes with q = 1 on the positive sheet");
  const double c = form.pair(u, v);
  if (c < 1.0 - tol) throw FormViolation("<u|v> < 1 contradicts the reverse Schwarz inequality");
  if (c < 2.0) {
    // -q(u - v) = 4 sinh^2(d/2); accurate for nearby points.
    const CohClass diff(u.coords - v.coords);
    const double s = std::sqrt(std::max(0.0, -form.q(diff)));
    return 2.0 * std::asinh(0.5 * s);
  }
  return std::acosh(c);
}

Mat orthonormalize(const IntersectionForm& form) {
  const Eigen::Index n = form.dim();
  const Mat& g = form.gram();
  const double margin = 1e-12 * g.cwiseAbs().maxCoeff();
  std::vector<Vec> basis{form.base_point()};
  std::vector<double> signs{1.0};
  std::vector<Eigen::Index> remaining(static_cast<std::size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);

  for (Eigen::Index step = 1; step < n; ++step) {
    double best_q = 0.0;
    std::size_t best_idx = remaining.size();
    Vec best_v;
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      Vec v = Vec::Unit(n, remaining[c]);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t b = 0; b < basis.size(); ++b)
          v -= (basis[b].dot(g * v) * signs[b]) * basis[b];
      const double qv = v.dot(g * v);
      if (-qv > best_q) {
        best_q = -qv;
        best_idx = c;
        best_v = v;
      }
    }
    if (best_idx == remaining.size() || best_q <= margin)
      throw SignatureError("form is degenerate or has the wrong signature");
    basis.push_back(best_v / std::sqrt(best_q));
    signs.push_back(-1.0);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_idx));
  }
  Mat s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) s.col(j) = basis[static_cast<std::size_t>(j)];
  return s;
}

LatticeIsometry::LatticeIsometry(const exact::ZMatrix& matrix, const IntersectionForm& form)
    : matrix_(to_real(matrix)), exact_(matrix), form_(form) {
  if (static_cast<Eigen::Index>(matrix.rows()) != form.dim() ||
      static_cast<Eigen::Index>(matrix.cols()) != form.dim())
    throw DimensionError("isometry dimension does not match the form");
  if (form.exact_gram()) {
    const auto& g = *form.exact_gram();
    const bool preserved = exact::with_overflow_fallback([&](auto tag) {
      using T = typename decltype(tag)::type;
      const auto m = matrix.cast<T>();
      return m.transpose() * g.cast<T>() * m == g.cast<T>();
    });
    if (!preserved) throw FormViolation("M^T G M != G");
  } else {
    const Mat& g = form.gram();
    const double err = (matrix_.transpose() * g * matrix_ - g).cwiseAbs().maxCoeff();
    if (err > kDefaultTol * std::max(1.0, g.cwiseAbs().maxCoeff()) * matrix_.squaredNorm())
      throw FormViolation("M^T G M != G");
  }
  check_positive_sheet();
}

LatticeIsometry::LatticeIsometry(const Mat& matrix, const IntersectionForm& form, double tol)
    : matrix_(matrix), form_(form) {
  if (matrix.rows() != form.dim() || matrix.cols() != form.dim())
    throw DimensionError("isometry dimension does not match the form");
  const Mat& g = form.gram();
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff()) * std::max(1.0, matrix.squaredNorm());
  if ((matrix.transpose() * g * matrix - g).cwiseAbs().maxCoeff() > tol * scale)
    throw FormViolation("M^T G M != G within tolerance");
  check_positive_sheet();
}

void LatticeIsometry::check_positive_sheet() const {
  const CohClass e0(form_.base_point());
  if (form_.pair(e0, CohClass(matrix_ * e0.coords)) <= 0.0)
    throw FormViolation("isometry swaps the two sheets of the hyperboloid");
}

std::string to_string(IsometryKind kind) {
  switch (kind) {
    case IsometryKind::Elliptic: return "elliptic";
    case IsometryKind::Parabolic: return "parabolic";
    case IsometryKind::Loxodromic: return "loxodromic";
  }
  return "unknown";
}

IsometryReport classify_isometry(const LatticeIsometry& g, double tol) {
  using exact::BigInt;
  using exact::Poly;
  IsometryReport rep;

  if (!g.exact()) {
    // Eigenvalues alone cannot separate a Jordan block from a nearby
    // loxodromic (rounding splits the block by about eps^(1/3)), so classify
    // by the growth of |m^N| between N = 2^10 and N = 2^20: bounded,
    // quadratic (log ratio near 2 log 1024) or exponential.
    const Mat& m = g.matrix();
    Mat p = m;
    double n10 = 0.0;
    for (int k = 1; k <= 20; ++k) {
      p = p * p;
      if (k == 10) n10 = operator_norm(p);
      if (!p.allFinite()) break;
    }
    const double n20 = p.allFinite() ? operator_norm(p) : INFINITY;
    const double growth = std::log(n20 / n10);
    if (!(growth < 100.0)) {
      Eigen::EigenSolver<Mat> es(m, false);
      double rho = 0.0;
      for (Eigen::Index i = 0; i < m.rows(); ++i) rho = std::max(rho, std::abs(es.eigenvalues()(i)));
      if (!(rho > 1.0 + tol)) throw FormViolation("exponential growth without an eigenvalue outside the unit circle");
      rep.kind = IsometryKind::Loxodromic;
      rep.spectral_radius = rho;
      rep.translation_length = std::log(rho);
      rep.semisimple = false;
      return rep;
    }
    rep.kind = growth > 3.0 ? IsometryKind::Parabolic : IsometryKind::Elliptic;
    rep.semisimple = rep.kind == IsometryKind::Elliptic;
    return rep;
  }

  const exact::ZMatrix& z = *g.exact();
  rep.char_poly = exact::with_overflow_fallback([&](auto tag) {
    using T = typename decltype(tag)::type;
    const auto cp = exact::charpoly(z.cast<T>());
    Poly<BigInt> out;
    for (const auto& c : cp) out.push_back(exact::convert<BigInt>(c));
    return out;
  });

  Poly<BigInt> rest = rep.char_poly;
  Poly<BigInt> cyc{BigInt(1)};
  Poly<BigInt> radical{BigInt(1)};
  unsigned long long order = 1;
  for (unsigned n : exact::cyclotomic_indices(static_cast<unsigned>(z.rows()))) {
    const auto phi = exact::cyclotomic(n);
    bool found = false;
    while (auto q = exact::divide_exact_monic(rest, phi)) {
      rest = std::move(*q);
      cyc = exact::poly_mul(cyc, phi);
      rep.cyclotomic_indices.push_back(n);
      found = true;
    }
    if (found) {
      radical = exact::poly_mul(radical, phi);
      order = std::lcm(order, static_cast<unsigned long long>(n));
    }
  }
  rep.cyclotomic_part = cyc;

  if (rest.size() > 1) {
    rep.salem_factor = rest;
    rep.kind = IsometryKind::Loxodromic;
    rep.spectral_radius = largest_real_root(rest);
    if (!(rep.spectral_radius > 1.0 + tol))
      throw FormViolation("non-cyclotomic factor without a root outside the unit circle");
    rep.translation_length = std::log(rep.spectral_radius);
    rep.semisimple = false;
    return rep;
  }

  // All eigenvalues are roots of unity: semisimple iff the radical of the
  // characteristic polynomial annihilates the matrix.
  rep.semisimple = exact::with_overflow_fallback([&](auto tag) {
    using T = typename decltype(tag)::type;
    Poly<T> r;
    for (const auto& c : radical) r.push_back(exact::convert<T>(c));
    return exact::poly_eval(r, z.cast<T>()).is_zero_matrix();
  });
  if (rep.semisimple) {
    rep.kind = IsometryKind::Elliptic;
    rep.order = order;
  } else {
    rep.kind = IsometryKind::Parabolic;
  }
  return rep;
}

Mat boost_matrix(Eigen::Index dim, double r) {
  Mat a = Mat::Identity(dim, dim);
  if (dim < 2) return a;
  a(0, 0) = a(1, 1) = std::cosh(r);
  a(0, 1) = a(1, 0) = std::sinh(r);
  return a;
}

double operator_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

KAKFactors kak_decompose(const LatticeIsometry& g) {
  const Eigen::Index n = g.form().dim();
  const Mat s = orthonormalize(g.form());
  Mat j = Mat::Identity(n, n);
  for (Eigen::Index i = 1; i < n; ++i) j(i, i) = -1.0;
  // S^{-1} = J S^T G
  const Mat s_inv = j * s.transpose() * g.form().gram();
  KAKFactors out;
  out.standard = s_inv * g.matrix() * s;
  const Mat& a = out.standard;

  // Householder reflection of the spatial block sending e1 to x/|x|.
  const auto reflector = [n](const Vec& x) {
    Mat k = Mat::Identity(n, n);
    const double nx = x.norm();
    if (n < 2 || !(nx > 0.0)) return k;
    Vec v = Vec::Unit(n - 1, 0) - x / nx;
    const double vv = v.squaredNorm();
    if (vv > 1e-300) k.bottomRightCorner(n - 1, n - 1) -= 2.0 * v * v.transpose() / vv;
    return k;
  };
  const Vec w = a.col(0).tail(n - 1);
  out.r = std::asinh(w.norm());
  out.k1 = reflector(w);
  const Mat h2 = reflector(a.row(0).tail(n - 1).transpose());
  // k1 A h2 = boost(r) diag(1, 1, R) with R orthogonal. R is read off its
  // block directly; forming boost(-r) k1 A would cancel terms of size cosh(r)^2.
  out.k2 = h2;
  if (!(w.norm() > 0.0)) {
    // A fixes the base point and is itself a rotation.
    out.k2 = a;
  } else if (n > 2) {
    const Mat c = out.k1 * a * h2;
    const Eigen::JacobiSVD<Mat> svd(c.bottomRightCorner(n - 2, n - 2), Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat d = Mat::Identity(n, n);
    d.bottomRightCorner(n - 2, n - 2) = svd.matrixU() * svd.matrixV().transpose();
    out.k2 = d * h2;
  }
  return out;
}

nlohmann::json form_to_json(const IntersectionForm& form,
                            const std::map<std::string, exact::ZMatrix>& matrices) {
  nlohmann::json j;
  j["dim"] = form.dim();
  nlohmann::json gram = nlohmann::json::array();
  for (Eigen::Index r = 0; r < form.dim(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < form.dim(); ++c) {
      if (form.exact_gram())
        row.push_back((*form.exact_gram())(static_cast<std::size_t>(r), static_cast<std::size_t>(c))
                          .convert_to<long long>());
      else
        row.push_back(form.gram()(r, c));
    }
    gram.push_back(row);
  }
  j["gram"] = gram;
  nlohmann::json mats = nlohmann::json::object();
  for (const auto& [name, m] : matrices) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const auto& v = m(r, c);
        if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min())
          row.push_back(v.str());
        else
          row.push_back(v.convert_to<long long>());
      }
      rows.push_back(row);
    }
    mats[name] = rows;
  }
  j["matrices"] = mats;
  return j;
}

namespace {

exact::BigInt json_to_bigint(const nlohmann::json& v) {
  if (v.is_string()) return exact::BigInt(v.get<std::string>());
  if (v.is_number_integer()) return exact::BigInt(v.get<long long>());
  throw ConfigError("expected an integer entry");
}

}  // namespace

IntersectionForm form_from_json(const nlohmann::json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  const auto& gram = j.at("gram");
  if (gram.size() != dim) throw DimensionError("gram row count differs from dim");
  bool integral = true;
  for (const auto& row : gram) {
    if (row.size() != dim) throw DimensionError("gram column count differs from dim");
    for (const auto& v : row) integral = integral && (v.is_number_integer() || v.is_string());
  }
  if (integral) {
    exact::ZMatrix z(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) z(r, c) = json_to_bigint(gram[r][c]);
    return IntersectionForm::from_integer(z);
  }
  Mat g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = gram[r][c].get<double>();
  return IntersectionForm::from_real(g);
}

std::map<std::string, exact::ZMatrix> matrices_from_json(const nlohmann::json& j) {
  std::map<std::string, exact::ZMatrix> out;
  if (!j.contains("matrices")) return out;
  for (const auto& [name, rows] : j.at("matrices").items()) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows[0].size() : 0;
    exact::ZMatrix z(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) throw DimensionError("ragged matrix '" + name + "'");
      for (std::size_t k = 0; k < c; ++k) z(i, k) = json_to_bigint(rows[i][k]);
    }
    out.emplace(name, std::move(z));
  }
  return out;
}

nlohmann::json report_to_json(const IsometryReport& report) {
  auto poly = [](const exact::Poly<exact::BigInt>& p) {
    nlohmann::json a = nlohmann::json::array();
    for (auto it = p.rbegin(); it != p.rend(); ++it) a.push_back(it->str());
    return a;
  };
  nlohmann::json j;
  j["kind"] = to_string(report.kind);
  j["spectral_radius"] = report.spectral_radius;
  j["translation_length"] = report.translation_length;
  j["char_poly"] = poly(report.char_poly);
  j["salem_factor"] = poly(report.salem_factor);
  j["cyclotomic_part"] = poly(report.cyclotomic_part);
  j["cyclotomic_indices"] = report.cyclotomic_indices;
  j["semisimple"] = report.semisimple;
  j["order"] = report.order;
  return j;
}

}  // namespace k3dyn
