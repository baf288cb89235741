#pragma once

// Minkowski lattices of signature (1, m): the intersection pairing on a
// Neron-Severi lattice, the hyperboloid model of hyperbolic space it carries,
// and the classification of its isometries.

#include <Eigen/Dense>
#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "k3dyn/exact.hpp"

namespace k3dyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kDefaultTol = 1e-9;

// A cohomology class given by its coordinates in the lattice basis.
struct CohClass {
  Vec coords;

  CohClass() = default;
  explicit CohClass(Vec c) : coords(std::move(c)) {}
  CohClass(std::initializer_list<double> c) : coords(Eigen::Map<const Vec>(c.begin(), c.size())) {}
  [[nodiscard]] Eigen::Index dim() const { return coords.size(); }
};

class IntersectionForm {
 public:
  // Integer Gram matrix; the exact copy is kept for isometry checks.
  static IntersectionForm from_integer(const exact::ZMatrix& gram);
  // Real (e.g. rational) Gram matrix.
  static IntersectionForm from_real(const Mat& gram);
  // The Wehler form [[0,2,2],[2,0,2],[2,2,0]] with reference class
  // (c1+c2+c3)/sqrt(12).
  static IntersectionForm wehler();

  [[nodiscard]] Eigen::Index dim() const { return gram_.rows(); }
  [[nodiscard]] const Mat& gram() const { return gram_; }
  [[nodiscard]] const std::optional<exact::ZMatrix>& exact_gram() const { return exact_gram_; }

  // Base point of the hyperboloid model; fixes the positive sheet.
  [[nodiscard]] const Vec& base_point() const { return e0_; }

  // Reference class [kappa0] for masses; must satisfy q = 1.
  [[nodiscard]] IntersectionForm with_reference(const CohClass& kappa0, double tol = kDefaultTol) const;
  [[nodiscard]] bool has_reference() const { return kappa0_.has_value(); }
  [[nodiscard]] const CohClass& reference() const;

  [[nodiscard]] double pair(const CohClass& a, const CohClass& b) const;
  [[nodiscard]] double q(const CohClass& a) const { return pair(a, a); }
  [[nodiscard]] double mass(const CohClass& a) const;

  [[nodiscard]] bool on_hyperboloid(const CohClass& a, double tol = kDefaultTol) const;

 private:
  explicit IntersectionForm(Mat gram);

  Mat gram_;
  std::optional<exact::ZMatrix> exact_gram_;
  Vec e0_;
  std::optional<CohClass> kappa0_;
};

Mat to_real(const exact::ZMatrix& m);

double hyperbolic_distance(const IntersectionForm& form, const CohClass& u, const CohClass& v,
                           double tol = kDefaultTol);

// Columns of S form a basis in which the form is diag(1,-1,...,-1); the
// first column is the form's base point.
Mat orthonormalize(const IntersectionForm& form);

class LatticeIsometry {
 public:
  // Exact input: M^T G M = G must hold as an integer identity.
  LatticeIsometry(const exact::ZMatrix& matrix, const IntersectionForm& form);
  // Floating input: checked to tol relative.
  LatticeIsometry(const Mat& matrix, const IntersectionForm& form, double tol = kDefaultTol);

  [[nodiscard]] const Mat& matrix() const { return matrix_; }
  [[nodiscard]] const std::optional<exact::ZMatrix>& exact() const { return exact_; }
  [[nodiscard]] const IntersectionForm& form() const { return form_; }

 private:
  void check_positive_sheet() const;

  Mat matrix_;
  std::optional<exact::ZMatrix> exact_;
  IntersectionForm form_;
};

enum class IsometryKind { Elliptic, Parabolic, Loxodromic };
std::string to_string(IsometryKind kind);

struct IsometryReport {
  IsometryKind kind = IsometryKind::Elliptic;
  double spectral_radius = 1.0;
  double translation_length = 0.0;
  // Ascending coefficients; empty for floating input.
  exact::Poly<exact::BigInt> char_poly;
  exact::Poly<exact::BigInt> salem_factor;  // empty unless loxodromic
  exact::Poly<exact::BigInt> cyclotomic_part;
  std::vector<unsigned> cyclotomic_indices;  // n for each Phi_n factor, with repetition
  bool semisimple = true;
  unsigned long long order = 0;  // finite order of an elliptic integral isometry, else 0
};

IsometryReport classify_isometry(const LatticeIsometry& g, double tol = kDefaultTol);

struct KAKFactors {
  Mat k1, k2;  // fix the base vector in standard coordinates
  double r = 0.0;
  Mat standard;  // the isometry in standard coordinates
};

Mat boost_matrix(Eigen::Index dim, double r);
KAKFactors kak_decompose(const LatticeIsometry& g);
// Euclidean operator norm (largest singular value).
double operator_norm(const Mat& m);

// JSON: {"dim": n, "gram": [[...]], "matrices": {name: [[...]]}}.
nlohmann::json form_to_json(const IntersectionForm& form,
                            const std::map<std::string, exact::ZMatrix>& matrices = {});
IntersectionForm form_from_json(const nlohmann::json& j);
std::map<std::string, exact::ZMatrix> matrices_from_json(const nlohmann::json& j);
// Polynomials are serialized highest degree first, as decimal strings.
nlohmann::json report_to_json(const IsometryReport& report);

}  // namespace k3dyn
