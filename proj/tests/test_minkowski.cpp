#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "k3dyn/minkowski.hpp"
#include "k3dyn/wehler.hpp"

using namespace k3dyn;
using exact::BigInt;
using exact::ZMatrix;

namespace {

exact::Poly<BigInt> P(std::initializer_list<long long> c) {
  exact::Poly<BigInt> p;
  for (long long v : c) p.emplace_back(v);
  return p;
}

// Matrices written out by hand, independent of coh_matrices().
ZMatrix s1() { return exact::to_zmatrix({{-1, 0, 0}, {2, 1, 0}, {2, 0, 1}}); }
ZMatrix s2() { return exact::to_zmatrix({{1, 2, 0}, {0, -1, 0}, {0, 2, 1}}); }
ZMatrix s3() { return exact::to_zmatrix({{1, 0, 2}, {0, 1, 2}, {0, 0, -1}}); }

IntersectionForm form() { return IntersectionForm::wehler(); }

ZMatrix random_word(std::mt19937_64& rng, int max_len) {
  const ZMatrix gens[3] = {s1(), s2(), s3()};
  ZMatrix m = ZMatrix::identity(3);
  const int len = std::uniform_int_distribution<int>(0, max_len)(rng);
  for (int i = 0; i < len; ++i) m = m * gens[std::uniform_int_distribution<int>(0, 2)(rng)];
  return m;
}

}  // namespace

TEST_CASE("Wehler pairing values") {
  const auto f = form();
  const CohClass c1{1, 0, 0}, c2{0, 1, 0}, all{1, 1, 1};
  CHECK(f.pair(c1, c2) == 2.0);
  CHECK(f.pair(c1, c1) == 0.0);
  CHECK(f.pair(all, all) == 12.0);
  CHECK_THROWS_AS((void)f.pair(c1, CohClass{1, 0}), DimensionError);
}

TEST_CASE("masses against the reference class") {
  const auto f = form();
  CHECK(f.mass(f.reference()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.mass(CohClass{1, 0, 0}) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(f.mass(CohClass{1, 1, 1}) == doctest::Approx(std::sqrt(12.0)).epsilon(1e-14));
  CHECK_THROWS_AS((void)IntersectionForm::from_integer(exact::to_zmatrix({{1, 0}, {0, -1}})).mass(CohClass{1, 0}),
                  ConfigError);
}

TEST_CASE("hyperbolic distances") {
  const auto f = form();
  const CohClass e0(f.base_point());
  CHECK(hyperbolic_distance(f, e0, e0) == doctest::Approx(0.0));
  const CohClass u{0.5, 0.5, 0.0};
  CHECK(hyperbolic_distance(f, u, e0) == doctest::Approx(std::acosh(2.0 / std::sqrt(3.0))).epsilon(1e-12));

  // N = (s1 s2 s3)^* = s3^* s2^* s1^* sends (1,1,1) to (23,15,-9).
  const Mat n = to_real(s3() * s2() * s1());
  const Vec img = n * Vec::Ones(3);
  CHECK(img(0) == 23.0);
  CHECK(img(1) == 15.0);
  CHECK(img(2) == -9.0);
  CHECK(hyperbolic_distance(f, e0, CohClass(n * e0.coords)) ==
        doctest::Approx(std::acosh(29.0 / 3.0)).epsilon(1e-12));

  CHECK_THROWS_AS(hyperbolic_distance(f, CohClass{1, 0, 0}, e0), NotOnHyperboloid);
}

TEST_CASE("reverse Schwarz inequality on the positive cone") {
  const auto f = form();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const CohClass a{d(rng), d(rng), d(rng)}, b{d(rng), d(rng), d(rng)};
    // Nonnegative combinations of c1, c2, c3 have q >= 0.
    CHECK(f.pair(a, b) >= std::sqrt(f.q(a) * f.q(b)) - 1e-9 * 12.0);
  }
}

TEST_CASE("orthonormalize") {
  SUBCASE("diagonal form gives the identity") {
    const auto f = IntersectionForm::from_integer(exact::to_zmatrix({{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}));
    CHECK((orthonormalize(f) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("hyperbolic plane") {
    const auto f = IntersectionForm::from_integer(exact::to_zmatrix({{0, 1}, {1, 0}}));
    const Mat s = orthonormalize(f);
    Mat j(2, 2);
    j << 1, 0, 0, -1;
    CHECK((s.transpose() * f.gram() * s - j).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(s(1, 0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(std::abs(s(0, 1)) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(s(0, 1) == doctest::Approx(-s(1, 1)));
  }
  SUBCASE("Wehler form") {
    const auto f = form();
    const Mat s = orthonormalize(f);
    const Mat j = Eigen::Vector3d(1, -1, -1).asDiagonal();
    CHECK((s.transpose() * f.gram() * s - j).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("wrong signature") {
    CHECK_THROWS_AS(IntersectionForm::from_real(Mat::Identity(3, 3)), SignatureError);
  }
}

TEST_CASE("isometry checks") {
  const auto f = form();
  CHECK_NOTHROW(LatticeIsometry(s1(), f));
  CHECK_THROWS_AS(LatticeIsometry(exact::to_zmatrix({{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}), f), FormViolation);
  // -I preserves the form but swaps the sheets.
  CHECK_THROWS_AS(LatticeIsometry(exact::to_zmatrix({{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}}), f), FormViolation);
}

TEST_CASE("classification of Wehler words") {
  const auto f = form();
  SUBCASE("single involution is elliptic of order 2") {
    const auto r = classify_isometry(LatticeIsometry(s1(), f));
    CHECK(r.kind == IsometryKind::Elliptic);
    CHECK(r.order == 2);
    CHECK(r.semisimple);
    CHECK(r.salem_factor.empty());
  }
  SUBCASE("product of two involutions is parabolic with a Jordan block") {
    const auto r = classify_isometry(LatticeIsometry(s2() * s1(), f));
    CHECK(r.kind == IsometryKind::Parabolic);
    CHECK(r.char_poly == P({-1, 3, -3, 1}));
    CHECK_FALSE(r.semisimple);
    CHECK(r.spectral_radius == 1.0);
  }
  SUBCASE("product of three involutions is loxodromic") {
    const auto r = classify_isometry(LatticeIsometry(s3() * s2() * s1(), f));
    CHECK(r.kind == IsometryKind::Loxodromic);
    CHECK(r.char_poly == P({1, -17, -17, 1}));
    CHECK(r.salem_factor == P({1, -18, 1}));
    CHECK(r.cyclotomic_part == P({1, 1}));
    CHECK(exact::poly_mul(r.salem_factor, r.cyclotomic_part) == r.char_poly);
    CHECK(r.spectral_radius == doctest::Approx(9.0 + 4.0 * std::sqrt(5.0)).epsilon(1e-14));
    CHECK(r.translation_length == doctest::Approx(std::log(9.0 + 4.0 * std::sqrt(5.0))).epsilon(1e-14));
  }
  SUBCASE("floating input follows the same kinds") {
    CHECK(classify_isometry(LatticeIsometry(to_real(s1()), f)).kind == IsometryKind::Elliptic);
    CHECK(classify_isometry(LatticeIsometry(to_real(s2() * s1()), f)).kind == IsometryKind::Parabolic);
    CHECK(classify_isometry(LatticeIsometry(to_real(s3() * s2() * s1()), f)).kind == IsometryKind::Loxodromic);
  }
}

TEST_CASE("classification is conjugation invariant") {
  const auto f = form();
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const ZMatrix g = random_word(rng, 8);
    // p is a word in involutions, so its inverse is the reversed word.
    const ZMatrix gens[3] = {s1(), s2(), s3()};
    std::vector<int> letters(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 6)(rng)));
    for (auto& l : letters) l = std::uniform_int_distribution<int>(0, 2)(rng);
    ZMatrix p = ZMatrix::identity(3), p_inv = ZMatrix::identity(3);
    for (int l : letters) p = p * gens[l];
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) p_inv = p_inv * gens[*it];
    REQUIRE(p * p_inv == ZMatrix::identity(3));
    const auto a = classify_isometry(LatticeIsometry(g, f));
    const auto b = classify_isometry(LatticeIsometry(p * g * p_inv, f));
    CHECK(a.kind == b.kind);
    CHECK(a.char_poly == b.char_poly);
  }
}

TEST_CASE("norm growth matches the kind") {
  const auto f = form();
  const Mat ell = to_real(s1()), par = to_real(s2() * s1()), lox = to_real(s3() * s2() * s1());
  Mat pe = Mat::Identity(3, 3), pp = pe, pl = pe;
  double ne = 0.0, np30 = 0.0, np60 = 0.0, nl30 = 0.0, nl60 = 0.0;
  for (int n = 1; n <= 60; ++n) {
    pe = pe * ell;
    pp = pp * par;
    pl = pl * lox;
    ne = std::max(ne, operator_norm(pe));
    if (n == 30) np30 = operator_norm(pp), nl30 = operator_norm(pl);
  }
  np60 = operator_norm(pp);
  nl60 = operator_norm(pl);
  CHECK(ne < 10.0);
  // Quadratic growth: doubling n multiplies the norm by about 4.
  CHECK(np60 / np30 == doctest::Approx(4.0).epsilon(0.1));
  const double rate = (std::log(nl60) - std::log(nl30)) / 30.0;
  CHECK(rate == doctest::Approx(std::log(9.0 + 4.0 * std::sqrt(5.0))).epsilon(0.02));
}

TEST_CASE("KAK decomposition") {
  const auto f = form();
  const Mat s = orthonormalize(f);
  const Mat s_inv = s.inverse();
  SUBCASE("identity") {
    const auto k = kak_decompose(LatticeIsometry(ZMatrix::identity(3), f));
    CHECK(k.r == doctest::Approx(0.0));
    CHECK((k.k1 * boost_matrix(3, k.r) * k.k2 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("explicit boost") {
    const Mat g = s * boost_matrix(3, 1.0) * s_inv;
    const auto k = kak_decompose(LatticeIsometry(g, f));
    CHECK(k.r == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("loxodromic word") {
    const auto k = kak_decompose(LatticeIsometry(s3() * s2() * s1(), f));
    CHECK(k.r == doctest::Approx(std::acosh(29.0 / 3.0)).epsilon(1e-12));
    const Mat re = k.k1 * boost_matrix(3, k.r) * k.k2;
    CHECK((re - k.standard).cwiseAbs().maxCoeff() < 1e-10 * k.standard.cwiseAbs().maxCoeff());
    // k1 and k2 fix the base vector.
    CHECK((k.k1.col(0) - Vec::Unit(3, 0)).norm() < 1e-12);
    CHECK((k.k2.col(0) - Vec::Unit(3, 0)).norm() < 1e-10);
  }
  SUBCASE("translation length is bounded by the displacement") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
      const ZMatrix w = random_word(rng, 12);
      const LatticeIsometry g(w, f);
      const auto r = classify_isometry(g);
      if (r.kind != IsometryKind::Loxodromic) continue;
      CHECK(r.translation_length <= kak_decompose(g).r + 1e-9);
    }
  }
  SUBCASE("long words recompose and the factors stay orthogonal") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
      const auto k = kak_decompose(LatticeIsometry(random_word(rng, 30), f));
      const Mat re = k.k1 * boost_matrix(3, k.r) * k.k2;
      CHECK((re - k.standard).cwiseAbs().maxCoeff() < 1e-12 * k.standard.cwiseAbs().maxCoeff());
      CHECK((k.k2.transpose() * k.k2 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((k.k2.col(0) - Vec::Unit(3, 0)).norm() < 1e-12);
    }
  }
}

TEST_CASE("JSON round trip of a form and its matrices") {
  const auto coh = wehler::coh_matrices();
  const auto j = form_to_json(coh.form, {{"s1", coh.sigma_star[0]}});
  const auto f = form_from_json(j);
  CHECK(f.gram() == coh.form.gram());
  const auto ms = matrices_from_json(j);
  REQUIRE(ms.count("s1") == 1);
  CHECK(ms.at("s1") == s1());
  CHECK_THROWS_AS(form_from_json(nlohmann::json{{"dim", 2}, {"gram", {{1, 2}, {3, 4}}}}), Error);
}

TEST_CASE("report JSON lists polynomials highest degree first") {
  const auto r = classify_isometry(LatticeIsometry(s3() * s2() * s1(), form()));
  const auto j = report_to_json(r);
  CHECK(j.at("kind") == "loxodromic");
  CHECK(j.at("salem_factor") == nlohmann::json::array({"1", "-18", "1"}));
}
