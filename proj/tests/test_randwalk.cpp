#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "k3dyn/randwalk.hpp"

using namespace k3dyn;

namespace {

std::shared_ptr<const SurfaceModel> pentagon_model(const pentagon::Lengths& l = {3, 5, 7, 11, 13}) {
  return std::make_shared<PentagonModel>(pentagon::SideLengths(l));
}

std::shared_ptr<const SurfaceModel> wehler_model() {
  return std::make_shared<WehlerModel>(wehler::WehlerSurface::sample());
}

State start(const SurfaceModel& m, std::uint64_t seed) {
  CounterRng rng(seed);
  return m.random_point(rng);
}

const double kLoxRate = std::log(9.0 + 4.0 * std::sqrt(5.0));

// Chains differentials exactly as the estimators do (first chart in the
// conditioning order that accepts), without any renormalization.
struct DirectProduct {
  Mat2 d = Mat2::Identity();
  bool ok = true;
};
DirectProduct direct_product(const GeneratorSystem& sys, State x, const Itinerary& it, std::size_t n) {
  const auto& m = sys.surface();
  DirectProduct out;
  int chart = m.best_chart(x);
  for (std::size_t k = 0; k < n && out.ok; ++k)
    for (int g : sys.words()[it[k]]) {
      State y = m.apply(g, x);
      if (m.residual(y) > 1e-13) y = m.project(y);
      std::optional<Mat2> dg;
      for (int c : m.chart_order(y)) {
        dg = m.differential(g, x, chart, c, 1e-6);
        if (dg) {
          chart = c;
          break;
        }
      }
      if (!dg) {
        out.ok = false;
        break;
      }
      out.d = *dg * out.d;
      x = y;
    }
  return out;
}

}  // namespace

TEST_CASE("batch means and fits") {
  BatchMeans bm(100, 10);
  for (int i = 0; i < 100; ++i) bm.add(i % 2 ? 1.0 : 3.0);
  CHECK(bm.mean() == doctest::Approx(2.0));
  CHECK(bm.batch_means().size() == 10);
  CHECK(bm.std_error() == doctest::Approx(0.0).epsilon(1e-12));
  const auto fit = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(linear_fit({1, 1}, {2, 3}), NumericError);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("generator systems") {
  const auto p = pentagon_model();
  CHECK_THROWS_AS(GeneratorSystem(p, {{0}, {1}}, {0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(GeneratorSystem(p, {{0}, {}}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(GeneratorSystem(p, {{0}, {7}}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(GeneratorSystem(p, {{0}, {1}}, {1.5, -0.5}), ConfigError);
  bool rescaled = false;
  const auto g = GeneratorSystem::normalized(p, {{0}, {1}, {2}}, {0.5, 0.5, 0.1}, &rescaled);
  CHECK(rescaled);
  CHECK(g.weights()[0] + g.weights()[1] + g.weights()[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.weights()[2] == doctest::Approx(0.1 / 1.1));
  CHECK_THROWS_AS((void)g.cohomology(), Unsupported);
  CHECK(GeneratorSystem::uniform(wehler_model()).has_cohomology());
  CHECK_THROWS_AS(coh_lyapunov(GeneratorSystem::uniform(p), 1, 1, 10), Unsupported);
}

TEST_CASE("itineraries are reproducible") {
  const std::vector<double> w{0.2, 0.3, 0.5};
  const Itinerary a(42, w), b(42, w), c(43, w);
  std::vector<std::size_t> counts(3, 0);
  bool differs = false;
  for (std::size_t k = 0; k < 10000; ++k) {
    CHECK(a[k] == b[k]);
    differs = differs || a[k] != c[k];
    ++counts[a[k]];
  }
  CHECK(differs);
  // Frequencies follow the weights (binomial sd below 0.005).
  CHECK(counts[0] / 1e4 == doctest::Approx(0.2).epsilon(0.1));
  CHECK(counts[2] / 1e4 == doctest::Approx(0.5).epsilon(0.05));
  const auto s = a.shifted(5);
  for (std::size_t k = 0; k < 100; ++k) CHECK(s[k] == a[k + 5]);
}

TEST_CASE("orbits and empirical measures") {
  const auto p = pentagon_model();
  const auto sys = GeneratorSystem::uniform(p);
  const State x0 = start(*p, 1);

  SUBCASE("n = 1 is the Dirac mass at the start") {
    const auto em = run_orbit(sys, x0, Itinerary(1, sys.weights()), 1);
    CHECK(em.n == 1);
    CHECK(em.total_mass() == doctest::Approx(1.0));
    CHECK(std::count_if(em.mass.begin(), em.mass.end(), [](double v) { return v > 0; }) == 1);
    REQUIRE(em.reservoir.size() == 1);
    CHECK(em.reservoir[0] == x0);
  }
  SUBCASE("a single involution visits at most two points") {
    const auto d = GeneratorSystem::dirac(p, {2});
    const auto em = run_orbit(d, x0, Itinerary(2, d.weights()), 1000);
    CHECK(std::count_if(em.mass.begin(), em.mass.end(), [](double v) { return v > 0; }) <= 2);
    std::set<long long> distinct;
    for (const auto& x : em.reservoir) distinct.insert(std::llround(x[1] * 1e8) * 1000003 + std::llround(x[2] * 1e8));
    CHECK(distinct.size() <= 2);
  }
  SUBCASE("uniform folds keep residuals small and the runs reproducible") {
    OrbitOptions opt;
    opt.tests = trig_test_functions(8);
    const auto a = run_orbit(sys, x0, Itinerary(3, sys.weights()), 100000, opt);
    const auto b = run_orbit(sys, x0, Itinerary(3, sys.weights()), 100000, opt);
    CHECK_FALSE(a.truncated);
    CHECK(a.worst_residual < 1e-8);
    CHECK(a.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.mass == b.mass);
    CHECK(a.test_mean == b.test_mean);
    for (double v : a.mass) CHECK(v >= 0.0);
  }
}

TEST_CASE("tangent exponents") {
  const auto p = pentagon_model();
  const State x0 = start(*p, 4);

  SUBCASE("QR exponents agree with the direct product") {
    const auto sys = GeneratorSystem::uniform(p);
    TangentOptions opt;
    opt.burn_in = 0.0;
    for (std::size_t n : {5u, 12u, 30u}) {
      const Itinerary it(stream_key(9, n), sys.weights());
      const auto est = tangent_lyapunov(sys, x0, it, n, opt);
      const auto dp = direct_product(sys, x0, it, n);
      REQUIRE(dp.ok);
      REQUIRE(est.gaps == 0);
      // The sum of QR exponents is log |det|; the first tracks the image of
      // e_1. Both are exact identities for a finite product.
      const double ldet = std::log(std::abs(dp.d.determinant())) / static_cast<double>(n);
      const double le1 = std::log(dp.d.col(0).norm()) / static_cast<double>(n);
      CHECK(est.lambda_plus + est.lambda_minus == doctest::Approx(ldet).epsilon(1e-8).scale(1.0));
      // lambda_plus >= lambda_minus after the ordering swap, so the e_1
      // growth is one of the two.
      Eigen::JacobiSVD<Mat2> svd(dp.d);
      const double ls1 = std::log(svd.singularValues()(0)) / static_cast<double>(n);
      CHECK(le1 <= ls1 + 1e-12);
      CHECK(est.lambda_plus >= est.lambda_minus);
      const bool first_is_plus = std::abs(est.lambda_plus - le1) < 1e-8;
      const bool first_is_minus = std::abs(est.lambda_minus - le1) < 1e-8;
      CHECK((first_is_plus || first_is_minus));
    }
  }
  SUBCASE("a single involution has zero exponents") {
    const auto d = GeneratorSystem::dirac(p, {1});
    const auto est = tangent_lyapunov(d, x0, Itinerary(5, d.weights()), 2000);
    CHECK(est.lambda_plus >= est.lambda_minus);
    CHECK(std::abs(est.lambda_plus) <= 3 * est.stderr_plus + 1e-9);
    CHECK(std::abs(est.lambda_minus) <= 3 * est.stderr_minus + 1e-9);
  }
  SUBCASE("identical seeds give identical estimates") {
    const auto sys = GeneratorSystem::uniform(p);
    const auto a = tangent_lyapunov(sys, x0, Itinerary(6, sys.weights()), 2000);
    const auto b = tangent_lyapunov(sys, x0, Itinerary(6, sys.weights()), 2000);
    CHECK(a.lambda_plus == b.lambda_plus);
    CHECK(a.batches_minus == b.batches_minus);
    CHECK(a.richardson < 1e-4);
  }
}

TEST_CASE("cohomological exponents") {
  const auto w = wehler_model();
  SUBCASE("one involution") {
    const auto d = GeneratorSystem::dirac(w, {0});
    const auto est = coh_lyapunov(d, 1, 2, 1000);
    CHECK(std::abs(est.lambda) < 1e-12);
  }
  SUBCASE("loxodromic word, both orders") {
    const auto d = GeneratorSystem::dirac(w, {2, 1, 0});
    for (auto order : {CompositionOrder::Pullback, CompositionOrder::Reversed}) {
      const auto est = coh_lyapunov(d, 1, 1, 1000, order);
      CHECK(est.lambda == doctest::Approx(kLoxRate).epsilon(1e-6));
      REQUIRE(est.spectrum.size() == 3);
      CHECK(est.spectrum[0] == doctest::Approx(kLoxRate).epsilon(1e-6));
      CHECK(est.spectrum[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
      CHECK(est.spectrum[2] == doctest::Approx(-kLoxRate).epsilon(1e-6));
    }
  }
}

TEST_CASE("limit classes") {
  const auto w = wehler_model();
  const auto form = wehler::coh_matrices().form;
  SUBCASE("deterministic word converges to the dominant eigendirection") {
    const auto d = GeneratorSystem::dirac(w, {2, 1, 0});
    const auto lc = limit_class(d, Itinerary(1, d.weights()), 30);
    // Oracle: dominant eigenvector of M_3 M_2 M_1 from the closed form.
    const Mat m = d.word_matrix(0);
    Eigen::EigenSolver<Mat> es(m);
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < 3; ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(top).real()) top = i;
    const Vec v = es.eigenvectors().col(top).real();
    CHECK(class_angle(form, lc.e, CohClass(v)) < 1e-9);
    CHECK(std::abs(lc.q) < 1e-9);
    CHECK(form.mass(lc.e) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lc.nef_ok);
    CHECK(equivariance_angle(d, Itinerary(1, d.weights()), 30) < 1e-9);
  }
  SUBCASE("class angle is the visual angle at the base point") {
    const CohClass a{1, 0, 0}, b{0, 1, 0}, c{0, 0, 1};
    const double ab = class_angle(form, a, b), bc = class_angle(form, b, c);
    CHECK(ab == doctest::Approx(2 * std::numbers::pi / 3));
    CHECK(bc == doctest::Approx(ab));
    CHECK(class_angle(form, a, CohClass{2, 0, 0}) == doctest::Approx(0.0));
  }
}

TEST_CASE("Furstenberg estimator") {
  const auto w = wehler_model();
  SUBCASE("degenerate sample is the exact finite sum") {
    const auto sys = GeneratorSystem::uniform(w);
    const auto fe = furstenberg_estimate(sys, 1, 1, 0);
    // sigma_k^* (1,1,1) has mass 20/12 against (1,1,1)/sqrt(12) for every k.
    CHECK(fe.lambda == doctest::Approx(std::log(5.0 / 3.0)).epsilon(1e-14));
    CHECK(fe.insufficient);
  }
  SUBCASE("deterministic loxodromic word") {
    const auto d = GeneratorSystem::dirac(w, {2, 1, 0});
    const auto fe = furstenberg_estimate(d, 1, 20, 40);
    CHECK(fe.lambda == doctest::Approx(kLoxRate).epsilon(1e-4));
    CHECK(fe.sample.max_abs_q < 1e-9);
    CHECK(fe.sample.min_pairwise_angle < 1e-9);
  }
}

TEST_CASE("stable directions") {
  const auto p = pentagon_model();
  const State x = start(*p, 12);
  SUBCASE("deterministic control") {
    const auto d = GeneratorSystem::dirac(p, {0, 1, 2});
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(stream_key(5, s));
    const auto sd = stable_direction_dependence(d, x, seeds, 200);
    CHECK(sd.excluded.empty());
    REQUIRE(sd.pair_angles.size() == 10);
    for (double a : sd.pair_angles) CHECK(a < 1e-6);
  }
  SUBCASE("n = 1 gives the right singular vector of one differential") {
    const auto sys = GeneratorSystem::uniform(p);
    const std::vector<std::uint64_t> seeds{77};
    const auto sd = stable_direction_dependence(sys, x, seeds, 1);
    REQUIRE(sd.directions[0].has_value());
    const Itinerary it(77, sys.weights());
    const auto dp = direct_product(sys, x, it, 1);
    Eigen::JacobiSVD<Mat2> svd(dp.d, Eigen::ComputeFullV);
    const Eigen::Vector2d v = svd.matrixV().col(1);
    const auto& u = *sd.directions[0];
    CHECK(std::abs(std::abs(u[0] * v(0) + u[1] * v(1)) - 1.0) < 1e-9);
  }
}

TEST_CASE("twist growth") {
  const auto p = pentagon_model();
  const State x = start(*p, 13);
  SUBCASE("identity word") {
    const auto g = twist_growth(*p, {1, 1}, x, 50);
    CHECK_FALSE(g.truncated);
    for (double v : g.norms) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("three consecutive folds grow exponentially") {
    const auto g = twist_growth(*p, {0, 1, 2}, x, 200);
    if (!g.truncated) CHECK(g.semilog.slope > 0.0);
  }
}

TEST_CASE("equidistribution verdicts") {
  SUBCASE("n = 1 is rejected") {
    const auto p = pentagon_model();
    const auto sys = GeneratorSystem::uniform(p);
    const auto rep = equidistribution_test(sys, start(*p, 2), Itinerary(2, sys.weights()), 1, 20000, 3);
    CHECK_FALSE(rep.consistent);
  }
  SUBCASE("equal lengths are rejected") {
    // Equal lengths are smooth (odd total) and generate a finite group.
    const auto q = pentagon_model({1, 1, 1, 1, 1});
    const auto sys = GeneratorSystem::uniform(q);
    const auto rep = equidistribution_test(sys, start(*q, 4), Itinerary(4, sys.weights()), 100000, 50000, 5);
    CHECK_FALSE(rep.consistent);
  }
  SUBCASE("volume sampler rejects degenerate weights") {
    CHECK_THROWS_AS(vol_averages(*pentagon_model(), trig_test_functions(2), 0, 1), SamplerError);
  }
}
