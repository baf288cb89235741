#include "k3dyn/randwalk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "k3dyn/error.hpp"
#include "k3dyn/rng.hpp"
#include "k3dyn/wehler.hpp"

namespace k3dyn {

using std::numbers::pi;

// ---------------------------------------------------------------- generators

GeneratorSystem::GeneratorSystem(std::shared_ptr<const SurfaceModel> surface,
                                 std::vector<std::vector<int>> words, std::vector<double> weights)
    : surface_(std::move(surface)), words_(std::move(words)), weights_(std::move(weights)) {
  if (!surface_) throw ConfigError("generator system without a surface");
  if (words_.empty()) throw ConfigError("at least one generator word is required");
  if (words_.size() != weights_.size())
    throw ConfigError("got " + std::to_string(words_.size()) + " words but " +
                      std::to_string(weights_.size()) + " weights");
  for (const auto& w : words_) {
    if (w.empty()) throw ConfigError("generator words must be nonempty");
    for (int k : w)
      if (k < 0 || k >= surface_->num_generators())
        throw ConfigError("generator index " + std::to_string(k) + " out of range for a " +
                          surface_->kind() + " surface");
  }
  double s = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weights must be positive");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
  if (dynamic_cast<const WehlerModel*>(surface_.get())) {
    const auto coh = wehler::coh_matrices();
    CohomologyData data{coh.form, {}};
    for (const auto& m : coh.sigma_star) data.base.push_back(to_real(m));
    set_cohomology(std::move(data));
  }
}

GeneratorSystem GeneratorSystem::normalized(std::shared_ptr<const SurfaceModel> surface,
                                            std::vector<std::vector<int>> words,
                                            std::vector<double> weights, bool* rescaled) {
  double s = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("weights must be positive");
    s += w;
  }
  const bool change = std::abs(s - 1.0) > 1e-12;
  if (rescaled) *rescaled = change;
  if (change) {
    for (double& w : weights) w /= s;
    // Absorb the rounding left by the division into the largest weight.
    double t = 0.0;
    for (double w : weights) t += w;
    if (!weights.empty()) *std::max_element(weights.begin(), weights.end()) += 1.0 - t;
  }
  return {std::move(surface), std::move(words), std::move(weights)};
}

GeneratorSystem GeneratorSystem::uniform(std::shared_ptr<const SurfaceModel> surface) {
  const int k = surface->num_generators();
  std::vector<std::vector<int>> words;
  for (int i = 0; i < k; ++i) words.push_back({i});
  return normalized(std::move(surface), std::move(words), std::vector<double>(static_cast<std::size_t>(k), 1.0));
}

GeneratorSystem GeneratorSystem::dirac(std::shared_ptr<const SurfaceModel> surface, std::vector<int> word) {
  return {std::move(surface), {std::move(word)}, {1.0}};
}

State GeneratorSystem::apply(std::size_t g, const State& x) const {
  State y = x;
  for (int k : words_.at(g)) y = surface_->apply(k, y);
  return y;
}

void GeneratorSystem::set_cohomology(CohomologyData data) {
  if (!data.form.has_reference()) throw ConfigError("cohomology form needs a reference class");
  const int k = surface_->num_generators();
  if (static_cast<int>(data.base.size()) != k)
    throw ConfigError("cohomology needs one matrix per base involution");
  const auto d = data.form.dim();
  for (const auto& m : data.base)
    if (m.rows() != d || m.cols() != d) throw DimensionError("cohomology matrix has the wrong size");
  word_mats_.clear();
  for (const auto& w : words_) {
    Mat p = Mat::Identity(d, d);
    for (int i : w) p = p * data.base[static_cast<std::size_t>(i)];
    word_mats_.push_back(p);
  }
  coh_ = std::move(data);
}

const CohomologyData& GeneratorSystem::cohomology() const {
  if (!coh_) throw Unsupported("no cohomology data for a " + surface_->kind() + " surface");
  return *coh_;
}

const Mat& GeneratorSystem::word_matrix(std::size_t g) const {
  (void)cohomology();
  return word_mats_.at(g);
}

Itinerary::Itinerary(std::uint64_t key, const std::vector<double>& weights, std::size_t offset)
    : key_(key), weights_(weights), offset_(offset) {
  double s = 0.0;
  for (double w : weights_) cumulative_.push_back(s += w);
  if (cumulative_.empty()) throw ConfigError("itinerary without generators");
}

std::size_t Itinerary::operator[](std::size_t k) const {
  const double u = to_unit(counter_output(key_, offset_ + k)) * cumulative_.back();
  const auto i = static_cast<std::size_t>(
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  return std::min(i, cumulative_.size() - 1);
}

std::vector<TestFunction> trig_test_functions(int k) {
  std::vector<TestFunction> all{
      {"cos(t1)", [](const Coords& c) { return std::cos(c[0]); }},
      {"sin(t1)", [](const Coords& c) { return std::sin(c[0]); }},
      {"cos(t2)", [](const Coords& c) { return std::cos(c[1]); }},
      {"sin(t2)", [](const Coords& c) { return std::sin(c[1]); }},
      {"cos(t1+t2)", [](const Coords& c) { return std::cos(c[0] + c[1]); }},
      {"sin(t1+t2)", [](const Coords& c) { return std::sin(c[0] + c[1]); }},
      {"cos(t1-t2)", [](const Coords& c) { return std::cos(c[0] - c[1]); }},
      {"sin(t1-t2)", [](const Coords& c) { return std::sin(c[0] - c[1]); }},
  };
  if (k < 0 || k > static_cast<int>(all.size())) throw ConfigError("at most 8 test functions");
  all.resize(static_cast<std::size_t>(k));
  return all;
}

// ---------------------------------------------------------------- orbits

double EmpiricalMeasure::total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

namespace {

std::size_t angle_bin(double t, std::size_t bins) {
  const double u = (t + pi) / (2.0 * pi);
  auto i = static_cast<long long>(std::floor(u * static_cast<double>(bins)));
  const auto b = static_cast<long long>(bins);
  i %= b;
  if (i < 0) i += b;
  return static_cast<std::size_t>(i);
}

State settle(const SurfaceModel& m, const State& x) {
  return m.residual(x) > 1e-13 ? m.project(x) : x;
}

}  // namespace

EmpiricalMeasure run_orbit(const GeneratorSystem& sys, const State& x0, const Itinerary& it,
                           std::size_t n, const OrbitOptions& opt) {
  const auto& m = sys.surface();
  EmpiricalMeasure em;
  em.bins = std::max<std::size_t>(opt.bins, 1);
  em.mass.assign(2 * em.bins * em.bins, 0.0);
  std::vector<BatchMeans> tests(opt.tests.size(), BatchMeans(n));
  for (const auto& t : opt.tests) em.test_names.push_back(t.name);
  const std::size_t stride =
      opt.reservoir == 0 ? 0 : std::max<std::size_t>(1, (n + opt.reservoir - 1) / opt.reservoir);
  State x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      try {
        x = settle(m, sys.apply(it[k - 1], x));
      } catch (const Error& e) {
        em.truncated = true;
        em.error = e.what();
        break;
      }
    }
    em.worst_residual = std::max(em.worst_residual, m.residual(x));
    const Coords c = m.plot_coords(x);
    const auto b = static_cast<std::size_t>(m.branch(x));
    em.mass[(b * em.bins + angle_bin(c[0], em.bins)) * em.bins + angle_bin(c[1], em.bins)] += 1.0;
    for (std::size_t t = 0; t < tests.size(); ++t) tests[t].add(opt.tests[t].f(c));
    if (stride && k % stride == 0) em.reservoir.push_back(x);
    ++em.n;
  }
  if (em.n > 0)
    for (double& v : em.mass) v /= static_cast<double>(em.n);
  for (const auto& t : tests) {
    em.test_mean.push_back(t.mean());
    em.test_stderr.push_back(t.std_error());
  }
  return em;
}

// ---------------------------------------------------------------- tangent cocycle

namespace {

struct WordStep {
  State y;
  std::optional<Mat2> d;
  int chart_out = 0;
  double richardson = 0.0;
};

// Applies a word from x, chaining the differentials from chart_in at x to
// the best chart at the end point. Throws when a fold is undefined.
WordStep word_step(const SurfaceModel& m, const std::vector<int>& word, const State& x, int chart_in,
                   double h, bool richardson) {
  WordStep s;
  State cur = x;
  int cin = chart_in;
  Mat2 d = Mat2::Identity();
  bool ok = true;
  for (int g : word) {
    const State y = settle(m, m.apply(g, cur));
    std::optional<Mat2> dg;
    int cout = cin;
    for (int c : m.chart_order(y)) {
      dg = m.differential(g, cur, cin, c, h);
      if (dg) {
        cout = c;
        break;
      }
    }
    if (!dg) {
      ok = false;
      cin = m.best_chart(y);
    } else {
      if (richardson) {
        const auto d2 = m.differential(g, cur, cin, cout, 2.0 * h);
        if (d2) s.richardson = std::max(s.richardson, (*dg - *d2).norm() / dg->norm());
      }
      d = *dg * d;
      cin = cout;
    }
    cur = y;
  }
  s.y = cur;
  s.chart_out = cin;
  if (ok) s.d = d;
  return s;
}

// m = q [[r11, r12], [0, r22]] with r11, r22 > 0.
struct QrStep {
  Mat2 q;
  double r11, r12, r22;
};

QrStep qr2(const Mat2& m) {
  QrStep s{};
  const Eigen::Vector2d c0 = m.col(0);
  s.r11 = c0.norm();
  const Eigen::Vector2d q1 = c0 / s.r11;
  const Eigen::Vector2d q2(-q1.y(), q1.x());
  s.r12 = q1.dot(m.col(1));
  const double r22 = q2.dot(m.col(1));
  s.q.col(0) = q1;
  s.q.col(1) = r22 >= 0.0 ? q2 : Eigen::Vector2d(-q2);
  s.r22 = std::abs(m.determinant()) / s.r11;
  return s;
}

std::size_t burn_in_steps(std::size_t n, double fraction) {
  return n >= 10 ? static_cast<std::size_t>(static_cast<double>(n) * fraction) : 0;
}

}  // namespace

double LyapunovEstimate::combined_stderr() const { return std::hypot(stderr_plus, stderr_minus); }

LyapunovEstimate tangent_lyapunov(const GeneratorSystem& sys, const State& x0, const Itinerary& it,
                                  std::size_t n, const TangentOptions& opt) {
  const auto& m = sys.surface();
  const std::size_t b = burn_in_steps(n, opt.burn_in);
  BatchMeans plus(n - b, opt.batches), minus(n - b, opt.batches), sum(n - b, opt.batches);
  LyapunovEstimate est;
  est.n = n;
  State x = x0;
  int chart = m.best_chart(x);
  Mat2 q = Mat2::Identity();
  for (std::size_t k = 0; k < n; ++k) {
    WordStep st;
    try {
      st = word_step(m, sys.words()[it[k]], x, chart, opt.h, opt.richardson);
    } catch (const Error&) {
      est.truncated = true;
      break;
    }
    x = st.y;
    chart = st.chart_out;
    est.worst_residual = std::max(est.worst_residual, m.residual(x));
    if (!st.d) {
      ++est.gaps;
      continue;
    }
    est.richardson = std::max(est.richardson, st.richardson);
    const auto r = qr2(*st.d * q);
    q = r.q;
    if (k >= b) {
      const double lp = std::log(r.r11), lm = std::log(r.r22);
      plus.add(lp);
      minus.add(lm);
      sum.add(lp + lm);
    }
  }
  est.lambda_plus = plus.mean();
  est.lambda_minus = minus.mean();
  est.sum = sum.mean();
  est.stderr_plus = plus.std_error();
  est.stderr_minus = minus.std_error();
  est.stderr_sum = sum.std_error();
  est.batches_plus = plus.batch_means();
  est.batches_minus = minus.batch_means();
  est.batches_sum = sum.batch_means();
  if (est.lambda_plus < est.lambda_minus) {
    std::swap(est.lambda_plus, est.lambda_minus);
    std::swap(est.stderr_plus, est.stderr_minus);
    std::swap(est.batches_plus, est.batches_minus);
  }
  return est;
}

LyapunovEstimate pool(const std::vector<LyapunovEstimate>& trials) {
  LyapunovEstimate out;
  if (trials.empty()) return out;
  out.trials = trials.size();
  out.n = trials.front().n;
  for (const auto& t : trials) {
    out.batches_plus.insert(out.batches_plus.end(), t.batches_plus.begin(), t.batches_plus.end());
    out.batches_minus.insert(out.batches_minus.end(), t.batches_minus.begin(), t.batches_minus.end());
    out.batches_sum.insert(out.batches_sum.end(), t.batches_sum.begin(), t.batches_sum.end());
    out.gaps += t.gaps;
    out.richardson = std::max(out.richardson, t.richardson);
    out.worst_residual = std::max(out.worst_residual, t.worst_residual);
    out.truncated = out.truncated || t.truncated;
  }
  const auto p = summarize(out.batches_plus), mi = summarize(out.batches_minus),
             s = summarize(out.batches_sum);
  out.lambda_plus = p.mean;
  out.stderr_plus = p.std_error;
  out.lambda_minus = mi.mean;
  out.stderr_minus = mi.std_error;
  out.sum = s.mean;
  out.stderr_sum = s.std_error;
  return out;
}

// ---------------------------------------------------------------- cohomology

namespace {

// Product of word matrices kept as (unit-scale matrix, log scale).
struct ScaledProduct {
  Mat p;
  double log_scale = 0.0;

  void renormalize() {
    const double s = p.cwiseAbs().maxCoeff();
    p /= s;
    log_scale += std::log(s);
  }
};

double log_mass(const IntersectionForm& form, const Vec& v, double log_scale) {
  const double mass = form.mass(CohClass(v));
  if (!(mass > 0.0)) throw NumericError("pullback of the reference class has nonpositive mass");
  return log_scale + std::log(mass);
}

}  // namespace

CohomologyEstimate coh_lyapunov(const GeneratorSystem& sys, std::uint64_t master, std::size_t trials,
                                std::size_t n, CompositionOrder order) {
  const auto& coh = sys.cohomology();
  const auto& form = coh.form;
  const Vec kappa = form.reference().coords;
  const auto d = form.dim();
  const std::size_t b = burn_in_steps(n, 0.1);
  CohomologyEstimate est;
  est.order = order;
  est.n = n;
  est.trials = trials;
  std::vector<double> lambda_batches;
  std::vector<std::vector<double>> spec_batches(static_cast<std::size_t>(d));
  for (std::size_t t = 0; t < trials; ++t) {
    const Itinerary it(stream_key(master, t), sys.weights());
    ScaledProduct prod{Mat::Identity(d, d)};
    Vec v = kappa;
    double v_log = 0.0;
    Mat q = Mat::Identity(d, d);
    BatchMeans growth(n - b);
    std::vector<BatchMeans> spectra(static_cast<std::size_t>(d), BatchMeans(n - b));
    double prev = 0.0, at_burn = 0.0, last = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Mat& w = sys.word_matrix(it[k]);
      double lm;
      if (order == CompositionOrder::Pullback) {
        prod.p = prod.p * w;
        prod.renormalize();
        lm = log_mass(form, prod.p * kappa, prod.log_scale);
      } else {
        v = w * v;
        const double s = v.cwiseAbs().maxCoeff();
        v /= s;
        v_log += std::log(s);
        lm = log_mass(form, v, v_log);
      }
      // Pullback order is P A_k; its transpose is the forward product of A_k^T.
      const Mat a = order == CompositionOrder::Pullback ? Mat(w.transpose()) : w;
      Eigen::HouseholderQR<Mat> qr(a * q);
      q = qr.householderQ();
      const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
      if (k + 1 == b) at_burn = lm;
      if (k >= b) {
        growth.add(lm - prev);
        for (Eigen::Index i = 0; i < d; ++i) spectra[static_cast<std::size_t>(i)].add(std::log(std::abs(r(i, i))));
      }
      prev = lm;
      last = lm;
    }
    est.per_trial.push_back(n > b ? (last - at_burn) / static_cast<double>(n - b) : 0.0);
    for (double x : growth.batch_means()) lambda_batches.push_back(x);
    for (std::size_t i = 0; i < spectra.size(); ++i)
      for (double x : spectra[i].batch_means()) spec_batches[i].push_back(x);
  }
  const auto s = summarize(est.per_trial);
  est.lambda = s.mean;
  est.stderr_lambda = summarize(lambda_batches).std_error;
  std::vector<std::pair<double, double>> sp;
  for (const auto& bm : spec_batches) {
    const auto x = summarize(bm);
    sp.emplace_back(x.mean, x.std_error);
  }
  std::sort(sp.begin(), sp.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (const auto& [mu, se] : sp) {
    est.spectrum.push_back(mu);
    est.spectrum_stderr.push_back(se);
  }
  return est;
}

LimitClass limit_class(const GeneratorSystem& sys, const Itinerary& it, std::size_t n) {
  const auto& coh = sys.cohomology();
  const auto& form = coh.form;
  const auto d = form.dim();
  ScaledProduct prod{Mat::Identity(d, d)};
  for (std::size_t k = 0; k < n; ++k) {
    prod.p = prod.p * sys.word_matrix(it[k]);
    prod.renormalize();
  }
  const Vec v = prod.p * form.reference().coords;
  LimitClass lc;
  const double mass = form.mass(CohClass(v));
  if (!(mass > 0.0)) throw NumericError("pullback of the reference class has nonpositive mass");
  lc.e = CohClass(Vec(v / mass));
  lc.log_mass = prod.log_scale + std::log(mass);
  lc.q = form.q(lc.e);
  const Vec g = form.gram() * lc.e.coords;
  for (Eigen::Index i = 0; i < d; ++i) {
    lc.pairings.push_back(g(i));
    if (g(i) < -1e-9) lc.nef_ok = false;
  }
  return lc;
}

namespace {

struct Frame {
  Mat s_inv;
};

Frame frame(const IntersectionForm& form) { return {orthonormalize(form).inverse()}; }

Vec direction(const Frame& f, const Vec& v) {
  const Vec y = f.s_inv * v;
  Vec sp = y.tail(y.size() - 1);
  const double nn = sp.norm();
  if (!(nn > 0.0)) throw NumericError("class has no direction from the base point");
  return sp / nn;
}

double unit_angle(const Vec& a, const Vec& b) { return 2.0 * std::atan2((a - b).norm(), (a + b).norm()); }

}  // namespace

double class_angle(const IntersectionForm& form, const CohClass& a, const CohClass& b) {
  const Frame f = frame(form);
  return unit_angle(direction(f, a.coords), direction(f, b.coords));
}

double equivariance_angle(const GeneratorSystem& sys, const Itinerary& it, std::size_t n) {
  const auto e = limit_class(sys, it, n).e;
  const auto es = limit_class(sys, it.shifted(1), n).e;
  const Vec w = sys.word_matrix(it[0]) * es.coords;
  return class_angle(sys.cohomology().form, CohClass(w), e);
}

BoundarySample boundary_sample(const GeneratorSystem& sys, std::uint64_t master, std::size_t m,
                               std::size_t n) {
  const auto& form = sys.cohomology().form;
  const Frame f = frame(form);
  BoundarySample bs;
  std::vector<Vec> dirs;
  for (std::size_t k = 0; k < m; ++k) {
    const auto lc = limit_class(sys, Itinerary(stream_key(master, k), sys.weights()), n);
    bs.classes.push_back(lc.e);
    bs.q_values.push_back(lc.q);
    bs.max_abs_q = std::max(bs.max_abs_q, std::abs(lc.q));
    const Vec y = f.s_inv * lc.e.coords;
    bs.klein.push_back({y.size() > 1 ? y(1) / y(0) : 0.0, y.size() > 2 ? y(2) / y(0) : 0.0});
    try {
      dirs.push_back(direction(f, lc.e.coords));
    } catch (const NumericError&) {
      dirs.emplace_back(Vec::Zero(form.dim() - 1));
    }
  }
  bs.min_pairwise_angle = m >= 2 ? pi : 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j)
      bs.min_pairwise_angle = std::min(bs.min_pairwise_angle, unit_angle(dirs[i], dirs[j]));
  return bs;
}

FurstenbergEstimate furstenberg_estimate(const GeneratorSystem& sys, std::uint64_t master, std::size_t m,
                                         std::size_t n) {
  const auto& form = sys.cohomology().form;
  FurstenbergEstimate fe;
  fe.insufficient = m < 10;
  fe.sample = boundary_sample(sys, master, m, n);
  for (const auto& u : fe.sample.classes) {
    double v = 0.0;
    for (std::size_t g = 0; g < sys.size(); ++g) {
      const double mass = form.mass(CohClass(Vec(sys.word_matrix(g) * u.coords)));
      if (!(mass > 0.0)) throw NumericError("nonpositive mass in the boundary sample");
      v += sys.weights()[g] * std::log(mass);
    }
    fe.values.push_back(v);
  }
  const auto s = summarize(fe.values);
  fe.lambda = s.mean;
  fe.stderr_lambda = s.std_error;
  return fe;
}

// ---------------------------------------------------------------- stable directions

StableDirections stable_direction_dependence(const GeneratorSystem& sys, const State& x,
                                             const std::vector<std::uint64_t>& seeds, std::size_t n,
                                             const TangentOptions& opt) {
  const auto& m = sys.surface();
  StableDirections out;
  out.chart = m.best_chart(x);
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const Itinerary it(seeds[s], sys.weights());
    State cur = x;
    int chart = out.chart;
    Mat2 q = Mat2::Identity(), rt = Mat2::Identity();
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      try {
        const auto st = word_step(m, sys.words()[it[k]], cur, chart, opt.h, false);
        if (!st.d) {
          ok = false;
          break;
        }
        cur = st.y;
        chart = st.chart_out;
        const auto r = qr2(*st.d * q);
        q = r.q;
        Mat2 rk;
        rk << r.r11, r.r12, 0.0, r.r22;
        rt = rk * rt;
        rt /= rt.norm();
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) {
      Eigen::JacobiSVD<Mat2> svd(rt, Eigen::ComputeFullV);
      const auto sv = svd.singularValues();
      if (sv(0) > 0.0 && sv(1) / sv(0) <= 0.99) {
        const Eigen::Vector2d v = svd.matrixV().col(1);
        out.directions.emplace_back(std::array<double, 2>{v(0), v(1)});
        continue;
      }
    }
    out.directions.emplace_back(std::nullopt);
    out.excluded.push_back(s);
  }
  for (std::size_t k = 0; k + 1 < out.directions.size(); k += 2) {
    const auto& a = out.directions[k];
    const auto& b = out.directions[k + 1];
    if (!a || !b) continue;
    const double c = std::abs((*a)[0] * (*b)[0] + (*a)[1] * (*b)[1]);
    const double s = std::abs((*a)[0] * (*b)[1] - (*a)[1] * (*b)[0]);
    out.pair_angles.push_back(std::atan2(s, c));
  }
  if (!out.pair_angles.empty()) out.median_angle = median(out.pair_angles);
  return out;
}

// ---------------------------------------------------------------- twist growth

GrowthReport twist_growth(const SurfaceModel& m, const std::vector<int>& word, const State& x,
                          std::size_t n_max, std::size_t fit_from, double h) {
  GrowthReport g;
  g.fit_from = fit_from ? fit_from : std::max<std::size_t>(1, n_max / 10);
  State cur = x;
  int chart = m.best_chart(x);
  Mat2 d = Mat2::Identity();
  for (std::size_t k = 1; k <= n_max; ++k) {
    try {
      const auto st = word_step(m, word, cur, chart, h, false);
      if (!st.d) {
        g.truncated = true;
        break;
      }
      d = *st.d * d;
      cur = st.y;
      chart = st.chart_out;
    } catch (const Error&) {
      g.truncated = true;
      break;
    }
    Eigen::JacobiSVD<Mat2> svd(d);
    g.norms.push_back(svd.singularValues()(0));
  }
  std::vector<double> ln, n, lnorm;
  for (std::size_t k = g.fit_from; k <= g.norms.size(); ++k) {
    ln.push_back(std::log(static_cast<double>(k)));
    n.push_back(static_cast<double>(k));
    lnorm.push_back(std::log(g.norms[k - 1]));
  }
  if (ln.size() >= 2) {
    g.loglog = linear_fit(ln, lnorm);
    g.semilog = linear_fit(n, lnorm);
  }
  return g;
}

// ---------------------------------------------------------------- equidistribution

VolumeAverages vol_averages(const SurfaceModel& m, const std::vector<TestFunction>& tests,
                            std::size_t draws, std::uint64_t seed) {
  const int charts = m.num_charts();
  CounterRng rng(seed);
  const std::size_t k = tests.size();
  std::vector<double> sa(k, 0.0), saa(k, 0.0), sab(k, 0.0);
  double sb = 0.0, sbb = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const int c = static_cast<int>(rng() % static_cast<std::uint64_t>(charts));
    const Coords u{rng.uniform(-pi, pi), rng.uniform(-pi, pi)};
    std::vector<double> a(k, 0.0);
    double b = 0.0;
    for (const State& p : m.fiber(c, u)) {
      double inv = 0.0;
      for (int cc = 0; cc < charts; ++cc) {
        try {
          inv += 1.0 / m.density(p, cc);
        } catch (const ChartSingular&) {
        }
      }
      if (!(inv > 0.0)) continue;
      const double w = static_cast<double>(charts) * 4.0 * pi * pi / inv;
      const Coords pc = m.plot_coords(p);
      for (std::size_t i = 0; i < k; ++i) a[i] += w * tests[i].f(pc);
      b += w;
    }
    for (std::size_t i = 0; i < k; ++i) {
      sa[i] += a[i];
      saa[i] += a[i] * a[i];
      sab[i] += a[i] * b;
    }
    sb += b;
    sbb += b * b;
  }
  if (!(sb > 0.0)) throw SamplerError("volume sampler produced no weight");
  VolumeAverages va;
  va.draws = draws;
  va.total_weight = sb / static_cast<double>(draws);
  for (std::size_t i = 0; i < k; ++i) {
    const double r = sa[i] / sb;
    const double resid = std::max(0.0, saa[i] - 2.0 * r * sab[i] + r * r * sbb);
    va.mean.push_back(r);
    va.stderr_mean.push_back(std::sqrt(resid) / sb);
  }
  return va;
}

EquidistributionReport equidistribution_test(const GeneratorSystem& sys, const State& x0,
                                             const Itinerary& it, std::size_t n, std::size_t vol_draws,
                                             std::uint64_t vol_seed, int k) {
  return equidistribution_test(sys, x0, it, n,
                               vol_averages(sys.surface(), trig_test_functions(k), vol_draws, vol_seed), k);
}

EquidistributionReport equidistribution_test(const GeneratorSystem& sys, const State& x0,
                                             const Itinerary& it, std::size_t n, const VolumeAverages& va,
                                             int k) {
  EquidistributionReport rep;
  const auto tests = trig_test_functions(k);
  if (va.mean.size() != tests.size()) throw DimensionError("volume averages do not match the test functions");
  OrbitOptions opt;
  opt.tests = tests;
  rep.measure = run_orbit(sys, x0, it, n, opt);
  rep.n = rep.measure.n;
  rep.consistent = !rep.measure.truncated;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    rep.names.push_back(tests[i].name);
    rep.orbit_mean.push_back(rep.measure.test_mean[i]);
    rep.orbit_stderr.push_back(rep.measure.test_stderr[i]);
    rep.vol_mean.push_back(va.mean[i]);
    rep.vol_stderr.push_back(va.stderr_mean[i]);
    const double se = std::hypot(rep.measure.test_stderr[i], va.stderr_mean[i]);
    const double diff = rep.measure.test_mean[i] - va.mean[i];
    const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    rep.z.push_back(z);
    if (!(std::abs(z) < 4.0) || se == 0.0) rep.consistent = false;
  }
  return rep;
}

}  // namespace k3dyn
