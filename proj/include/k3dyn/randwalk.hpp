#pragma once

// Random compositions of involutions: orbits, Lyapunov exponents on the
// tangent bundle and on cohomology, limit classes and boundary samples,
// stable directions, twist growth and equidistribution.
//
// Conventions. A step applies one generator word; exponents are per step.
// The orbit after n steps is f_{n-1} o ... o f_0 (x). In cohomology the
// pullback (f_{n-1} o ... o f_0)^* is the product W_{f_0} ... W_{f_{n-1}} of
// word matrices ("pullback" order); the "reversed" order multiplies
// W_{f_{n-1}} ... W_{f_0} instead.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "k3dyn/minkowski.hpp"
#include "k3dyn/stats.hpp"
#include "k3dyn/surface_model.hpp"

namespace k3dyn {

enum class CompositionOrder { Pullback, Reversed };

struct CohomologyData {
  IntersectionForm form;  // must carry a reference class
  std::vector<Mat> base;  // pullback matrix of each base involution
};

class GeneratorSystem {
 public:
  // Throws ConfigError unless every word is nonempty with valid indices and
  // the weights are positive and sum to 1 within 1e-12.
  GeneratorSystem(std::shared_ptr<const SurfaceModel> surface, std::vector<std::vector<int>> words,
                  std::vector<double> weights);

  // Rescales the weights to sum 1; `rescaled` reports whether that changed them.
  static GeneratorSystem normalized(std::shared_ptr<const SurfaceModel> surface,
                                    std::vector<std::vector<int>> words, std::vector<double> weights,
                                    bool* rescaled = nullptr);
  // Uniform measure on the base involutions.
  static GeneratorSystem uniform(std::shared_ptr<const SurfaceModel> surface);
  // Dirac mass on one word.
  static GeneratorSystem dirac(std::shared_ptr<const SurfaceModel> surface, std::vector<int> word);

  [[nodiscard]] const SurfaceModel& surface() const { return *surface_; }
  [[nodiscard]] std::shared_ptr<const SurfaceModel> surface_ptr() const { return surface_; }
  [[nodiscard]] const std::vector<std::vector<int>>& words() const { return words_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return words_.size(); }

  [[nodiscard]] State apply(std::size_t g, const State& x) const;

  // Wehler surfaces get their cohomology automatically.
  void set_cohomology(CohomologyData data);
  [[nodiscard]] bool has_cohomology() const { return coh_.has_value(); }
  // Throws Unsupported without cohomology data.
  [[nodiscard]] const CohomologyData& cohomology() const;
  // W_g = M_{k1} ... M_{km} for word g = (k1, ..., km).
  [[nodiscard]] const Mat& word_matrix(std::size_t g) const;

 private:
  std::shared_ptr<const SurfaceModel> surface_;
  std::vector<std::vector<int>> words_;
  std::vector<double> weights_;
  std::optional<CohomologyData> coh_;
  std::vector<Mat> word_mats_;
};

// The generator stream of one itinerary: f_k is drawn from the weights with
// the k-th output of the counter stream `key`.
class Itinerary {
 public:
  Itinerary(std::uint64_t key, const std::vector<double>& weights, std::size_t offset = 0);

  std::size_t operator[](std::size_t k) const;
  [[nodiscard]] std::uint64_t key() const { return key_; }
  // The shifted itinerary (f_s, f_{s+1}, ...).
  [[nodiscard]] Itinerary shifted(std::size_t s) const { return {key_, weights_, offset_ + s}; }

 private:
  std::uint64_t key_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::size_t offset_;
};

struct TestFunction {
  std::string name;
  std::function<double(const Coords&)> f;
};
// Up to 8 low trigonometric polynomials in the plot coordinates.
std::vector<TestFunction> trig_test_functions(int k = 8);

struct EmpiricalMeasure {
  std::size_t bins = 0;
  // Mass of bin (branch, i, j) at (branch * bins + i) * bins + j, where i and
  // j index theta_1 and theta_2 in [-pi, pi).
  std::vector<double> mass;
  std::vector<State> reservoir;  // evenly strided orbit points
  std::size_t n = 0;
  double worst_residual = 0.0;
  bool truncated = false;
  std::string error;
  std::vector<std::string> test_names;
  std::vector<double> test_mean, test_stderr;

  [[nodiscard]] double total_mass() const;
};

struct OrbitOptions {
  std::size_t bins = 64;
  std::size_t reservoir = 4096;
  std::vector<TestFunction> tests;
};

// Time average of the Dirac masses at x_0, ..., x_{n-1}.
EmpiricalMeasure run_orbit(const GeneratorSystem& sys, const State& x0, const Itinerary& it,
                           std::size_t n, const OrbitOptions& opt = {});

struct TangentOptions {
  double h = 1e-6;
  bool richardson = true;  // also differentiate with 2h and record the gap
  double burn_in = 0.1;    // leading fraction of steps left out of the averages
  std::size_t batches = 20;
};

struct LyapunovEstimate {
  double lambda_plus = 0.0, lambda_minus = 0.0;
  double stderr_plus = 0.0, stderr_minus = 0.0;
  double sum = 0.0, stderr_sum = 0.0;  // lambda_plus + lambda_minus
  std::size_t n = 0, trials = 1;
  std::size_t gaps = 0;  // steps without a differential
  double richardson = 0.0;
  double worst_residual = 0.0;
  bool truncated = false;
  std::vector<double> batches_plus, batches_minus, batches_sum;

  [[nodiscard]] double combined_stderr() const;
};

LyapunovEstimate tangent_lyapunov(const GeneratorSystem& sys, const State& x0, const Itinerary& it,
                                  std::size_t n, const TangentOptions& opt = {});
// Pools the batch means of independent trials.
LyapunovEstimate pool(const std::vector<LyapunovEstimate>& trials);

struct CohomologyEstimate {
  CompositionOrder order = CompositionOrder::Pullback;
  double lambda = 0.0, stderr_lambda = 0.0;  // growth of log M
  std::vector<double> per_trial;
  std::vector<double> spectrum, spectrum_stderr;  // QR exponents, descending
  std::size_t n = 0, trials = 0;
};

// Trial t follows the itinerary with key stream_key(master, t). The leading
// n/10 steps are left out of every average.
CohomologyEstimate coh_lyapunov(const GeneratorSystem& sys, std::uint64_t master, std::size_t trials,
                                std::size_t n, CompositionOrder order = CompositionOrder::Pullback);

struct LimitClass {
  CohClass e;  // mass 1
  double q = 0.0;
  std::vector<double> pairings;  // <e | basis vector i>
  bool nef_ok = true;            // all pairings >= -1e-9
  double log_mass = 0.0;         // log M of the unnormalized pullback
};

// Normalized (f_omega^n)^* [kappa0].
LimitClass limit_class(const GeneratorSystem& sys, const Itinerary& it, std::size_t n);

// Angle at the base point between the directions of two positive or
// isotropic classes (the visual angle in the hyperbolic plane or space).
double class_angle(const IntersectionForm& form, const CohClass& a, const CohClass& b);

// Angle between f_0^* e(shifted itinerary) and e(itinerary).
double equivariance_angle(const GeneratorSystem& sys, const Itinerary& it, std::size_t n);

struct BoundarySample {
  std::vector<CohClass> classes;
  std::vector<double> q_values;
  std::vector<std::array<double, 2>> klein;  // Klein-disk coordinates
  double min_pairwise_angle = 0.0;
  double max_abs_q = 0.0;
};
// Limit classes of m itineraries keyed by stream_key(master, k).
BoundarySample boundary_sample(const GeneratorSystem& sys, std::uint64_t master, std::size_t m,
                               std::size_t n);

struct FurstenbergEstimate {
  double lambda = 0.0, stderr_lambda = 0.0;
  std::vector<double> values;  // sum_g nu(g) log M(W_g u_k)
  BoundarySample sample;
  bool insufficient = false;  // fewer than 10 classes
};
FurstenbergEstimate furstenberg_estimate(const GeneratorSystem& sys, std::uint64_t master,
                                         std::size_t m, std::size_t n);

struct StableDirections {
  int chart = 0;
  std::vector<std::optional<std::array<double, 2>>> directions;  // per seed
  std::vector<std::size_t> excluded;                              // seed positions
  std::vector<double> pair_angles;  // between seeds 2k and 2k+1
  double median_angle = 0.0;
};

// Most contracted right singular direction of D_x f_omega^n per seed, from
// the accumulated QR factors.
StableDirections stable_direction_dependence(const GeneratorSystem& sys, const State& x,
                                             const std::vector<std::uint64_t>& seeds, std::size_t n,
                                             const TangentOptions& opt = {});

struct GrowthReport {
  std::vector<double> norms;  // norms[k] = |D_x h^(k+1)|
  std::size_t fit_from = 1;
  LinearFit loglog, semilog;
  bool truncated = false;
};

// Iterates the word h from x; fits log |D h^n| against log n and against n
// over fit_from <= n <= length (fit_from = 0 picks n_max / 10).
GrowthReport twist_growth(const SurfaceModel& m, const std::vector<int>& word, const State& x,
                          std::size_t n_max, std::size_t fit_from = 0, double h = 1e-6);

struct VolumeAverages {
  std::vector<double> mean, stderr_mean;
  std::size_t draws = 0;
  double total_weight = 0.0;
};

// Invariant-volume averages by multiple-chart importance sampling: a chart is
// drawn uniformly, its coordinates uniformly on the torus, and every point
// above them is weighted by K 4 pi^2 / sum_c 1 / rho_c.
VolumeAverages vol_averages(const SurfaceModel& m, const std::vector<TestFunction>& tests,
                            std::size_t draws, std::uint64_t seed);

struct EquidistributionReport {
  std::vector<std::string> names;
  std::vector<double> orbit_mean, orbit_stderr, vol_mean, vol_stderr, z;
  bool consistent = false;
  std::size_t n = 0;
  EmpiricalMeasure measure;
};

EquidistributionReport equidistribution_test(const GeneratorSystem& sys, const State& x0,
                                             const Itinerary& it, std::size_t n,
                                             std::size_t vol_draws, std::uint64_t vol_seed, int k = 8);
// Same, against precomputed volume averages of trig_test_functions(k).
EquidistributionReport equidistribution_test(const GeneratorSystem& sys, const State& x0,
                                             const Itinerary& it, std::size_t n,
                                             const VolumeAverages& vol, int k = 8);

}  // namespace k3dyn
