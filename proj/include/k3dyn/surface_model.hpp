#pragma once

// A uniform view of the real surfaces driven by the random walks.
//
// A state is a vector of angles: (theta_1, theta_2, theta_3) for a Wehler
// surface, (theta_0 = 0, theta_1, ..., theta_4) of the turns for a pentagon.
// Charts are 2-parameter coordinate systems given by two of the angles, with
// the remaining angles solved for on the branch nearest to a reference state.

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "k3dyn/pentagon.hpp"
#include "k3dyn/rng.hpp"
#include "k3dyn/wehler.hpp"

namespace k3dyn {

using State = std::array<double, 5>;
using Coords = std::array<double, 2>;
using Mat2 = Eigen::Matrix2d;

// x - y reduced to (-pi, pi].
double angle_diff(double x, double y);

class SurfaceModel {
 public:
  virtual ~SurfaceModel() = default;

  [[nodiscard]] virtual std::string kind() const = 0;
  // Number of base involutions.
  [[nodiscard]] virtual int num_generators() const = 0;
  [[nodiscard]] virtual int num_charts() const = 0;
  // Number of meaningful angles in a state.
  [[nodiscard]] virtual int state_size() const = 0;

  [[nodiscard]] virtual State apply(int gen, const State& x) const = 0;
  // Relative defect of the defining equations.
  [[nodiscard]] virtual double residual(const State& x) const = 0;
  // Moves x back onto the surface.
  [[nodiscard]] virtual State project(const State& x) const = 0;

  [[nodiscard]] virtual Coords coords(const State& x, int chart) const = 0;
  // Chart point over c on the branch nearest to `near`; nullopt off the image.
  [[nodiscard]] virtual std::optional<State> lift(int chart, const Coords& c,
                                                  const State& near) const = 0;
  // All chart points over c.
  [[nodiscard]] virtual std::vector<State> fiber(int chart, const Coords& c) const = 0;
  // Transversality of the chart at x in [0, 1]; 0 where it degenerates.
  [[nodiscard]] virtual double conditioning(const State& x, int chart) const = 0;
  // Invariant area density with respect to the chart's coordinate area.
  [[nodiscard]] virtual double density(const State& x, int chart) const = 0;

  // Plot coordinates (theta_1, theta_2) and a branch label in {0, 1}.
  [[nodiscard]] virtual Coords plot_coords(const State& x) const = 0;
  [[nodiscard]] virtual int branch(const State& x) const = 0;

  [[nodiscard]] virtual nlohmann::json to_json() const = 0;

  // Charts ordered from best to worst conditioned at x.
  [[nodiscard]] std::vector<int> chart_order(const State& x) const;
  [[nodiscard]] int best_chart(const State& x) const { return chart_order(x).front(); }

  // Differential of a base involution from chart_in at x to chart_out at
  // apply(gen, x), by central differences with step h.
  [[nodiscard]] std::optional<Mat2> differential(int gen, const State& x, int chart_in,
                                                 int chart_out, double h) const;

  // Point with chart-0 coordinates uniform on the torus, rejecting points
  // whose best chart has conditioning below 1e-3; throws SamplerError after
  // `retries` failures.
  [[nodiscard]] State random_point(CounterRng& rng, int retries = 10) const;
};

class WehlerModel final : public SurfaceModel {
 public:
  explicit WehlerModel(wehler::WehlerSurface s) : s_(std::move(s)) {}

  [[nodiscard]] std::string kind() const override { return "wehler"; }
  [[nodiscard]] int num_generators() const override { return 3; }
  [[nodiscard]] int num_charts() const override { return 3; }
  [[nodiscard]] int state_size() const override { return 3; }
  [[nodiscard]] State apply(int gen, const State& x) const override;
  [[nodiscard]] double residual(const State& x) const override;
  [[nodiscard]] State project(const State& x) const override;
  [[nodiscard]] Coords coords(const State& x, int chart) const override;
  [[nodiscard]] std::optional<State> lift(int chart, const Coords& c,
                                          const State& near) const override;
  [[nodiscard]] std::vector<State> fiber(int chart, const Coords& c) const override;
  [[nodiscard]] double conditioning(const State& x, int chart) const override;
  [[nodiscard]] double density(const State& x, int chart) const override;
  [[nodiscard]] Coords plot_coords(const State& x) const override { return {x[0], x[1]}; }
  [[nodiscard]] int branch(const State& x) const override;
  [[nodiscard]] nlohmann::json to_json() const override;

  [[nodiscard]] const wehler::WehlerSurface& surface() const { return s_; }
  static State to_state(const wehler::Triple& t);
  static wehler::Triple to_triple(const State& x);

 private:
  wehler::WehlerSurface s_;
};

// Generator g is the fold sigma_{g, g+1} (indices mod 5), i.e. the reflection
// of vertex g+1.
class PentagonModel final : public SurfaceModel {
 public:
  explicit PentagonModel(pentagon::SideLengths l) : l_(l) {}

  [[nodiscard]] std::string kind() const override { return "pentagon"; }
  [[nodiscard]] int num_generators() const override { return 5; }
  [[nodiscard]] int num_charts() const override { return 4; }
  [[nodiscard]] int state_size() const override { return 5; }
  [[nodiscard]] State apply(int gen, const State& x) const override;
  [[nodiscard]] double residual(const State& x) const override;
  [[nodiscard]] State project(const State& x) const override;
  [[nodiscard]] Coords coords(const State& x, int chart) const override;
  [[nodiscard]] std::optional<State> lift(int chart, const Coords& c,
                                          const State& near) const override;
  [[nodiscard]] std::vector<State> fiber(int chart, const Coords& c) const override;
  [[nodiscard]] double conditioning(const State& x, int chart) const override;
  [[nodiscard]] double density(const State& x, int chart) const override;
  [[nodiscard]] Coords plot_coords(const State& x) const override { return {x[1], x[2]}; }
  [[nodiscard]] int branch(const State& x) const override;
  [[nodiscard]] nlohmann::json to_json() const override;

  [[nodiscard]] const pentagon::SideLengths& lengths() const { return l_; }
  static State to_state(const pentagon::PentagonConfig& p);
  [[nodiscard]] pentagon::PentagonConfig to_config(const State& x) const;

 private:
  pentagon::SideLengths l_;
};

// |rho_out(g x) |det Dg(x)| / rho_in(x) - 1|, charts chosen as the best ones.
double density_invariance_defect(const SurfaceModel& m, int gen, const State& x);

}  // namespace k3dyn
