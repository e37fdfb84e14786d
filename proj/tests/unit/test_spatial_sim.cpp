#include <cmath>

#include <gtest/gtest.h>

#include "idewave/error.hpp"
#include "idewave/spatial_sim.hpp"

using namespace idewave;

namespace {

const Kernel kGauss = Kernel::gaussian(1.0);

double radius(const Kernel& k) { return discretize(k, 0.05).radius; }

double max_abs(const std::vector<double>& v, double target, std::size_t lo, std::size_t hi) {
  double d = 0.0;
  for (std::size_t k = lo; k < hi; ++k) d = std::max(d, std::abs(v[k] - target));
  return d;
}

}  // namespace

TEST(SpatialSim, GridLayout) {
  const Grid g = sim_grid(1.5, 100, 7.0, 5.0, 1024);
  const double L = 2.0 * (150.0 + 7.0 + 5.0);
  EXPECT_EQ(g.n, 1024u);
  EXPECT_DOUBLE_EQ(g.x0, -L / 2.0);
  EXPECT_NEAR(g.h * 1024.0, L, 1e-12);
}

TEST(SpatialSim, FrontPosition) {
  Grid g{0.0, 1.0, 5};
  EXPECT_NEAR(*front_position({1.0, 1.0, 0.8, 0.2, 0.0}, g, 0.5), 2.5, 1e-15);
  EXPECT_FALSE(front_position({0.1, 0.1, 0.1, 0.1, 0.1}, g, 0.5).has_value());
}

TEST(SpatialSim, ConstantStatesAreFixed) {
  const SystemModel m = logistic_model();
  const Grid g = sim_grid(1.5, 10, radius(kGauss), 5.0, 2048);
  const Simulator sim(m, {kGauss}, g);
  SimState e = sim.constant(m.steady);
  SimState z = sim.constant({0.0});
  for (int n = 0; n < 5; ++n) {
    sim.step(e);
    sim.step(z);
  }
  const std::size_t margin = static_cast<std::size_t>(6.0 * sim.radius() / g.h);
  EXPECT_LT(max_abs(e.newest(0), 2.0 / 3.0, margin, g.n - margin), 1e-12);
  EXPECT_EQ(max_abs(z.newest(0), 0.0, 0, g.n), 0.0);

  const Simulator periodic(m, {kGauss}, g, Boundary::periodic);
  SimState p = periodic.constant(m.steady);
  for (int n = 0; n < 5; ++n) periodic.step(p);
  EXPECT_LT(max_abs(p.newest(0), 2.0 / 3.0, 0, g.n), 1e-12);
}

TEST(SpatialSim, StaysInTheBox) {
  const SystemModel m = competition2_model(1, 2, 0.3, 0.4, 0.2, 0.1);
  const Grid g = sim_grid(1.8, 40, radius(kGauss), 5.0, 4096);
  const Simulator sim(m, {kGauss}, g);
  const RunResult r = sim.run(sim.indicator({1.0, 1.0}, 5.0), 40);
  EXPECT_LE(r.box_excess, 0.0);
  for (std::size_t l = 0; l < 2; ++l) {
    for (double v : r.state.newest(l)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(SpatialSim, FftMatchesDirectOverShortRuns) {
  const SystemModel m = delayed_bh_model(1.0, 0.25);
  const Grid g = sim_grid(1.6, 20, radius(kGauss), 5.0, 4096);
  const Simulator direct(m, {kGauss}, g);
  const Simulator fft(m, {kGauss}, g, Boundary::zero_pad, ConvolutionMethod::fft);
  SimState a = direct.indicator({0.8}, 5.0);
  SimState b = fft.indicator({0.8}, 5.0);
  for (int n = 0; n < 5; ++n) {
    direct.step(a);
    fft.step(b);
  }
  double d = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) d = std::max(d, std::abs(a.newest(0)[k] - b.newest(0)[k]));
  EXPECT_LT(d, 1e-10);
}

TEST(SpatialSim, LogisticSpreadsAtTheMinimalSpeed) {
  const SystemModel m = logistic_model();
  const double cmin = system_minimal_speed(m, {kGauss});
  const std::size_t n = 150;
  const Simulator sim(m, {kGauss}, sim_grid(cmin, n, radius(kGauss), 5.0));
  const RunResult r = sim.run(sim.indicator({0.6}, 5.0), n, {1.0 / 3.0});
  ASSERT_EQ(r.fronts.size(), 1u);
  EXPECT_NEAR(r.fronts[0].fitted_speed / cmin, 1.0, 0.02);
  EXPECT_LE(r.fronts[0].fitted_speed, cmin);
  const Plateau p = behind_front_state(r.state, r.fronts[0]);
  EXPECT_NEAR(p.mean[0], 2.0 / 3.0, 0.01);
}

TEST(SpatialSim, DelayedPlateau) {
  const SystemModel m = delayed_bh_model(1.0, 0.25);
  const double cmin = system_minimal_speed(m, {kGauss});
  const std::size_t n = 120;
  const Simulator sim(m, {kGauss}, sim_grid(cmin, n, radius(kGauss), 5.0));
  const RunResult r = sim.run(sim.indicator({0.8}, 5.0), n);
  const Plateau p = behind_front_state(r.state, r.fronts[0]);
  EXPECT_NEAR(p.mean[0], 0.8, 1e-3);
  EXPECT_LE(p.min[0], p.mean[0] + 1e-12);
  EXPECT_GE(p.max[0], p.mean[0] - 1e-12);
  EXPECT_NEAR(r.fronts[0].fitted_speed / cmin, 1.0, 0.02);
}

TEST(SpatialSim, WiderKernelSpreadsFaster) {
  const SystemModel m = delayed_bh_model(1.0, 0.25);
  double prev = 0.0;
  for (double sigma : {0.5, 1.0, 2.0}) {
    const Kernel k = Kernel::gaussian(sigma);
    const double cmin = system_minimal_speed(m, {k});
    const Simulator sim(m, {k}, sim_grid(cmin, 60, radius(k), 5.0, 8192));
    const RunResult r = sim.run(sim.indicator({0.8}, 5.0), 60);
    EXPECT_GT(r.fronts[0].fitted_speed, prev);
    prev = r.fronts[0].fitted_speed;
  }
}

TEST(SpatialSim, RefinementBarelyMovesTheSpeed) {
  const SystemModel m = logistic_model();
  const double cmin = system_minimal_speed(m, {kGauss});
  double speeds[2];
  int i = 0;
  for (std::size_t cells : {std::size_t{1} << 13, std::size_t{1} << 14}) {
    const Simulator sim(m, {kGauss}, sim_grid(cmin, 80, radius(kGauss), 5.0, cells));
    speeds[i++] = sim.run(sim.indicator({0.6}, 5.0), 80, {1.0 / 3.0}).fronts[0].fitted_speed;
  }
  EXPECT_NEAR(speeds[0] / speeds[1], 1.0, 0.01);
}

TEST(SpatialSim, LevelNeverAttained) {
  const SystemModel m = logistic_model();
  const Simulator sim(m, {kGauss}, sim_grid(1.5, 20, radius(kGauss), 5.0, 2048));
  try {
    sim.run(sim.indicator({0.6}, 5.0), 20, {0.9});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("level never attained"), std::string::npos);
  }
}

TEST(SpatialSim, FrontReachesTheEdge) {
  const SystemModel m = logistic_model();
  const Simulator sim(m, {kGauss}, sim_grid(1.5, 10, radius(kGauss), 5.0, 2048));
  try {
    sim.run(sim.indicator({0.6}, 5.0), 40);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("front reached domain edge"), std::string::npos);
  }
}

TEST(SpatialSim, TooFewStepsForAFit) {
  const SystemModel m = logistic_model();
  const Simulator sim(m, {kGauss}, sim_grid(1.5, 10, radius(kGauss), 5.0, 2048));
  EXPECT_THROW(sim.run(sim.indicator({0.6}, 5.0), 8), NumericalError);
}
