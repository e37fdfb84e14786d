#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "idewave/convolution.hpp"
#include "idewave/kernels.hpp"
#include "idewave/models.hpp"
#include "idewave/wave_operator.hpp"

namespace idewave {

enum class Boundary { zero_pad, periodic };

struct SimState {
  Grid grid;
  Boundary boundary = Boundary::zero_pad;
  /// history[j][l][k]: generation j (0 oldest, tau - 1 newest), species l, cell k.
  std::vector<std::vector<std::vector<double>>> history;
  std::size_t n = 0;

  const std::vector<double>& newest(std::size_t l) const { return history.back()[l]; }
};

struct FrontTrace {
  std::size_t species = 0;
  double level = 0.0;
  std::vector<std::pair<std::size_t, double>> positions;  // (n, x_front)
  double fitted_speed = 0.0;
  std::pair<std::size_t, std::size_t> fit_window{0, 0};   // index range into positions
  double fit_residual = 0.0;                              // rms of the linear fit
};

struct RunResult {
  SimState state;
  std::vector<FrontTrace> fronts;
  double box_excess = 0.0;  // largest amount any cell left [0, M]
};

/// Grid of `cells` cells on [-L/2, L/2) with L = 2 (cmin n_steps + radius + init_halfwidth).
Grid sim_grid(double cmin, std::size_t n_steps, double kernel_radius, double init_halfwidth,
              std::size_t cells = std::size_t{1} << 14);

/// Rightmost x where u crosses level from above, interpolated between cells.
std::optional<double> front_position(const std::vector<double>& u, const Grid& grid, double level);

/// Steps u_{n+1}^i = k_i * P_i[u_{n-tau+1}, ..., u_n] on a fixed grid. Direct
/// summation is the default; the FFT path is only accurate over short runs
/// because round-off in empty regions is amplified by the growth rate.
class Simulator {
 public:
  Simulator(const SystemModel& model, const std::vector<Kernel>& kernels, const Grid& grid,
            Boundary boundary = Boundary::zero_pad, ConvolutionMethod method = ConvolutionMethod::direct);

  const Grid& grid() const { return grid_; }
  double radius() const { return radius_; }

  /// Every generation equal to value_l on |x| < halfwidth, 0 elsewhere.
  SimState indicator(const std::vector<double>& value, double halfwidth) const;
  SimState constant(const std::vector<double>& value) const;

  void step(SimState& state) const;

  /// Tracks the rightmost crossing of levels[i] (default E_i / 2) for every
  /// species and fits the front speed over the last half of the run.
  RunResult run(SimState state, std::size_t n_steps, std::vector<double> levels = {}, bool check_edges = true) const;

 private:
  SystemModel model_;
  Grid grid_;
  Boundary boundary_;
  double radius_ = 0.0;
  std::vector<std::size_t> half_;
  std::vector<Convolver> conv_;
};

struct Plateau {
  std::vector<double> mean;
  std::vector<double> min;
  std::vector<double> max;
  double x_lo = 0.0;
  double x_hi = 0.0;
};

/// Averages of every species over [lo_frac x_f, hi_frac x_f] at the final
/// generation, x_f the last recorded front position.
Plateau behind_front_state(const SimState& state, const FrontTrace& trace, double lo_frac = 0.25,
                           double hi_frac = 0.5);

}  // namespace idewave
