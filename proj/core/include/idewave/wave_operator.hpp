#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "idewave/bounds.hpp"
#include "idewave/convolution.hpp"
#include "idewave/dispersion.hpp"
#include "idewave/kernels.hpp"
#include "idewave/models.hpp"

namespace idewave {

/// Uniform mesh x_k = x0 + k h, k = 0 .. n - 1.
struct Grid {
  double x0 = 0.0;
  double h = 1.0;
  std::size_t n = 0;
  double x(std::size_t k) const { return x0 + static_cast<double>(k) * h; }
  double end() const { return x(n - 1); }
};

/// Sampled profile Phi = (phi_1, ..., phi_m) with tails: phi_i(xi) =
/// left_coeff_i e^{left_rate_i xi} left of the grid and right_value_i right of it.
struct WaveProfile {
  Grid grid;
  double c = 0.0;
  std::vector<std::vector<double>> values;  // [species][node]
  std::vector<double> left_rate;
  std::vector<double> left_coeff;
  std::vector<double> right_value;

  std::size_t species() const { return values.size(); }
  /// Linear interpolation on the grid, tails outside.
  double eval(std::size_t i, double xi) const;
  /// Recomputes right_value (and left_coeff if left) from the end values.
  /// The operator keeps the left tail of its input: re-fitting it every step
  /// would turn the tail amplitude into a neutral mode.
  void refresh_tails(bool left = true);
};

struct IterationOptions {
  double tol = 1e-10;       // on the weighted residual
  double sup_tol = 1e-8;    // on the unweighted residual
  std::size_t max_iter = 10000;
  bool clamp = true;
};

struct IterationReport {
  std::size_t iterations = 0;
  double residual_mu = 0.0;
  double residual_sup = 0.0;
  double max_clamp = 0.0;         // largest clamp correction over the run
  double clamp_after_100 = 0.0;   // largest correction after iteration 100
  double last_clamp = 0.0;
  bool converged = false;         // residual_mu < tol
};

/// Default mesh: span 80 / lambda1 centred on 0, h = min(0.02 / lambda2,
/// stddev / 10) shrunk so that c / h is an integer.
Grid default_grid(const DispersionResult& disp, const std::vector<Kernel>& kernels, double span = 0.0,
                  double h = 0.0);

/// Discretization of
///   F_i(Phi)(xi) = sum_s w_s P_i[phi_l(xi - s - (tau - j) c)]
/// on a fixed grid. Direct summation by default: FFT round-off (~1e-16
/// absolute) swamps the exponentially small left tail and gets amplified by
/// the linear growth there. With the FFT path apply() reuses internal
/// buffers and is not safe to call concurrently on one instance.
class WaveOperator {
 public:
  WaveOperator(const SystemModel& model, const std::vector<Kernel>& kernels, const DispersionResult& disp,
               const Grid& grid, ConvolutionMethod method = ConvolutionMethod::direct);
  ~WaveOperator();
  WaveOperator(WaveOperator&&) noexcept;

  const Grid& grid() const { return grid_; }
  double c() const { return c_; }
  const DispersionResult& dispersion() const { return disp_; }

  WaveProfile sample(const std::function<double(std::size_t, double)>& f) const;
  WaveProfile constant(const std::vector<double>& value) const;
  WaveProfile from_bound(const BoundPair& pair, bool upper) const;
  /// Profile re-sampled onto this operator's grid.
  WaveProfile resample(const WaveProfile& profile) const;

  WaveProfile apply(const WaveProfile& profile) const;
  double residual_mu(const WaveProfile& profile, double mu) const;
  double residual_sup(const WaveProfile& profile) const;

  /// Picard iteration clamped into [lower, upper].
  std::pair<WaveProfile, IterationReport> iterate(WaveProfile start, const BoundPair& pair,
                                                  const IterationOptions& options = {}) const;

 private:
  SystemModel model_;
  DispersionResult disp_;
  Grid grid_;
  double c_;
  std::size_t shift_ = 0;  // c / h
  std::vector<std::size_t> half_;
  std::size_t half_max_ = 0;
  std::vector<Convolver> conv_;
};

struct NearCriticalResult {
  std::vector<double> speeds;
  std::vector<WaveProfile> profiles;  // shifted so phi_1(0) = target
  std::vector<IterationReport> reports;
  std::vector<double> drift;          // sup distance between successive shifted profiles
  double target = 0.0;
};

/// Profiles at c = cmin + eps for a decreasing eps sequence, each shifted so
/// that phi_1(0) = v1 / 2 (scalar birth laws) or E_1 / 2 (systems).
NearCriticalResult near_critical_profile(const SystemModel& model, const std::vector<Kernel>& kernels,
                                         const std::vector<double>& eps_sequence,
                                         const IterationOptions& options = {});

/// Shift of a profile: psi(xi) = phi(xi + offset), sampled on the same grid.
WaveProfile shift_profile(const WaveProfile& profile, double offset);

/// First xi (from the left) where phi_i reaches level, linearly interpolated.
std::optional<double> level_crossing(const WaveProfile& profile, std::size_t i, double level);

}  // namespace idewave
