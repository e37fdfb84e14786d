#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idewave/dispersion.hpp"
#include "idewave/kernels.hpp"
#include "idewave/models.hpp"

namespace idewave {

/// upper_i(xi) = min(e^{lambda_i xi}, cap_i),
/// lower_i(xi) = max(e^{lambda_i xi} - Q e^{eta lambda_i xi}, 0).
struct BoundPair {
  std::vector<double> lambda;
  std::vector<double> caps;
  double eta = 1.5;
  double Q = 1.0;

  std::size_t species() const { return lambda.size(); }
  double upper(std::size_t i, double xi) const;
  double lower(std::size_t i, double xi) const;
  /// Where the lower bound reaches 0: -ln Q / ((eta - 1) lambda_i).
  double xi0(std::size_t i) const;
};

/// Caps are v2 for scalar birth laws and the model caps otherwise.
BoundPair build_bounds(const SystemModel& model, const DispersionResult& disp,
                       std::optional<double> q_override = std::nullopt);

struct VerifyOptions {
  double xi_step = 0.0;     // 0: automatic
  double quad_step = 0.0;   // 0: automatic
  double tol = 1e-8;        // violations count beyond tol * (1 + |rhs|)
  bool random_mode = false; // sample random psi instead of extremal substitution
  std::size_t n_random = 200;
  std::uint64_t seed = 1;
};

struct BoundsReport {
  double max_violation_upper = 0.0;
  double max_violation_lower = 0.0;
  double xi_worst_upper = 0.0;
  double xi_worst_lower = 0.0;
  std::size_t species_worst_upper = 0;
  std::size_t species_worst_lower = 0;
  double xi_min = 0.0;
  double xi_max = 0.0;
  std::size_t n_points = 0;
  std::string mode;         // "extremal" or "random"
  bool certifying = false;  // random sampling never certifies
  bool pass = false;
};

/// Checks the upper/lower inequalities of the pair on a uniform xi grid over
/// [min_i (xi0_i - 20/lambda_i), max_i 40/lambda_i].
///  - scalar birth laws: upper rhs uses min(b'(0) u, bbar(u)), lower rhs
///    b'(0) l - L1 u^2 (checked where the lower bound is positive);
///  - slotwise monotone systems: increasing slots at the bound being tested,
///    decreasing slots at 0 (upper) or at the upper bound (lower);
///  - anything else falls back to random piecewise-linear psi.
BoundsReport verify_bounds(const BoundPair& pair, const SystemModel& model, const std::vector<Kernel>& kernels,
                           double c, const VerifyOptions& options = {});

}  // namespace idewave
