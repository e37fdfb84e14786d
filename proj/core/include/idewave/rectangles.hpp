#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "idewave/models.hpp"

namespace idewave {

/// s -> [r(s), t(s)], s in [0, 1], shrinking to the steady state E at s = 1.
struct Rectangle {
  std::string name;
  double eps = 0.0;
  std::vector<double> E;
  std::function<std::vector<double>(double)> r;
  std::function<std::vector<double>(double)> t;

  std::size_t species() const { return E.size(); }
  /// Whether every generation of the state block lies in the slice at s.
  bool contains(const SystemModel& model, const std::vector<double>& state, double s, double slack = 1e-12) const;
  /// Largest s whose slice holds the state, or nullopt if not even s = 0 does.
  std::optional<double> level(const SystemModel& model, const std::vector<double>& state) const;
};

/// r(s) = 9/16 + 5 s / 48, t(s) = b(r) + eps (b(b(r)) - r) for b(v) = 3 v (1 - v).
/// Throws NumericalError when t leaves (2/3, 3/4) for some s < 1.
Rectangle logistic_rectangle(double eps = 0.1);

/// Largest eps with (total crowding_i) (1 + eps) < 1 for all i (may be +inf).
double competition_eps_limit(const SystemModel& model);

/// r_i(s) = s E_i, t_i(s) = s E_i + (1 + eps)(1 - s). Default eps: half the
/// admissible limit, capped at 1.
Rectangle competition_rectangle(const SystemModel& model, std::optional<double> eps = std::nullopt);

struct RectangleReport {
  bool continuity = false;
  bool monotone = false;
  bool endpoints = false;
  bool enlarged_box = false; // endpoints via invariance of [0, T(0)] when T(0) exceeds the caps
  bool contraction = false;  // evaluated only if the three checks above hold
  bool certifying = false;   // corner states are extremal on the rectangle
  double min_margin = 0.0;   // smallest relative strict margin of the contraction
  std::size_t n_checked = 0;
  double witness_s = 0.0;
  std::vector<double> witness_state;
  std::string message;
  bool pass = false;
};

RectangleReport verify_rectangle(const SystemModel& model, const Rectangle& rect, std::size_t n_s = 99,
                                 std::size_t n_box = 1000, std::uint64_t seed = 5);

struct Trajectory {
  std::vector<std::vector<double>> states;  // newest generation per step, states[0] = initial newest
  std::vector<double> distance;             // |u_n - E|_inf per step
  std::optional<double> start_level;        // slice level of the initial history
  std::vector<double> levels;               // running max of the slice levels passed
  bool certified = false;                   // initial history inside a slice with s > 0
  double final_distance = 0.0;
  /// First step with distance <= tol, if any.
  std::optional<std::size_t> steps_to(double tol) const;
};

/// Iterates u_{n+1} = P[u_{n-tau+1}, ..., u_n] from a flat m x tau history.
/// With a rectangle, leaving the starting slice throws NumericalError.
Trajectory iterate_difference(const SystemModel& model, const std::vector<double>& history, std::size_t n_steps,
                              const Rectangle* rect = nullptr);

}  // namespace idewave
