#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace idewave {

/// Scalar birth law v -> b(v) on [0, vbar] with its fixed points and
/// envelope constants.
struct ScalarBirth {
  std::string name;
  std::function<double(double)> b;
  double bprime0 = 0.0;
  double vstar = 0.0;  // positive fixed point
  double vbar = 0.0;   // upper end of the invariant interval
  double v1 = 0.0;     // fixed point of the lower envelope
  double v2 = 0.0;     // largest fixed point of the upper envelope
  double L1 = 0.0;     // b'(0) v - b(v) <= L1 v^2
};

/// Running sup/inf envelopes of a birth law, sampled on a uniform grid with
/// the interior extrema refined by golden section.
class Envelopes {
 public:
  Envelopes(const ScalarBirth& birth, std::size_t n = 10000);

  /// sup of b over (0, v)
  double upper(double v) const;
  /// inf of b over (v, vbar)
  double lower(double v) const;

  double v1() const { return v1_; }
  double v2() const { return v2_; }
  const std::vector<double>& grid() const { return grid_; }

 private:
  std::function<double(double)> b_;
  double vbar_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> prefix_max_;
  std::vector<double> suffix_min_;
  std::vector<std::pair<double, double>> maxima_;
  std::vector<std::pair<double, double>> minima_;
  double v1_ = 0.0;
  double v2_ = 0.0;
};

/// Builds a ScalarBirth from b, b'(0) and vbar: v* by bisection, v1/v2 from
/// the envelopes and L1 as 1.1 x the sampled max of (b'(0) v - b(v)) / v^2.
ScalarBirth make_birth(std::string name, std::function<double(double)> b, double bprime0, double vbar);

/// b(v) = 3 v (1 - v) with its exact constants.
ScalarBirth logistic_birth();

/// b(v) = (1 + d) v / (1 + d v) on [0, 1].
ScalarBirth kot_birth(double d);

/// Exact constants of the logistic law in rational arithmetic.
struct LogisticRationals {
  using Q = boost::rational<std::int64_t>;
  Q vstar;
  Q v2;
  Q v1;
  static Q b(Q v) { return Q(3) * v * (Q(1) - v); }
};
LogisticRationals logistic_rationals();

struct BirthCheck {
  double fixed_point_error = 0.0;  // |b(v*) - v*|
  double max_above_linear = 0.0;   // max(b - b'(0) v, 0)
  double min_value = 0.0;          // min b on (0, vbar]
  double max_gap_ratio = 0.0;      // max (b'(0) v - b) / (L1 v^2)
  double min_gap = 0.0;            // min (b'(0) v - b)
  bool ok = false;
};
/// Samples the birth-law conditions on a 10^3-point grid of (0, vbar].
BirthCheck check_birth(const ScalarBirth& birth, std::size_t n = 1000);

enum class SlotEffect { none, increasing, decreasing, mixed };

/// Coefficients of the m-species delayed competition family
///   P_i = (1 + d_i) u_i^n / (1 + d_i (u_i^n + sum_j e_j^i u_i^{n-j}
///                                     + sum_{l != i, j} f_{lj}^i u_l^{n-j+1})).
struct CompetitionCoefficients {
  std::size_t m = 0;
  std::size_t tau = 0;
  std::vector<double> d;  // m
  std::vector<double> e;  // m x (tau - 1)
  std::vector<double> f;  // m x m x tau, diagonal blocks unused

  double& e_at(std::size_t i, std::size_t j) { return e[i * (tau - 1) + (j - 1)]; }
  double e_at(std::size_t i, std::size_t j) const { return e[i * (tau - 1) + (j - 1)]; }
  double& f_at(std::size_t i, std::size_t l, std::size_t j) { return f[(i * m + l) * tau + (j - 1)]; }
  double f_at(std::size_t i, std::size_t l, std::size_t j) const { return f[(i * m + l) * tau + (j - 1)]; }
  double own_delay_sum(std::size_t i) const;
  double cross_sum(std::size_t i, std::size_t l) const;
  /// Total crowding of species i: sum_j e_j^i + sum_{l != i, j} f_{lj}^i.
  double crowding(std::size_t i) const;
};

/// A recurrence u_{n+1}^i = P_i[u_{n-tau+1}^1, ..., u_n^m]. States are flat
/// m x tau blocks indexed l * tau + j with j = 0 the oldest generation and
/// j = tau - 1 the newest.
struct SystemModel {
  std::string name;
  std::size_t m = 1;
  std::size_t tau = 1;
  std::vector<double> caps;
  std::vector<double> steady;
  std::vector<double> growth;  // linearized growth at 0 per species
  std::function<void(const double* state, double* out)> map;
  /// effects[i * m * tau + l * tau + j]: dependence of P_i on slot (l, j).
  std::vector<SlotEffect> effects;
  std::optional<ScalarBirth> birth;
  std::optional<CompetitionCoefficients> competition;
  /// Whether a contracting rectangle construction is available.
  bool rectangle_ready = false;
  double lipschitz = 0.0;
  std::map<std::string, double> params;

  std::size_t slots() const { return m * tau; }
  std::size_t slot(std::size_t l, std::size_t j) const { return l * tau + j; }
  SlotEffect effect(std::size_t i, std::size_t l, std::size_t j) const {
    return effects[i * slots() + slot(l, j)];
  }
  std::vector<double> apply(const std::vector<double>& state) const;
  /// State block with every generation of species l equal to u[l].
  std::vector<double> constant_state(const std::vector<double>& u) const;
};

SystemModel logistic_model();
SystemModel scalar_model(const ScalarBirth& birth);
SystemModel delayed_bh_model(double d, double a);
SystemModel competition2_model(double d1, double d2, double a1, double a2, double b1, double b2);
SystemModel mspecies_model(CompetitionCoefficients coeffs);

/// Wraps an arbitrary map; effects default to mixed, lipschitz is sampled.
SystemModel custom_model(std::string name, std::size_t m, std::size_t tau, std::vector<double> caps,
                         std::vector<double> steady, std::vector<double> growth,
                         std::function<void(const double*, double*)> map, std::uint64_t seed = 7);

/// Solves E_i (1 + sum_j e_j^i) + sum_{l != i} (sum_j f_{lj}^i) E_l = 1.
std::vector<double> competition_steady_state(const CompetitionCoefficients& coeffs);

struct LipschitzEstimate {
  double sampled = 0.0;  // max |dP|_inf / |d arg|_1 over the sampled pairs
  double bound = 0.0;    // 1.5 x sampled
};
LipschitzEstimate lipschitz_bound(const SystemModel& model, std::uint64_t seed = 7,
                                  std::size_t pairs = 100000);

struct ModelCheck {
  double box_excess = 0.0;      // max amount P leaves [0, M] by
  double steady_residual = 0.0; // |P(E) - E|_inf
  double zero_residual = 0.0;   // |P(0)|_inf
  bool steady_positive = false; // 0 << E <= M
  bool ok = false;
};
ModelCheck check_model(const SystemModel& model, std::uint64_t seed = 11, std::size_t samples = 10000);

/// Dependence pattern of every P_i on every slot, from finite differences at
/// random points of the box [lo, hi].
std::vector<SlotEffect> sampled_effects(const SystemModel& model, const std::vector<double>& lo,
                                        const std::vector<double>& hi, std::uint64_t seed = 13,
                                        std::size_t samples = 2000);

/// True when every slot dependence is none, increasing or decreasing.
bool slotwise_monotone(const std::vector<SlotEffect>& effects);

}  // namespace idewave
