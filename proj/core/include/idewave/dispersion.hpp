#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "idewave/kernels.hpp"
#include "idewave/models.hpp"

namespace idewave {

/// growth * e^{-lambda c} * M(lambda)
double char_value(double growth, const Kernel& kernel, double lambda, double c);

struct MinimalSpeed {
  double cmin = 0.0;
  double lambda_star = 0.0;
};

/// inf over lambda > 0 of ln(growth M(lambda)) / lambda, by golden section on
/// a bracket found by doubling.
MinimalSpeed minimal_speed(double growth, const Kernel& kernel);

struct CharRoots {
  double lambda1 = 0.0;
  double lambda2 = 0.0;  // +inf when the characteristic value never returns to 1
};

/// The two positive roots of char_value(lambda, c) = 1 for c above the
/// minimal speed (by more than 1e-8).
CharRoots char_roots(double growth, const Kernel& kernel, double c);

/// Characteristic function of one species.
struct Characteristic {
  double growth = 1.0;
  Kernel kernel;
  double operator()(double lambda, double c) const { return char_value(growth, kernel, lambda, c); }
};

/// Midpoint of (1, U), halved toward 1 until every constraint holds with
/// margin 1e-6. U = min(2, lambda2_i / lambda1_i) and, with two or more
/// species, also (lambda1_i + lambda1_l) / lambda1_i for l != i.
double select_eta(const std::vector<Characteristic>& chars, const std::vector<CharRoots>& roots, double c);

/// q = 1 + L1 Delta(2 lambda1) / (1 - Delta(eta lambda1)) for a scalar birth law.
double scalar_lower_coeff(const Characteristic& ch, double L1, double lambda1, double eta, double c);

/// N = max_i [d_i (1 + sum_j e_j^i) Lambda_i(2 lambda_i)
///            + d_i sum_{l != i} (sum_j f_lj^i) Lambda_i(lambda_l + lambda_i)]
///           / (1 - Lambda_i(eta lambda_i)) + 1
double competition_lower_coeff(const CompetitionCoefficients& coeffs, const std::vector<Characteristic>& chars,
                               const std::vector<double>& lambda1, double eta, double c);

struct SpeciesDispersion {
  double growth = 0.0;
  double cmin = 0.0;
  double lambda_star = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct DispersionResult {
  double c = 0.0;
  double cmin = 0.0;          // max over species
  std::size_t critical = 0;   // species attaining cmin
  std::vector<SpeciesDispersion> species;
  double eta = 0.0;
  double q = 0.0;             // lower-solution coefficient (q or N)
  double mu = 0.0;            // weighted-norm exponent

  double lambda1_min() const;
  std::vector<double> lambda1() const;
};

/// One kernel per species; a single kernel is shared by all species.
std::vector<Kernel> expand_kernels(const SystemModel& model, const std::vector<Kernel>& kernels);
std::vector<Characteristic> characteristics(const SystemModel& model, const std::vector<Kernel>& kernels);

/// Minimal speed of the system: the max over species.
double system_minimal_speed(const SystemModel& model, const std::vector<Kernel>& kernels);

/// Full dispersion data at speed c (default cmin + 0.5).
DispersionResult analyze(const SystemModel& model, const std::vector<Kernel>& kernels,
                         std::optional<double> c = std::nullopt);

}  // namespace idewave
