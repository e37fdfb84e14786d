#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace idewave {

enum class KernelFamily { gaussian, uniform, triangular, table };

/// Symmetric probability density on the line with a finite moment-generating
/// function for every lambda >= 0. Only light-tailed (Gaussian) and compactly
/// supported families are admitted.
class Kernel {
 public:
  static Kernel gaussian(double sigma);
  static Kernel uniform(double halfwidth);
  static Kernel triangular(double halfwidth);

  /// Density samples at x_k = (k - n/2) * spacing for an odd number n of
  /// samples, interpolated linearly and zero outside. Samples must be
  /// nonnegative and even-symmetric; they are rescaled to unit mass.
  static Kernel table(std::vector<double> samples, double spacing);

  /// Two-column CSV (x, density) on a uniform grid symmetric about 0.
  static Kernel from_csv(const std::filesystem::path& path);

  /// Builds a kernel from a family name and its parameters, e.g.
  /// ("gaussian", {{"sigma", 1.0}}). Heavy-tailed families (laplace,
  /// cauchy, exponential, ...) are rejected.
  static Kernel make(std::string_view family, const std::map<std::string, double>& params);

  KernelFamily family() const { return family_; }
  std::string_view family_name() const;

  /// Characteristic length: sigma for Gaussians, the half-width otherwise.
  double length() const { return length_; }
  double stddev() const;
  /// Half-width of the support; +inf for the Gaussian.
  double support() const;

  double density(double x) const;
  /// Integral of the density over [a, b].
  double mass(double a, double b) const;
  /// Mass outside [-r, r].
  double tail_mass(double r) const;

  /// M(lambda) = integral of e^{lambda y} k(y) dy, in closed form.
  double mgf(double lambda) const;
  /// ln M(lambda), free of overflow for large lambda.
  double log_mgf(double lambda) const;

  const std::vector<double>& samples() const { return samples_; }
  double spacing() const { return spacing_; }

 private:
  Kernel(KernelFamily family, double length) : family_(family), length_(length) {}

  KernelFamily family_;
  double length_;
  std::vector<double> samples_;
  double spacing_ = 0.0;
};

/// M(lambda) by composite trapezoid on the support, halving the mesh until
/// successive values agree to rel_tol. Independent of Kernel::mgf.
double mgf_by_quadrature(const Kernel& kernel, double lambda, double rel_tol = 1e-12);

/// Total mass by the same trapezoid scheme.
double mass_by_quadrature(const Kernel& kernel, double rel_tol = 1e-12);

/// Kernel realized on a uniform mesh: weights[j] sits at (j - half_width()) * h.
struct DiscreteKernel {
  std::vector<double> weights;
  double h = 0.0;
  double radius = 0.0;  // half_width() * h

  std::size_t half_width() const { return weights.size() / 2; }
  double node(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(half_width())) * h;
  }
  /// sum_j w_j e^{lambda x_j}
  double mgf(double lambda) const;
  /// ln M(lambda), free of overflow for large lambda.
  double log_mgf(double lambda) const;
};

/// Truncates where the omitted tail mass drops below mass_tol and renormalizes
/// to unit mass. Gaussian weights are point samples (trapezoid rule), compact
/// families use cell averages. Throws NumericalError when more than
/// max_half_width cells per side would be needed.
DiscreteKernel discretize(const Kernel& kernel, double h, double mass_tol = 1e-12,
                          std::size_t max_half_width = std::size_t{1} << 22);

/// Positive-weight quadrature rule for integrals against the kernel, nodes
/// on a uniform mesh of spacing <= h. Gaussians use the trapezoid rule,
/// compact families composite Simpson with panel breaks at the kinks of the
/// density. Accurate to O(h^4) for smooth integrands, unlike discretize().
DiscreteKernel quadrature_rule(const Kernel& kernel, double h);

}  // namespace idewave
