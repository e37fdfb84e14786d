#include "idewave/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "idewave/error.hpp"

namespace idewave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper tail P(X > x) of N(0, sigma^2), accurate far into the tail.
double gaussian_upper_tail(double x, double sigma) {
  return 0.5 * std::erfc(x / (sigma * std::numbers::sqrt2));
}

// (e^z - 1)/z and (e^z (z - 1) + 1)/z^2, i.e. the integrals of e^{zt} and
// t e^{zt} over [0, 1].
double exp_mean(double z) {
  if (std::abs(z) < 1e-3) return 1.0 + z * (0.5 + z * (1.0 / 6 + z * (1.0 / 24 + z / 120)));
  return std::expm1(z) / z;
}

double exp_first_moment(double z) {
  if (std::abs(z) < 1e-3) return 0.5 + z * (1.0 / 3 + z * (1.0 / 8 + z * (1.0 / 30 + z / 144)));
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

double require_param(const std::map<std::string, double>& params, const std::string& family,
                     const std::string& key) {
  if (params.size() != 1 || !params.contains(key)) {
    throw InputError("kernel family '" + family + "' takes exactly one parameter '" + key + "'");
  }
  return params.at(key);
}

}  // namespace

Kernel Kernel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("gaussian sigma must be positive");
  return Kernel(KernelFamily::gaussian, sigma);
}

Kernel Kernel::uniform(double halfwidth) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
    throw InputError("uniform halfwidth must be positive");
  }
  return Kernel(KernelFamily::uniform, halfwidth);
}

Kernel Kernel::triangular(double halfwidth) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
    throw InputError("triangular halfwidth must be positive");
  }
  return Kernel(KernelFamily::triangular, halfwidth);
}

Kernel Kernel::table(std::vector<double> samples, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InputError("table spacing must be positive");
  if (samples.size() < 3 || samples.size() % 2 == 0) {
    throw InputError("table kernel needs an odd number (>= 3) of samples centred on 0");
  }
  const double peak = *std::max_element(samples.begin(), samples.end());
  for (double s : samples) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("table kernel samples must be nonnegative");
  }
  if (!(peak > 0.0)) throw InputError("table kernel has zero mass");
  const std::size_t n = samples.size();
  for (std::size_t k = 0; k < n / 2; ++k) {
    if (std::abs(samples[k] - samples[n - 1 - k]) > 1e-12 * peak) {
      throw InputError("table kernel is not symmetric: k(x) != k(-x)");
    }
    samples[n - 1 - k] = samples[k];
  }
  // Mass of the piecewise-linear interpolant.
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mass = spacing * (sum - 0.5 * (samples.front() + samples.back()));
  for (double& s : samples) s /= mass;

  Kernel k(KernelFamily::table, spacing * static_cast<double>(n / 2));
  k.samples_ = std::move(samples);
  k.spacing_ = spacing;
  return k;
}

Kernel Kernel::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open kernel table '" + path.string() + "'");
  std::vector<double> xs;
  std::vector<double> ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double x = 0.0;
    double y = 0.0;
    if (!(fields >> x >> y)) {
      if (xs.empty()) continue;  // header row
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() < 3) throw InputError(path.string() + ": table kernel needs at least 3 rows");
  const double spacing = xs[1] - xs[0];
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (std::abs((xs[k] - xs[k - 1]) - spacing) > 1e-9 * std::abs(spacing)) {
      throw InputError(path.string() + ":" + std::to_string(k + 1) + ": x column is not uniformly spaced");
    }
  }
  if (std::abs(xs.front() + xs.back()) > 1e-9 * std::abs(spacing)) {
    throw InputError(path.string() + ": x column is not symmetric about 0");
  }
  return table(std::move(ys), spacing);
}

Kernel Kernel::make(std::string_view family, const std::map<std::string, double>& params) {
  const std::string name = lower(family);
  if (name == "gaussian" || name == "normal") return gaussian(require_param(params, name, "sigma"));
  if (name == "uniform") return uniform(require_param(params, name, "halfwidth"));
  if (name == "triangular") return triangular(require_param(params, name, "halfwidth"));
  static const std::set<std::string> heavy = {"laplace", "cauchy", "exponential", "student_t",
                                              "lognormal", "pareto", "levy"};
  if (heavy.contains(name)) {
    throw InputError("kernel family '" + name +
                     "': MGF not finite for all lambda >= 0 (only light-tailed or compactly "
                     "supported kernels are admitted)");
  }
  throw InputError("unknown kernel family '" + name + "'");
}

std::string_view Kernel::family_name() const {
  switch (family_) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::uniform: return "uniform";
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::table: return "table";
  }
  return "unknown";
}

double Kernel::support() const { return family_ == KernelFamily::gaussian ? kInf : length_; }

double Kernel::stddev() const {
  switch (family_) {
    case KernelFamily::gaussian: return length_;
    case KernelFamily::uniform: return length_ / std::sqrt(3.0);
    case KernelFamily::triangular: return length_ / std::sqrt(6.0);
    case KernelFamily::table: {
      // Simpson is exact for x^2 times a linear segment.
      const double half = static_cast<double>(samples_.size() / 2);
      double second = 0.0;
      for (std::size_t k = 0; k + 1 < samples_.size(); ++k) {
        const double x0 = (static_cast<double>(k) - half) * spacing_;
        const double x1 = x0 + spacing_;
        const double xm = 0.5 * (x0 + x1);
        const double ym = 0.5 * (samples_[k] + samples_[k + 1]);
        second += spacing_ / 6.0 *
                  (x0 * x0 * samples_[k] + 4.0 * xm * xm * ym + x1 * x1 * samples_[k + 1]);
      }
      return std::sqrt(second);
    }
  }
  return length_;
}

double Kernel::density(double x) const {
  const double ax = std::abs(x);
  switch (family_) {
    case KernelFamily::gaussian:
      return std::exp(-0.5 * (x / length_) * (x / length_)) / (length_ * std::sqrt(2.0 * std::numbers::pi));
    case KernelFamily::uniform: return ax <= length_ ? 0.5 / length_ : 0.0;
    case KernelFamily::triangular: return ax < length_ ? (1.0 - ax / length_) / length_ : 0.0;
    case KernelFamily::table: {
      if (ax > length_) return 0.0;
      const double pos = ax / spacing_ + static_cast<double>(samples_.size() / 2);
      const auto k = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
      const double t = pos - static_cast<double>(k);
      return samples_[k] * (1.0 - t) + samples_[k + 1] * t;
    }
  }
  return 0.0;
}

double Kernel::mass(double a, double b) const {
  if (b <= a) return 0.0;
  switch (family_) {
    case KernelFamily::gaussian:
      if (a >= 0.0) return gaussian_upper_tail(a, length_) - gaussian_upper_tail(b, length_);
      if (b <= 0.0) return gaussian_upper_tail(-b, length_) - gaussian_upper_tail(-a, length_);
      return 1.0 - gaussian_upper_tail(-a, length_) - gaussian_upper_tail(b, length_);
    case KernelFamily::uniform: {
      const double lo = std::max(a, -length_);
      const double hi = std::min(b, length_);
      return hi > lo ? (hi - lo) * 0.5 / length_ : 0.0;
    }
    case KernelFamily::triangular: {
      const auto cdf = [w = length_](double x) {
        if (x <= -w) return 0.0;
        if (x >= w) return 1.0;
        if (x <= 0.0) return (x + w) * (x + w) / (2.0 * w * w);
        return 1.0 - (w - x) * (w - x) / (2.0 * w * w);
      };
      return cdf(b) - cdf(a);
    }
    case KernelFamily::table: {
      const double lo = std::max(a, -length_);
      const double hi = std::min(b, length_);
      if (hi <= lo) return 0.0;
      const double half = static_cast<double>(samples_.size() / 2);
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < samples_.size(); ++k) {
        const double x0 = (static_cast<double>(k) - half) * spacing_;
        const double u = std::max(lo, x0);
        const double v = std::min(hi, x0 + spacing_);
        if (v <= u) continue;
        const double slope = (samples_[k + 1] - samples_[k]) / spacing_;
        total += (v - u) * (samples_[k] + slope * (0.5 * (u + v) - x0));
      }
      return total;
    }
  }
  return 0.0;
}

double Kernel::tail_mass(double r) const {
  if (r <= 0.0) return 1.0;
  switch (family_) {
    case KernelFamily::gaussian: return std::erfc(r / (length_ * std::numbers::sqrt2));
    case KernelFamily::uniform: return r >= length_ ? 0.0 : (length_ - r) / length_;
    case KernelFamily::triangular: return r >= length_ ? 0.0 : (length_ - r) * (length_ - r) / (length_ * length_);
    case KernelFamily::table: return r >= length_ ? 0.0 : std::max(0.0, 1.0 - mass(-r, r));
  }
  return 0.0;
}

double Kernel::mgf(double lambda) const {
  if (lambda < 0.0) throw InputError("mgf requires lambda >= 0");
  switch (family_) {
    case KernelFamily::gaussian: return std::exp(0.5 * lambda * lambda * length_ * length_);
    case KernelFamily::uniform: {
      const double z = lambda * length_;
      if (z < 1e-3) return 1.0 + z * z * (1.0 / 6 + z * z / 120);
      return std::sinh(z) / z;
    }
    case KernelFamily::triangular: {
      const double z = lambda * length_;
      if (z < 1e-3) return 1.0 + z * z * (1.0 / 12 + z * z / 360);
      return 2.0 * (std::cosh(z) - 1.0) / (z * z);
    }
    case KernelFamily::table: {
      const double half = static_cast<double>(samples_.size() / 2);
      const double z = lambda * spacing_;
      const double a = exp_mean(z);
      const double b = exp_first_moment(z);
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < samples_.size(); ++k) {
        const double x0 = (static_cast<double>(k) - half) * spacing_;
        total += std::exp(lambda * x0) * (samples_[k] * a + (samples_[k + 1] - samples_[k]) * b);
      }
      return spacing_ * total;
    }
  }
  return kInf;
}

double Kernel::log_mgf(double lambda) const {
  if (lambda < 0.0) throw InputError("mgf requires lambda >= 0");
  const double z = lambda * length_;
  switch (family_) {
    case KernelFamily::gaussian: return 0.5 * z * z;
    case KernelFamily::uniform:
      if (z < 30.0) return std::log(mgf(lambda));
      return z - std::log(2.0 * z) + std::log1p(-std::exp(-2.0 * z));
    case KernelFamily::triangular:
      if (z < 30.0) return std::log(mgf(lambda));
      return z + 2.0 * std::log1p(-std::exp(-z)) - 2.0 * std::log(z);
    case KernelFamily::table: {
      // Factor out e^{lambda * support} before summing the segments.
      const double half = static_cast<double>(samples_.size() / 2);
      const double zs = lambda * spacing_;
      const double a = exp_mean(zs);
      const double b = exp_first_moment(zs);
      double total = 0.0;
      for (std::size_t k = 0; k + 1 < samples_.size(); ++k) {
        const double x0 = (static_cast<double>(k) - half) * spacing_;
        total += std::exp(lambda * (x0 - length_)) * (samples_[k] * a + (samples_[k + 1] - samples_[k]) * b);
      }
      return lambda * length_ + std::log(spacing_ * total);
    }
  }
  return kInf;
}

double mgf_by_quadrature(const Kernel& kernel, double lambda, double rel_tol) {
  if (lambda < 0.0) throw InputError("mgf requires lambda >= 0");
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 16;
  if (kernel.family() == KernelFamily::gaussian) {
    // Integrand is a Gaussian bump centred at lambda sigma^2.
    const double s = kernel.length();
    lo = lambda * s * s - 12.0 * s;
    hi = lambda * s * s + 12.0 * s;
  } else {
    lo = -kernel.support();
    hi = kernel.support();
    if (kernel.family() == KernelFamily::table) n = kernel.samples().size() - 1;
  }
  const auto f = [&](double y) { return std::exp(lambda * y) * kernel.density(y); };

  double step = (hi - lo) / static_cast<double>(n);
  double sum = 0.5 * (f(lo) + f(hi));
  for (std::size_t k = 1; k < n; ++k) sum += f(lo + static_cast<double>(k) * step);
  double estimate = sum * step;
  constexpr std::size_t kMaxIntervals = std::size_t{1} << 26;
  while (n < kMaxIntervals) {
    // Add midpoints of the current mesh.
    double mid = 0.0;
    for (std::size_t k = 0; k < n; ++k) mid += f(lo + (static_cast<double>(k) + 0.5) * step);
    sum += mid;
    n *= 2;
    step *= 0.5;
    const double refined = sum * step;
    const bool done = std::abs(refined - estimate) <= rel_tol * std::abs(refined);
    estimate = refined;
    if (done) break;
  }
  return estimate;
}

double mass_by_quadrature(const Kernel& kernel, double rel_tol) {
  return mgf_by_quadrature(kernel, 0.0, rel_tol);
}

double DiscreteKernel::mgf(double lambda) const {
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) total += weights[j] * std::exp(lambda * node(j));
  return total;
}

DiscreteKernel discretize(const Kernel& kernel, double h, double mass_tol, std::size_t max_half_width) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("discretize: h must be positive");
  if (!(mass_tol > 0.0 && mass_tol < 1e-3)) throw InputError("discretize: mass_tol must lie in (0, 1e-3)");

  DiscreteKernel out;
  out.h = h;

  if (kernel.family() == KernelFamily::table &&
      std::abs(h - kernel.spacing()) <= 1e-12 * kernel.spacing()) {
    out.weights = kernel.samples();
  } else {
    // Smallest K whose cells [-(K+1/2)h, (K+1/2)h] hold all but mass_tol.
    const auto omitted = [&](std::size_t k) { return kernel.tail_mass((static_cast<double>(k) + 0.5) * h); };
    std::size_t hi_k = 1;
    while (omitted(hi_k) >= mass_tol) {
      if (hi_k > max_half_width) throw NumericalError("kernel too heavy-tailed for grid");
      hi_k *= 2;
    }
    std::size_t lo_k = 0;
    if (omitted(0) < mass_tol) hi_k = 0;
    while (hi_k > lo_k + 1) {
      const std::size_t mid = (lo_k + hi_k) / 2;
      (omitted(mid) < mass_tol ? hi_k : lo_k) = mid;
    }
    const std::size_t half = hi_k;
    if (half > max_half_width) throw NumericalError("kernel too heavy-tailed for grid");

    out.weights.assign(2 * half + 1, 0.0);
    for (std::size_t t = 0; t <= half; ++t) {
      const double x = static_cast<double>(t) * h;
      const double w = kernel.family() == KernelFamily::gaussian ? kernel.density(x) * h
                                                                 : kernel.mass(x - 0.5 * h, x + 0.5 * h);
      out.weights[half + t] = w;
      out.weights[half - t] = w;
    }
  }

  double sum = 0.0;
  for (double w : out.weights) sum += w;
  for (double& w : out.weights) w /= sum;
  // Restore exact mirror symmetry after the rounding of the division.
  const std::size_t n = out.weights.size();
  for (std::size_t j = 0; j < n / 2; ++j) out.weights[n - 1 - j] = out.weights[j];
  out.radius = static_cast<double>(out.half_width()) * h;
  return out;
}

DiscreteKernel quadrature_rule(const Kernel& kernel, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("quadrature_rule: h must be positive");
  if (kernel.family() == KernelFamily::gaussian) return discretize(kernel, h, 1e-15);

  // Per side: n nodes-intervals, n even, with table nodes on panel breaks.
  std::size_t n = 0;
  double step = 0.0;
  if (kernel.family() == KernelFamily::table) {
    auto sub = static_cast<std::size_t>(std::ceil(kernel.spacing() / h));
    sub += sub % 2;
    step = kernel.spacing() / static_cast<double>(sub);
    n = (kernel.samples().size() / 2) * sub;
  } else {
    n = static_cast<std::size_t>(std::ceil(kernel.support() / h));
    n += n % 2;
    step = kernel.support() / static_cast<double>(n);
  }
  DiscreteKernel out;
  out.h = step;
  out.weights.assign(2 * n + 1, 0.0);
  for (std::size_t t = 0; t <= n; ++t) {
    double coeff = (t == 0 || t == n) ? 1.0 : (t % 2 == 1 ? 4.0 : 2.0);
    if (t == 0) coeff = 2.0;  // shared end of the two half-rules
    const double w = coeff * step / 3.0 * kernel.density(static_cast<double>(t) * step);
    out.weights[n + t] = w;
    out.weights[n - t] = w;
  }
  double sum = 0.0;
  for (double w : out.weights) sum += w;
  for (double& w : out.weights) w /= sum;
  for (std::size_t j = 0; j < n; ++j) out.weights[2 * n - j] = out.weights[j];
  out.radius = static_cast<double>(n) * step;
  return out;
}

}  // namespace idewave
