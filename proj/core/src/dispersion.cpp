#include "idewave/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idewave/error.hpp"
#include "numerics.hpp"

namespace idewave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln of the characteristic value
double log_char(double growth, const Kernel& kernel, double lambda, double c) {
  return std::log(growth) + kernel.log_mgf(lambda) - lambda * c;
}

}  // namespace

double char_value(double growth, const Kernel& kernel, double lambda, double c) {
  if (!(growth > 0.0)) throw InputError("growth must be positive");
  return std::exp(log_char(growth, kernel, lambda, c));
}

MinimalSpeed minimal_speed(double growth, const Kernel& kernel) {
  if (!(growth > 1.0)) throw InputError("no linear spreading speed (b'(0) <= 1)");
  const double lg = std::log(growth);
  const auto g = [&](double lambda) { return (lg + kernel.log_mgf(lambda)) / lambda; };
  double m = 1.0 / kernel.stddev();
  for (int it = 0; it < 200 && g(2.0 * m) < g(m); ++it) m *= 2.0;
  for (int it = 0; it < 200 && g(0.5 * m) < g(m); ++it) m *= 0.5;
  const double lambda_star = detail::golden_section(g, 0.5 * m, 2.0 * m, 1e-11);
  return {g(lambda_star), lambda_star};
}

CharRoots char_roots(double growth, const Kernel& kernel, double c) {
  const MinimalSpeed ms = minimal_speed(growth, kernel);
  if (!(c - ms.cmin > 1e-8)) throw InputError("no real roots: c below minimal speed");
  const auto h = [&](double lambda) { return log_char(growth, kernel, lambda, c); };
  const double tol = 1e-14 * (1.0 + ms.lambda_star);
  CharRoots out;
  out.lambda1 = detail::bisect(h, 0.0, ms.lambda_star, tol);
  if (c >= kernel.support()) {
    out.lambda2 = kInf;
    return out;
  }
  double hi = 2.0 * ms.lambda_star;
  int it = 0;
  while (h(hi) < 0.0) {
    if (++it > 200) {
      out.lambda2 = kInf;
      return out;
    }
    hi *= 2.0;
  }
  out.lambda2 = detail::bisect(h, ms.lambda_star, hi, tol * (1.0 + hi));
  return out;
}

double select_eta(const std::vector<Characteristic>& chars, const std::vector<CharRoots>& roots, double c) {
  if (chars.size() != roots.size() || chars.empty()) throw InputError("select_eta: one root pair per species");
  double upper = 2.0;
  for (const auto& r : roots) upper = std::min(upper, r.lambda2 / r.lambda1);
  if (roots.size() >= 2) {
    for (std::size_t i = 0; i < roots.size(); ++i) {
      for (std::size_t l = 0; l < roots.size(); ++l) {
        if (l != i) upper = std::min(upper, (roots[i].lambda1 + roots[l].lambda1) / roots[i].lambda1);
      }
    }
  }
  double eta = 0.5 * (1.0 + upper);
  for (int it = 0; it <= 60; ++it) {
    bool ok = upper - eta > 1e-6;
    for (std::size_t i = 0; ok && i < chars.size(); ++i) ok = chars[i](eta * roots[i].lambda1, c) < 1.0;
    if (ok) return eta;
    eta = 1.0 + 0.5 * (eta - 1.0);
  }
  throw NumericalError("eta window numerically empty");
}

double scalar_lower_coeff(const Characteristic& ch, double L1, double lambda1, double eta, double c) {
  const double den = 1.0 - ch(eta * lambda1, c);
  if (!(den > 0.0)) throw NumericalError("lower coefficient: 1 - Delta(eta lambda1) is not positive");
  return 1.0 + L1 * ch(2.0 * lambda1, c) / den;
}

double competition_lower_coeff(const CompetitionCoefficients& coeffs, const std::vector<Characteristic>& chars,
                               const std::vector<double>& lambda1, double eta, double c) {
  double best = 1.0;
  for (std::size_t i = 0; i < coeffs.m; ++i) {
    const double li = lambda1[i];
    const double den = 1.0 - chars[i](eta * li, c);
    if (!(den > 0.0)) throw NumericalError("lower coefficient: 1 - Lambda_i(eta lambda_i) is not positive");
    double num = coeffs.d[i] * (1.0 + coeffs.own_delay_sum(i)) * chars[i](2.0 * li, c);
    for (std::size_t l = 0; l < coeffs.m; ++l) {
      const double cross = coeffs.cross_sum(i, l);
      if (l != i && cross > 0.0) num += coeffs.d[i] * cross * chars[i](lambda1[l] + li, c);
    }
    best = std::max(best, num / den + 1.0);
  }
  return best;
}

double DispersionResult::lambda1_min() const {
  double best = kInf;
  for (const auto& s : species) best = std::min(best, s.lambda1);
  return best;
}

std::vector<double> DispersionResult::lambda1() const {
  std::vector<double> out;
  for (const auto& s : species) out.push_back(s.lambda1);
  return out;
}

std::vector<Kernel> expand_kernels(const SystemModel& model, const std::vector<Kernel>& kernels) {
  if (kernels.size() == model.m) return kernels;
  if (kernels.size() == 1) return std::vector<Kernel>(model.m, kernels.front());
  throw InputError("need one kernel per species or a single shared kernel");
}

std::vector<Characteristic> characteristics(const SystemModel& model, const std::vector<Kernel>& kernels) {
  const auto ks = expand_kernels(model, kernels);
  std::vector<Characteristic> out;
  for (std::size_t i = 0; i < model.m; ++i) out.push_back({model.growth[i], ks[i]});
  return out;
}

double system_minimal_speed(const SystemModel& model, const std::vector<Kernel>& kernels) {
  double best = 0.0;
  for (const auto& ch : characteristics(model, kernels)) best = std::max(best, minimal_speed(ch.growth, ch.kernel).cmin);
  return best;
}

DispersionResult analyze(const SystemModel& model, const std::vector<Kernel>& kernels, std::optional<double> c) {
  const auto chars = characteristics(model, kernels);
  DispersionResult out;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const MinimalSpeed ms = minimal_speed(chars[i].growth, chars[i].kernel);
    out.species.push_back({chars[i].growth, ms.cmin, ms.lambda_star, 0.0, 0.0});
    if (i == 0 || ms.cmin > out.cmin) {
      out.cmin = ms.cmin;
      out.critical = i;
    }
  }
  out.c = c.value_or(out.cmin + 0.5);
  if (!std::isfinite(out.c) || !(out.c > 0.0)) throw InputError("wave speed must be positive");

  std::vector<CharRoots> roots;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    roots.push_back(char_roots(chars[i].growth, chars[i].kernel, out.c));
    out.species[i].lambda1 = roots.back().lambda1;
    out.species[i].lambda2 = roots.back().lambda2;
  }
  out.eta = select_eta(chars, roots, out.c);
  if (model.birth) {
    out.q = scalar_lower_coeff(chars[0], model.birth->L1, roots[0].lambda1, out.eta, out.c);
  } else if (model.competition) {
    out.q = competition_lower_coeff(*model.competition, chars, out.lambda1(), out.eta, out.c);
  } else {
    throw InputError("model '" + model.name + "' has no lower-solution coefficient");
  }
  out.mu = 0.5 * out.lambda1_min();
  return out;
}

}  // namespace idewave
