#include "idewave/wave_operator.hpp"

#include <algorithm>
#include <cmath>

#include "idewave/error.hpp"
#include "idewave/parallel.hpp"

namespace idewave {

double WaveProfile::eval(std::size_t i, double xi) const {
  const std::vector<double>& v = values[i];
  const double pos = (xi - grid.x0) / grid.h;
  if (pos < 0.0) return left_coeff[i] * std::exp(left_rate[i] * xi);
  if (pos >= static_cast<double>(grid.n - 1)) return pos == static_cast<double>(grid.n - 1) ? v.back() : right_value[i];
  const auto k = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(k);
  return t == 0.0 ? v[k] : v[k] * (1.0 - t) + v[k + 1] * t;
}

void WaveProfile::refresh_tails(bool left) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (left) left_coeff[i] = values[i].front() * std::exp(-left_rate[i] * grid.x0);
    right_value[i] = values[i].back();
  }
}

Grid default_grid(const DispersionResult& disp, const std::vector<Kernel>& kernels, double span, double h) {
  double lambda1 = INFINITY;
  double lambda2 = INFINITY;
  for (const auto& s : disp.species) {
    lambda1 = std::min(lambda1, s.lambda1);
    lambda2 = std::min(lambda2, s.lambda2);
  }
  double sd = INFINITY;
  for (const auto& k : kernels) sd = std::min(sd, k.stddev());
  if (!(span > 0.0)) span = 80.0 / lambda1;
  if (!(h > 0.0)) {
    h = sd / 10.0;
    // lambda2 is +inf for compact kernels once c exceeds the support
    if (std::isfinite(lambda2)) h = std::min(h, 0.02 / lambda2);
  }
  // Align the mesh with the speed so that every shift by c lands on a node.
  const double steps = std::ceil(disp.c / h - 1e-9);
  h = disp.c / steps;
  const auto half = static_cast<std::size_t>(std::round(0.5 * span / h));
  Grid g;
  g.h = h;
  g.n = 2 * half + 1;
  g.x0 = -static_cast<double>(half) * h;
  return g;
}

WaveOperator::WaveOperator(const SystemModel& model, const std::vector<Kernel>& kernels,
                           const DispersionResult& disp, const Grid& grid, ConvolutionMethod method)
    : model_(model), disp_(disp), grid_(grid), c_(disp.c) {
  const auto ks = expand_kernels(model, kernels);
  if (grid_.n < 3 || !(grid_.h > 0.0)) throw InputError("wave grid needs at least 3 nodes and h > 0");
  const double steps = c_ / grid_.h;
  shift_ = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(shift_)) > 1e-9 * steps || shift_ == 0) {
    throw InputError("wave grid spacing must divide the speed c");
  }
  for (const auto& k : ks) {
    DiscreteKernel dk = discretize(k, grid_.h);
    half_.push_back(dk.half_width());
    half_max_ = std::max(half_max_, dk.half_width());
    conv_.emplace_back(std::move(dk.weights), grid_.n, method);
  }
  if (grid_.n <= 2 * half_max_ + model_.tau * shift_) throw InputError("domain too small for kernel radius and delay");
}

WaveOperator::~WaveOperator() = default;
WaveOperator::WaveOperator(WaveOperator&&) noexcept = default;

WaveProfile WaveOperator::sample(const std::function<double(std::size_t, double)>& f) const {
  WaveProfile p;
  p.grid = grid_;
  p.c = c_;
  p.values.assign(model_.m, std::vector<double>(grid_.n));
  for (std::size_t i = 0; i < model_.m; ++i) {
    for (std::size_t k = 0; k < grid_.n; ++k) p.values[i][k] = f(i, grid_.x(k));
  }
  p.left_rate = disp_.lambda1();
  p.left_coeff.assign(model_.m, 0.0);
  p.right_value.assign(model_.m, 0.0);
  p.refresh_tails();
  return p;
}

WaveProfile WaveOperator::constant(const std::vector<double>& value) const {
  WaveProfile p = sample([&](std::size_t i, double) { return value[i]; });
  p.left_rate.assign(model_.m, 0.0);
  p.refresh_tails();
  return p;
}

WaveProfile WaveOperator::from_bound(const BoundPair& pair, bool upper) const {
  WaveProfile p = sample([&](std::size_t i, double xi) { return upper ? pair.upper(i, xi) : pair.lower(i, xi); });
  // both bounds are asymptotic to e^{lambda xi}
  p.left_coeff.assign(model_.m, 1.0);
  return p;
}

WaveProfile WaveOperator::resample(const WaveProfile& profile) const {
  WaveProfile p = sample([&](std::size_t i, double xi) { return profile.eval(i, xi); });
  p.left_rate = profile.left_rate;
  p.refresh_tails();
  return p;
}

WaveProfile WaveOperator::apply(const WaveProfile& profile) const {
  const std::size_t m = model_.m;
  const std::size_t tau = model_.tau;
  const std::size_t n = grid_.n;
  const auto big = static_cast<std::ptrdiff_t>(half_max_);
  const std::size_t len = n + 2 * half_max_;

  // node value of species l at (possibly off-grid) index idx
  const auto value = [&](std::size_t l, std::ptrdiff_t idx) {
    if (idx < 0) return profile.left_coeff[l] * std::exp(profile.left_rate[l] * (grid_.x0 + static_cast<double>(idx) * grid_.h));
    if (idx >= static_cast<std::ptrdiff_t>(n)) return profile.right_value[l];
    return profile.values[l][static_cast<std::size_t>(idx)];
  };

  // G_i at y_p = x_p - c for p = -half_max .. n + half_max - 1
  std::vector<std::vector<double>> g(m, std::vector<double>(len));
  parallel_for(len, [&](std::size_t begin, std::size_t end) {
    std::vector<double> state(model_.slots());
    std::vector<double> out(m);
    for (std::size_t q = begin; q < end; ++q) {
      const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(q) - big;
      for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t j = 0; j < tau; ++j) {
          state[model_.slot(l, j)] = value(l, p - static_cast<std::ptrdiff_t>((tau - j) * shift_));
        }
      }
      model_.map(state.data(), out.data());
      for (std::size_t i = 0; i < m; ++i) g[i][q] = out[i];
    }
  }, 512);

  WaveProfile next = profile;
  for (std::size_t i = 0; i < m; ++i) {
    conv_[i].valid(g[i].data() + (half_max_ - half_[i]), next.values[i].data());
  }
  next.refresh_tails(false);
  return next;
}

namespace {

void residuals(const WaveProfile& a, const WaveProfile& b, double mu, double& res_mu, double& res_sup) {
  res_mu = 0.0;
  res_sup = 0.0;
  for (std::size_t k = 0; k < a.grid.n; ++k) {
    double diff = 0.0;
    for (std::size_t i = 0; i < a.species(); ++i) diff = std::max(diff, std::abs(a.values[i][k] - b.values[i][k]));
    res_sup = std::max(res_sup, diff);
    res_mu = std::max(res_mu, diff * std::exp(-mu * std::abs(a.grid.x(k))));
  }
}

}  // namespace

double WaveOperator::residual_mu(const WaveProfile& profile, double mu) const {
  double rm = 0.0;
  double rs = 0.0;
  residuals(apply(profile), profile, mu, rm, rs);
  return rm;
}

double WaveOperator::residual_sup(const WaveProfile& profile) const {
  double rm = 0.0;
  double rs = 0.0;
  residuals(apply(profile), profile, 0.0, rm, rs);
  return rs;
}

std::pair<WaveProfile, IterationReport> WaveOperator::iterate(WaveProfile start, const BoundPair& pair,
                                                              const IterationOptions& options) const {
  if (pair.species() != model_.m) throw InputError("bound pair does not match the model");
  std::vector<std::vector<double>> lo(model_.m, std::vector<double>(grid_.n));
  std::vector<std::vector<double>> hi(model_.m, std::vector<double>(grid_.n));
  for (std::size_t i = 0; i < model_.m; ++i) {
    for (std::size_t k = 0; k < grid_.n; ++k) {
      lo[i][k] = pair.lower(i, grid_.x(k));
      hi[i][k] = pair.upper(i, grid_.x(k));
    }
  }
  IterationReport report;
  WaveProfile phi = std::move(start);
  for (std::size_t it = 0;; ++it) {
    WaveProfile next = apply(phi);
    residuals(next, phi, disp_.mu, report.residual_mu, report.residual_sup);
    report.iterations = it;
    report.converged = report.residual_mu < options.tol;
    if ((report.converged && report.residual_sup < options.sup_tol) || it >= options.max_iter) break;
    double clamp = 0.0;
    if (options.clamp) {
      for (std::size_t i = 0; i < model_.m; ++i) {
        for (std::size_t k = 0; k < grid_.n; ++k) {
          double& v = next.values[i][k];
          const double clamped = std::clamp(v, lo[i][k], hi[i][k]);
          clamp = std::max(clamp, std::abs(clamped - v));
          v = clamped;
        }
      }
      next.refresh_tails(false);
    }
    report.last_clamp = clamp;
    report.max_clamp = std::max(report.max_clamp, clamp);
    if (it >= 100) report.clamp_after_100 = std::max(report.clamp_after_100, clamp);
    phi = std::move(next);
  }
  return {std::move(phi), report};
}

WaveProfile shift_profile(const WaveProfile& profile, double offset) {
  WaveProfile out = profile;
  for (std::size_t i = 0; i < profile.species(); ++i) {
    for (std::size_t k = 0; k < profile.grid.n; ++k) out.values[i][k] = profile.eval(i, profile.grid.x(k) + offset);
  }
  out.refresh_tails();
  return out;
}

std::optional<double> level_crossing(const WaveProfile& profile, std::size_t i, double level) {
  const auto& v = profile.values[i];
  if (v.front() >= level) return profile.grid.x0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] >= level) {
      const double t = (level - v[k - 1]) / (v[k] - v[k - 1]);
      return profile.grid.x(k - 1) + t * profile.grid.h;
    }
  }
  return std::nullopt;
}

NearCriticalResult near_critical_profile(const SystemModel& model, const std::vector<Kernel>& kernels,
                                         const std::vector<double>& eps_sequence, const IterationOptions& options) {
  if (eps_sequence.empty()) throw InputError("near_critical_profile needs at least one eps");
  for (std::size_t k = 0; k < eps_sequence.size(); ++k) {
    if (!(eps_sequence[k] > 0.0) || (k > 0 && !(eps_sequence[k] < eps_sequence[k - 1]))) {
      throw InputError("eps sequence must be positive and strictly decreasing");
    }
  }
  NearCriticalResult out;
  out.target = model.birth ? 0.5 * model.birth->v1 : 0.5 * model.steady[0];
  const double cmin = system_minimal_speed(model, kernels);
  for (double eps : eps_sequence) {
    const DispersionResult disp = analyze(model, kernels, cmin + eps);
    const BoundPair pair = build_bounds(model, disp);
    const WaveOperator op(model, kernels, disp, default_grid(disp, expand_kernels(model, kernels)));
    auto [phi, report] = op.iterate(op.from_bound(pair, false), pair, options);
    out.speeds.push_back(disp.c);
    out.reports.push_back(report);
    if (!report.converged) throw NumericalError("profile at c = cmin + " + std::to_string(eps) + " did not converge");
    const auto cross = level_crossing(phi, 0, out.target);
    if (!cross) throw NumericalError("profile never reaches the normalization level");
    out.profiles.push_back(shift_profile(phi, *cross));
  }
  // Compare successive shifted profiles on a common window.
  for (std::size_t k = 1; k < out.profiles.size(); ++k) {
    double drift = 0.0;
    for (double xi = -20.0; xi <= 20.0; xi += 0.05) {
      for (std::size_t i = 0; i < model.m; ++i) {
        drift = std::max(drift, std::abs(out.profiles[k].eval(i, xi) - out.profiles[k - 1].eval(i, xi)));
      }
    }
    out.drift.push_back(drift);
  }
  return out;
}

}  // namespace idewave
