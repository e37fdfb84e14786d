#include "idewave/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "idewave/error.hpp"
#include "idewave/parallel.hpp"

namespace idewave {

double BoundPair::upper(std::size_t i, double xi) const {
  return std::min(std::exp(lambda[i] * xi), caps[i]);
}

double BoundPair::lower(std::size_t i, double xi) const {
  if (xi >= xi0(i)) return 0.0;
  const double e = std::exp(lambda[i] * xi);
  return std::max(e * (1.0 - Q * std::exp((eta - 1.0) * lambda[i] * xi)), 0.0);
}

double BoundPair::xi0(std::size_t i) const { return -std::log(Q) / ((eta - 1.0) * lambda[i]); }

BoundPair build_bounds(const SystemModel& model, const DispersionResult& disp, std::optional<double> q_override) {
  if (disp.species.size() != model.m) throw InputError("dispersion data does not match the model");
  BoundPair pair;
  pair.lambda = disp.lambda1();
  pair.eta = disp.eta;
  pair.Q = q_override.value_or(disp.q);
  if (!(pair.Q > 0.0)) throw InputError("lower coefficient must be positive");
  pair.caps = model.birth ? std::vector<double>{model.birth->v2} : model.caps;
  return pair;
}

namespace {

struct Worst {
  double value = -INFINITY;
  double xi = 0.0;
  std::size_t species = 0;
  void take(double v, double x, std::size_t i) {
    if (v > value) {
      value = v;
      xi = x;
      species = i;
    }
  }
};

// Random piecewise-linear blend theta in [0, 1] on fixed knots.
struct RandomBlend {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> theta;
  double operator()(double x) const {
    const double pos = (x - x0) / dx;
    if (pos <= 0.0) return theta.front();
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= theta.size()) return theta.back();
    const double t = pos - static_cast<double>(k);
    return theta[k] * (1.0 - t) + theta[k + 1] * t;
  }
};

}  // namespace

BoundsReport verify_bounds(const BoundPair& pair, const SystemModel& model, const std::vector<Kernel>& kernels,
                           double c, const VerifyOptions& options) {
  if (pair.species() != model.m) throw InputError("bound pair does not match the model");
  const auto ks = expand_kernels(model, kernels);
  const std::size_t m = model.m;
  const std::size_t tau = model.tau;

  double lambda_max = 0.0;
  double sd_min = INFINITY;
  BoundsReport report;
  report.xi_min = INFINITY;
  report.xi_max = -INFINITY;
  for (std::size_t i = 0; i < m; ++i) {
    report.xi_min = std::min(report.xi_min, std::min(pair.xi0(i), 0.0) - 20.0 / pair.lambda[i]);
    report.xi_max = std::max(report.xi_max, 40.0 / pair.lambda[i]);
    lambda_max = std::max(lambda_max, pair.lambda[i]);
    sd_min = std::min(sd_min, ks[i].stddev());
  }
  const double quad_step = options.quad_step > 0.0 ? options.quad_step : std::min(0.02, sd_min / 20.0);
  double xi_step = options.xi_step > 0.0 ? options.xi_step : std::min(0.01, 0.02 / lambda_max);

  const bool scalar = model.birth.has_value() && m == 1 && tau == 1;
  const bool monotone = model.competition.has_value() || (!scalar && slotwise_monotone(model.effects));
  const bool random = options.random_mode || (!scalar && !monotone);
  report.mode = random ? "random" : "extremal";
  report.certifying = !random;
  if (random) xi_step *= 10.0;

  report.n_points = static_cast<std::size_t>(std::floor((report.xi_max - report.xi_min) / xi_step)) + 1;
  std::vector<DiscreteKernel> quad;
  for (const auto& k : ks) quad.push_back(quadrature_rule(k, quad_step));
  std::optional<Envelopes> env;
  if (scalar) env.emplace(*model.birth);

  const auto xi_at = [&](std::size_t p) { return report.xi_min + static_cast<double>(p) * xi_step; };
  std::vector<Worst> up_worst(report.n_points);
  std::vector<Worst> low_worst(report.n_points);

  // Location of slot j of species l relative to xi - s.
  const auto slot_shift = [&](std::size_t j) { return static_cast<double>(tau - j) * c; };

  if (!random) {
    parallel_for(report.n_points, [&](std::size_t begin, std::size_t end) {
      std::vector<double> state_up(model.slots());
      std::vector<double> state_low(model.slots());
      std::vector<double> out(m);
      for (std::size_t p = begin; p < end; ++p) {
        const double xi = xi_at(p);
        for (std::size_t i = 0; i < m; ++i) {
          const DiscreteKernel& dk = quad[i];
          double rhs_up = 0.0;
          double rhs_low = 0.0;
          const double low_here = pair.lower(i, xi);
          for (std::size_t t = 0; t < dk.weights.size(); ++t) {
            const double w = dk.weights[t];
            const double base = xi - dk.node(t);
            if (scalar) {
              const double x = base - c;
              const double u = pair.upper(0, x);
              rhs_up += w * std::min(model.birth->bprime0 * u, env->upper(u));
              if (low_here > 0.0) rhs_low += w * (model.birth->bprime0 * pair.lower(0, x) - model.birth->L1 * u * u);
              continue;
            }
            for (std::size_t l = 0; l < m; ++l) {
              for (std::size_t j = 0; j < tau; ++j) {
                const double x = base - slot_shift(j);
                const std::size_t s = model.slot(l, j);
                const SlotEffect e = model.effect(i, l, j);
                const double u = pair.upper(l, x);
                state_up[s] = e == SlotEffect::increasing ? u : 0.0;
                state_low[s] = e == SlotEffect::increasing ? pair.lower(l, x)
                               : e == SlotEffect::decreasing ? u
                                                             : 0.0;
              }
            }
            model.map(state_up.data(), out.data());
            rhs_up += w * out[i];
            model.map(state_low.data(), out.data());
            rhs_low += w * out[i];
          }
          up_worst[p].take((rhs_up - pair.upper(i, xi)) / (1.0 + std::abs(rhs_up)), xi, i);
          if (!scalar || low_here > 0.0) low_worst[p].take((low_here - rhs_low) / (1.0 + std::abs(rhs_low)), xi, i);
        }
      }
    }, 64);
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double lambda_min = INFINITY;
    for (double l : pair.lambda) lambda_min = std::min(lambda_min, l);
    double reach = 0.0;
    for (const auto& dk : quad) reach = std::max(reach, dk.radius);
    const double x0 = report.xi_min - reach - static_cast<double>(tau) * c - 1.0;
    const double x1 = report.xi_max + reach + 1.0;
    const double dx = 1.0 / lambda_min;
    const auto knots = static_cast<std::size_t>(std::ceil((x1 - x0) / dx)) + 2;
    for (std::size_t trial = 0; trial < options.n_random; ++trial) {
      std::vector<RandomBlend> blends(model.slots());
      for (auto& b : blends) {
        b.x0 = x0;
        b.dx = dx;
        b.theta.resize(knots);
        for (double& v : b.theta) v = unit(rng);
      }
      parallel_for(report.n_points, [&](std::size_t begin, std::size_t end) {
        std::vector<double> state(model.slots());
        std::vector<double> out(m);
        for (std::size_t p = begin; p < end; ++p) {
          const double xi = xi_at(p);
          for (std::size_t i = 0; i < m; ++i) {
            const DiscreteKernel& dk = quad[i];
            double rhs = 0.0;
            for (std::size_t t = 0; t < dk.weights.size(); ++t) {
              const double base = xi - dk.node(t);
              for (std::size_t l = 0; l < m; ++l) {
                for (std::size_t j = 0; j < tau; ++j) {
                  const double x = base - slot_shift(j);
                  const double lo = pair.lower(l, x);
                  const std::size_t s = model.slot(l, j);
                  state[s] = lo + blends[s](x) * (pair.upper(l, x) - lo);
                }
              }
              model.map(state.data(), out.data());
              rhs += dk.weights[t] * out[i];
            }
            up_worst[p].take((rhs - pair.upper(i, xi)) / (1.0 + std::abs(rhs)), xi, i);
            low_worst[p].take((pair.lower(i, xi) - rhs) / (1.0 + std::abs(rhs)), xi, i);
          }
        }
      }, 16);
    }
  }

  Worst up;
  Worst low;
  for (std::size_t p = 0; p < report.n_points; ++p) {
    up.take(up_worst[p].value, up_worst[p].xi, up_worst[p].species);
    low.take(low_worst[p].value, low_worst[p].xi, low_worst[p].species);
  }
  report.max_violation_upper = std::max(0.0, up.value);
  report.max_violation_lower = std::max(0.0, low.value);
  report.xi_worst_upper = up.xi;
  report.xi_worst_lower = low.xi;
  report.species_worst_upper = up.species;
  report.species_worst_lower = low.species;
  report.pass = report.max_violation_upper < options.tol && report.max_violation_lower < options.tol;
  return report;
}

}  // namespace idewave
