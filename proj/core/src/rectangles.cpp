#include "idewave/rectangles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "idewave/error.hpp"

namespace idewave {

namespace {

double logistic(double v) { return 3.0 * v * (1.0 - v); }

}  // namespace

bool Rectangle::contains(const SystemModel& model, const std::vector<double>& state, double s, double slack) const {
  const auto lo = r(s);
  const auto hi = t(s);
  for (std::size_t l = 0; l < model.m; ++l) {
    for (std::size_t j = 0; j < model.tau; ++j) {
      const double v = state[model.slot(l, j)];
      if (v < lo[l] - slack || v > hi[l] + slack) return false;
    }
  }
  return true;
}

std::optional<double> Rectangle::level(const SystemModel& model, const std::vector<double>& state) const {
  if (!contains(model, state, 0.0)) return std::nullopt;
  if (contains(model, state, 1.0)) return 1.0;
  double a = 0.0;
  double b = 1.0;
  while (b - a > 1e-12) {
    const double mid = 0.5 * (a + b);
    (contains(model, state, mid) ? a : b) = mid;
  }
  return a;
}

Rectangle logistic_rectangle(double eps) {
  if (!(eps > 0.0)) throw InputError("logistic rectangle needs eps > 0");
  Rectangle rect;
  rect.name = "logistic";
  rect.eps = eps;
  rect.E = {2.0 / 3.0};
  rect.r = [](double s) { return std::vector<double>{9.0 / 16.0 + 5.0 * s / 48.0}; };
  rect.t = [eps](double s) {
    const double r = 9.0 / 16.0 + 5.0 * s / 48.0;
    return std::vector<double>{logistic(r) + eps * (logistic(logistic(r)) - r)};
  };
  for (std::size_t k = 0; k < 1000; ++k) {
    const double t = rect.t(static_cast<double>(k) / 1000.0)[0];
    if (!(t > 2.0 / 3.0 && t < 0.75)) throw NumericalError("t(s) exits (2/3,3/4)");
  }
  return rect;
}

double competition_eps_limit(const SystemModel& model) {
  if (!model.competition) throw InputError("model '" + model.name + "' is not a competition family");
  double limit = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.m; ++i) {
    const double crowd = model.competition->crowding(i);
    if (crowd > 0.0) limit = std::min(limit, 1.0 / crowd - 1.0);
  }
  return limit;
}

Rectangle competition_rectangle(const SystemModel& model, std::optional<double> eps) {
  if (!model.competition) throw InputError("model '" + model.name + "' is not a competition family");
  if (!model.rectangle_ready) {
    throw NumericalError("no contracting rectangle available: total crowding must be < 1 for every species");
  }
  const double limit = competition_eps_limit(model);
  const double e = eps.value_or(std::min(0.5 * limit, 1.0));
  if (!(e > 0.0) || !(e < limit)) {
    throw NumericalError("eps outside the admissible range (0, " + std::to_string(limit) + ")");
  }
  Rectangle rect;
  rect.name = model.name;
  rect.eps = e;
  rect.E = model.steady;
  rect.r = [E = model.steady](double s) {
    std::vector<double> out(E.size());
    for (std::size_t i = 0; i < E.size(); ++i) out[i] = s * E[i];
    return out;
  };
  rect.t = [E = model.steady, e](double s) {
    std::vector<double> out(E.size());
    for (std::size_t i = 0; i < E.size(); ++i) out[i] = s * E[i] + (1.0 + e) * (1.0 - s);
    return out;
  };
  return rect;
}

namespace {

// Flat box [lo, hi] over all slots from per-species bounds.
void slot_box(const SystemModel& model, const std::vector<double>& lo_s, const std::vector<double>& hi_s,
              std::vector<double>& lo, std::vector<double>& hi) {
  lo.assign(model.slots(), 0.0);
  hi.assign(model.slots(), 0.0);
  for (std::size_t l = 0; l < model.m; ++l) {
    for (std::size_t j = 0; j < model.tau; ++j) {
      lo[model.slot(l, j)] = lo_s[l];
      hi[model.slot(l, j)] = hi_s[l];
    }
  }
}

}  // namespace

RectangleReport verify_rectangle(const SystemModel& model, const Rectangle& rect, std::size_t n_s, std::size_t n_box,
                                 std::uint64_t seed) {
  if (rect.species() != model.m) throw InputError("rectangle does not match the model");
  RectangleReport rep;
  const std::size_t m = model.m;

  // continuity: no jump beyond twice the Lipschitz constant seen on a coarser grid.
  constexpr std::size_t coarse = 1000;
  double lip = 0.0;
  for (std::size_t k = 0; k < coarse; ++k) {
    const double s0 = static_cast<double>(k) / coarse;
    const double s1 = static_cast<double>(k + 1) / coarse;
    const auto r0 = rect.r(s0), r1 = rect.r(s1), t0 = rect.t(s0), t1 = rect.t(s1);
    for (std::size_t i = 0; i < m; ++i) lip = std::max({lip, std::abs(r1[i] - r0[i]) * coarse, std::abs(t1[i] - t0[i]) * coarse});
  }
  rep.continuity = std::isfinite(lip);
  for (std::size_t k = 0; rep.continuity && k < 2 * coarse; ++k) {
    const double ds = 0.5 / coarse;
    const double s0 = static_cast<double>(k) * ds;
    const auto r0 = rect.r(s0), r1 = rect.r(s0 + ds), t0 = rect.t(s0), t1 = rect.t(s0 + ds);
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(r1[i] - r0[i]) > 2.0 * lip * ds + 1e-12 || std::abs(t1[i] - t0[i]) > 2.0 * lip * ds + 1e-12) {
        rep.continuity = false;
        rep.witness_s = s0;
      }
    }
  }
  if (!rep.continuity) {
    rep.message = "rectangle is not continuous in s";
    return rep;
  }

  // r nondecreasing, t nonincreasing
  rep.monotone = true;
  for (std::size_t k = 0; rep.monotone && k < coarse; ++k) {
    const double s0 = static_cast<double>(k) / coarse;
    const double s1 = static_cast<double>(k + 1) / coarse;
    const auto r0 = rect.r(s0), r1 = rect.r(s1), t0 = rect.t(s0), t1 = rect.t(s1);
    for (std::size_t i = 0; i < m; ++i) {
      if (!(r1[i] > r0[i]) || !(t1[i] < t0[i])) {
        rep.monotone = false;
        rep.witness_s = s0;
      }
    }
  }
  if (!rep.monotone) {
    rep.message = "r must increase and t must decrease strictly in s";
    return rep;
  }

  // endpoints
  const auto R0 = rect.r(0.0), R1 = rect.r(1.0), T0 = rect.t(0.0), T1 = rect.t(1.0);
  bool ends = true;
  bool over_cap = false;
  for (std::size_t i = 0; i < m; ++i) {
    ends = ends && R0[i] >= 0.0 && R0[i] < R1[i] && std::abs(R1[i] - rect.E[i]) <= 1e-12 &&
           std::abs(T1[i] - rect.E[i]) <= 1e-12 && T1[i] < T0[i];
    over_cap = over_cap || T0[i] > model.caps[i];
  }
  if (ends && over_cap) {
    // The map must keep the enlarged box [0, T(0)] invariant instead.
    std::vector<double> lo, hi;
    slot_box(model, std::vector<double>(m, 0.0), T0, lo, hi);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(model.slots()), out(m);
    rep.enlarged_box = true;
    for (std::size_t k = 0; k < 2000 && rep.enlarged_box; ++k) {
      for (std::size_t s = 0; s < x.size(); ++s) {
        x[s] = k == 0 ? hi[s] : k == 1 ? lo[s] : lo[s] + (hi[s] - lo[s]) * unit(rng);
      }
      model.map(x.data(), out.data());
      for (std::size_t i = 0; i < m; ++i) rep.enlarged_box = rep.enlarged_box && out[i] >= 0.0 && out[i] <= T0[i];
    }
    ends = rep.enlarged_box;
  }
  rep.endpoints = ends;
  if (!rep.endpoints) {
    rep.message = "endpoint ordering 0 <= R(0) < R(1) = E = T(1) < T(0) <= M fails";
    return rep;
  }

  // strict contraction
  std::vector<double> lo, hi;
  slot_box(model, R0, T0, lo, hi);
  const auto effects = sampled_effects(model, lo, hi, seed);
  rep.certifying = slotwise_monotone(effects);
  const std::size_t n_random = rep.certifying ? n_box : std::max<std::size_t>(n_box, 10000);
  const std::size_t n_slots = model.slots();
  const bool corners = n_slots <= 16;

  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(n_slots), out(m);
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.contraction = true;
  for (std::size_t k = 1; k <= n_s; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n_s + 1);
    const auto rs = rect.r(s);
    const auto ts = rect.t(s);
    std::vector<double> slo, shi;
    slot_box(model, rs, ts, slo, shi);
    const auto check = [&](const std::vector<double>& state) {
      model.map(state.data(), out.data());
      ++rep.n_checked;
      for (std::size_t i = 0; i < m; ++i) {
        const double scale = 1.0 + std::abs(ts[i]);
        const double margin = std::min(out[i] - rs[i], ts[i] - out[i]) / scale;
        if (margin < rep.min_margin) {
          rep.min_margin = margin;
          rep.witness_s = s;
          rep.witness_state = state;
        }
        if (!(margin > 1e-12)) rep.contraction = false;
      }
    };
    if (corners) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << n_slots); ++mask) {
        for (std::size_t q = 0; q < n_slots; ++q) x[q] = (mask >> q) & 1 ? shi[q] : slo[q];
        check(x);
      }
    }
    if (rep.certifying) {
      // Extremal states for each species from the slot effects.
      for (std::size_t i = 0; i < m; ++i) {
        for (int side = 0; side < 2; ++side) {
          for (std::size_t q = 0; q < n_slots; ++q) {
            const bool up = effects[i * n_slots + q] == SlotEffect::increasing;
            x[q] = (up == (side == 1)) ? shi[q] : slo[q];
          }
          check(x);
        }
      }
    }
    for (std::size_t p = 0; p < n_random; ++p) {
      for (std::size_t q = 0; q < n_slots; ++q) x[q] = slo[q] + (shi[q] - slo[q]) * unit(rng);
      check(x);
    }
  }
  rep.pass = rep.contraction;
  rep.message = rep.pass ? (rep.certifying ? "contracting rectangle verified" : "no violation found (sampled, non-certifying)")
                         : "strict inclusion r(s) < P < t(s) fails";
  return rep;
}

std::optional<std::size_t> Trajectory::steps_to(double tol) const {
  for (std::size_t k = 0; k < distance.size(); ++k) {
    if (distance[k] <= tol) return k;
  }
  return std::nullopt;
}

Trajectory iterate_difference(const SystemModel& model, const std::vector<double>& history, std::size_t n_steps,
                              const Rectangle* rect) {
  if (history.size() != model.slots()) throw InputError("initial history must be an m x tau block");
  Trajectory traj;
  std::vector<double> state = history;
  std::vector<double> out(model.m);
  const auto newest = [&] {
    std::vector<double> u(model.m);
    for (std::size_t l = 0; l < model.m; ++l) u[l] = state[model.slot(l, model.tau - 1)];
    return u;
  };
  const auto distance = [&](const std::vector<double>& u) {
    double d = 0.0;
    for (std::size_t l = 0; l < model.m; ++l) d = std::max(d, std::abs(u[l] - model.steady[l]));
    return d;
  };
  if (rect) {
    traj.start_level = rect->level(model, state);
    traj.certified = traj.start_level && *traj.start_level > 0.0;
  }
  double running = traj.start_level.value_or(0.0);
  traj.states.push_back(newest());
  traj.distance.push_back(distance(traj.states.back()));
  traj.levels.push_back(running);
  for (std::size_t n = 0; n < n_steps; ++n) {
    model.map(state.data(), out.data());
    for (std::size_t l = 0; l < model.m; ++l) {
      for (std::size_t j = 0; j + 1 < model.tau; ++j) state[model.slot(l, j)] = state[model.slot(l, j + 1)];
      state[model.slot(l, model.tau - 1)] = out[l];
    }
    if (rect && traj.start_level) {
      if (!rect->contains(model, state, *traj.start_level)) {
        throw NumericalError("state left the rectangle slice it started in at step " + std::to_string(n + 1));
      }
      running = std::max(running, rect->level(model, state).value_or(0.0));
    }
    traj.states.push_back(newest());
    traj.distance.push_back(distance(traj.states.back()));
    traj.levels.push_back(running);
  }
  traj.final_distance = traj.distance.back();
  return traj;
}

}  // namespace idewave
