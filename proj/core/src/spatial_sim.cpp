#include "idewave/spatial_sim.hpp"

#include <algorithm>
#include <cmath>

#include "idewave/dispersion.hpp"
#include "idewave/error.hpp"
#include "idewave/parallel.hpp"

namespace idewave {

Grid sim_grid(double cmin, std::size_t n_steps, double kernel_radius, double init_halfwidth, std::size_t cells) {
  if (cells < 16) throw InputError("simulation needs at least 16 cells");
  const double length = 2.0 * (cmin * static_cast<double>(n_steps) + kernel_radius + init_halfwidth);
  Grid g;
  g.n = cells;
  g.h = length / static_cast<double>(cells);
  g.x0 = -0.5 * length;
  return g;
}

std::optional<double> front_position(const std::vector<double>& u, const Grid& grid, double level) {
  for (std::size_t k = u.size(); k-- > 0;) {
    if (u[k] >= level) {
      if (k + 1 == u.size()) return grid.x(k);
      const double t = (u[k] - level) / (u[k] - u[k + 1]);
      return grid.x(k) + t * grid.h;
    }
  }
  return std::nullopt;
}

Simulator::Simulator(const SystemModel& model, const std::vector<Kernel>& kernels, const Grid& grid,
                     Boundary boundary, ConvolutionMethod method)
    : model_(model), grid_(grid), boundary_(boundary) {
  const auto ks = expand_kernels(model, kernels);
  for (const auto& k : ks) {
    DiscreteKernel dk = discretize(k, grid_.h);
    if (2 * dk.half_width() + 1 > grid_.n) throw InputError("kernel wider than the simulation domain");
    radius_ = std::max(radius_, dk.radius);
    half_.push_back(dk.half_width());
    conv_.emplace_back(std::move(dk.weights), grid_.n, method);
  }
}

SimState Simulator::indicator(const std::vector<double>& value, double halfwidth) const {
  if (value.size() != model_.m) throw InputError("initial value needs one entry per species");
  SimState s;
  s.grid = grid_;
  s.boundary = boundary_;
  std::vector<std::vector<double>> snap(model_.m, std::vector<double>(grid_.n, 0.0));
  for (std::size_t l = 0; l < model_.m; ++l) {
    for (std::size_t k = 0; k < grid_.n; ++k) snap[l][k] = std::abs(grid_.x(k)) < halfwidth ? value[l] : 0.0;
  }
  s.history.assign(model_.tau, snap);
  return s;
}

SimState Simulator::constant(const std::vector<double>& value) const {
  SimState s = indicator(value, INFINITY);
  return s;
}

void Simulator::step(SimState& state) const {
  const std::size_t m = model_.m;
  const std::size_t tau = model_.tau;
  const std::size_t n = grid_.n;
  if (state.history.size() != tau) throw InputError("history depth must equal tau");

  std::vector<std::vector<double>> g(m, std::vector<double>(n));
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(model_.slots());
    std::vector<double> out(m);
    for (std::size_t k = begin; k < end; ++k) {
      for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t j = 0; j < tau; ++j) x[model_.slot(l, j)] = state.history[j][l][k];
      }
      model_.map(x.data(), out.data());
      for (std::size_t i = 0; i < m; ++i) g[i][k] = out[i];
    }
  }, 2048);

  std::vector<std::vector<double>> next(m, std::vector<double>(n));
  std::vector<double> padded;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t half = half_[i];
    padded.assign(n + 2 * half, 0.0);
    std::copy(g[i].begin(), g[i].end(), padded.begin() + static_cast<std::ptrdiff_t>(half));
    if (boundary_ == Boundary::periodic) {
      for (std::size_t q = 0; q < half; ++q) {
        padded[q] = g[i][(n - half + q) % n];
        padded[n + half + q] = g[i][q % n];
      }
    }
    conv_[i].valid(padded.data(), next[i].data());
    if (conv_[i].method() == ConvolutionMethod::fft) {
      for (double& v : next[i]) v = std::max(v, 0.0);
    }
  }
  std::rotate(state.history.begin(), state.history.begin() + 1, state.history.end());
  state.history.back() = std::move(next);
  ++state.n;
}

RunResult Simulator::run(SimState state, std::size_t n_steps, std::vector<double> levels, bool check_edges) const {
  const std::size_t m = model_.m;
  if (levels.empty()) {
    for (std::size_t i = 0; i < m; ++i) levels.push_back(0.5 * model_.steady[i]);
  }
  if (levels.size() != m) throw InputError("need one tracking level per species");
  RunResult res;
  res.fronts.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    res.fronts[i].species = i;
    res.fronts[i].level = levels[i];
  }
  const double margin = radius_ + 10.0 * grid_.h;
  for (std::size_t step_i = 0; step_i < n_steps; ++step_i) {
    step(state);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& u = state.newest(i);
      for (double v : u) res.box_excess = std::max({res.box_excess, -v, v - model_.caps[i]});
      const auto xf = front_position(u, grid_, levels[i]);
      if (!xf) continue;
      res.fronts[i].positions.emplace_back(state.n, *xf);
      if (check_edges && state.boundary == Boundary::zero_pad) {
        std::size_t first = 0;
        while (first < u.size() && u[first] < levels[i]) ++first;
        if (*xf > grid_.end() - margin || grid_.x(first) < grid_.x0 + margin) {
          throw NumericalError("front reached domain edge");
        }
      }
    }
  }
  for (auto& front : res.fronts) {
    const auto& pos = front.positions;
    if (pos.empty()) throw NumericalError("level never attained");
    const std::size_t begin = pos.size() / 2;
    const std::size_t count = pos.size() - begin;
    if (count < 10) throw NumericalError("too few front positions for a speed fit (need 10)");
    double sn = 0.0, sx = 0.0;
    for (std::size_t k = begin; k < pos.size(); ++k) {
      sn += static_cast<double>(pos[k].first);
      sx += pos[k].second;
    }
    const double mn = sn / static_cast<double>(count);
    const double mx = sx / static_cast<double>(count);
    double snn = 0.0, snx = 0.0;
    for (std::size_t k = begin; k < pos.size(); ++k) {
      const double dn = static_cast<double>(pos[k].first) - mn;
      snn += dn * dn;
      snx += dn * (pos[k].second - mx);
    }
    front.fitted_speed = snx / snn;
    double ss = 0.0;
    for (std::size_t k = begin; k < pos.size(); ++k) {
      const double pred = mx + front.fitted_speed * (static_cast<double>(pos[k].first) - mn);
      ss += (pos[k].second - pred) * (pos[k].second - pred);
    }
    front.fit_residual = std::sqrt(ss / static_cast<double>(count));
    front.fit_window = {begin, pos.size()};
  }
  res.state = std::move(state);
  return res;
}

Plateau behind_front_state(const SimState& state, const FrontTrace& trace, double lo_frac, double hi_frac) {
  if (trace.positions.empty()) throw NumericalError("no front recorded");
  const double xf = trace.positions.back().second;
  Plateau p;
  p.x_lo = lo_frac * xf;
  p.x_hi = hi_frac * xf;
  const std::size_t m = state.history.back().size();
  p.mean.assign(m, 0.0);
  p.min.assign(m, INFINITY);
  p.max.assign(m, -INFINITY);
  std::size_t count = 0;
  for (std::size_t k = 0; k < state.grid.n; ++k) {
    const double x = state.grid.x(k);
    if (x < p.x_lo || x > p.x_hi) continue;
    ++count;
    for (std::size_t l = 0; l < m; ++l) {
      const double v = state.newest(l)[k];
      p.mean[l] += v;
      p.min[l] = std::min(p.min[l], v);
      p.max[l] = std::max(p.max[l], v);
    }
  }
  if (count == 0) throw NumericalError("behind-front window is empty");
  for (double& v : p.mean) v /= static_cast<double>(count);
  return p;
}

}  // namespace idewave
