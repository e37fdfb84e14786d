#include "idewave/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "idewave/error.hpp"
#include "numerics.hpp"

namespace idewave {

namespace {

std::uniform_real_distribution<double> unit(0.0, 1.0);

std::vector<double> random_state(const SystemModel& model, std::mt19937_64& rng) {
  std::vector<double> x(model.slots());
  for (std::size_t l = 0; l < model.m; ++l) {
    for (std::size_t j = 0; j < model.tau; ++j) x[model.slot(l, j)] = model.caps[l] * unit(rng);
  }
  return x;
}

// Largest/smallest b over [a, b] near an interior grid extremum.
std::pair<double, double> refine_extremum(const std::function<double(double)>& b, double lo, double hi,
                                          bool maximize) {
  const double sign = maximize ? -1.0 : 1.0;
  const double x = detail::golden_section([&](double v) { return sign * b(v); }, lo, hi, 1e-12 * (1.0 + hi));
  return {x, b(x)};
}

}  // namespace

Envelopes::Envelopes(const ScalarBirth& birth, std::size_t n) : b_(birth.b), vbar_(birth.vbar) {
  if (n < 10) throw InputError("envelopes need at least 10 grid points");
  grid_.resize(n + 1);
  values_.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    grid_[k] = vbar_ * static_cast<double>(k) / static_cast<double>(n);
    values_[k] = b_(grid_[k]);
  }
  prefix_max_ = values_;
  for (std::size_t k = 1; k <= n; ++k) prefix_max_[k] = std::max(prefix_max_[k - 1], values_[k]);
  suffix_min_ = values_;
  for (std::size_t k = n; k-- > 0;) suffix_min_[k] = std::min(suffix_min_[k + 1], values_[k]);
  for (std::size_t k = 1; k < n; ++k) {
    const double l = values_[k - 1], c = values_[k], r = values_[k + 1];
    if (c >= l && c >= r && (c > l || c > r)) {
      maxima_.push_back(refine_extremum(b_, grid_[k - 1], grid_[k + 1], true));
    }
    if (c <= l && c <= r && (c < l || c < r)) {
      minima_.push_back(refine_extremum(b_, grid_[k - 1], grid_[k + 1], false));
    }
  }

  // v2: largest fixed point of the upper envelope.
  const auto up_gap = [&](double v) { return upper(v) - v; };
  if (up_gap(vbar_) >= -1e-14) {
    v2_ = vbar_;
  } else {
    std::size_t k = n;
    while (k > 0 && up_gap(grid_[k]) < 0.0) --k;
    if (k == 0) throw NumericalError("birth law has no fixed point of its upper envelope in (0, vbar]");
    v2_ = detail::bisect(up_gap, grid_[k], grid_[k + 1], 1e-16);
  }

  // v1: first point where the lower envelope drops to the diagonal.
  const auto low_gap = [&](double v) { return lower(v) - v; };
  std::size_t k = 1;
  while (k <= n && low_gap(grid_[k]) > 0.0) ++k;
  if (k > n) throw NumericalError("birth law has no fixed point of its lower envelope in (0, vbar]");
  v1_ = low_gap(grid_[k]) == 0.0 ? grid_[k] : detail::bisect(low_gap, grid_[k - 1], grid_[k], 1e-16);
}

double Envelopes::upper(double v) const {
  if (v <= 0.0) return b_(0.0);
  v = std::min(v, vbar_);
  const auto idx = static_cast<std::size_t>(
      std::min(static_cast<double>(grid_.size() - 1), std::floor(v / vbar_ * static_cast<double>(grid_.size() - 1))));
  double best = std::max(prefix_max_[idx], b_(v));
  for (const auto& [x, value] : maxima_) {
    if (x < v) best = std::max(best, value);
  }
  return best;
}

double Envelopes::lower(double v) const {
  if (v >= vbar_) return b_(vbar_);
  v = std::max(v, 0.0);
  const auto idx = static_cast<std::size_t>(std::ceil(v / vbar_ * static_cast<double>(grid_.size() - 1)));
  double best = std::min(suffix_min_[std::min(idx, grid_.size() - 1)], b_(v));
  for (const auto& [x, value] : minima_) {
    if (x > v) best = std::min(best, value);
  }
  return best;
}

ScalarBirth make_birth(std::string name, std::function<double(double)> b, double bprime0, double vbar) {
  if (!(vbar > 0.0)) throw InputError("birth law needs vbar > 0");
  if (!(bprime0 > 1.0)) throw InputError("birth law needs b'(0) > 1");
  ScalarBirth birth;
  birth.name = std::move(name);
  birth.b = std::move(b);
  birth.bprime0 = bprime0;
  birth.vbar = vbar;

  constexpr std::size_t n = 10000;
  const auto gap = [&](double v) { return birth.b(v) - v; };
  std::size_t k = 1;
  const auto node = [&](std::size_t i) { return vbar * static_cast<double>(i) / static_cast<double>(n); };
  while (k <= n && gap(node(k)) > 0.0) ++k;
  if (k > n) throw InputError("birth law has no positive fixed point in (0, vbar]");
  birth.vstar = gap(node(k)) == 0.0 ? node(k) : detail::bisect(gap, node(k - 1), node(k), 1e-16);

  const Envelopes env(birth);
  birth.v1 = env.v1();
  birth.v2 = env.v2();

  double ratio = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double v = node(i);
    ratio = std::max(ratio, (bprime0 * v - birth.b(v)) / (v * v));
  }
  birth.L1 = 1.1 * ratio;
  return birth;
}

ScalarBirth logistic_birth() {
  ScalarBirth birth = make_birth("logistic", [](double v) { return 3.0 * v * (1.0 - v); }, 3.0, 0.75);
  birth.L1 = 3.0;  // 3v - 3v(1-v) = 3v^2 exactly
  return birth;
}

ScalarBirth kot_birth(double d) {
  if (!(d > 0.0)) throw InputError("kot birth law needs d > 0");
  ScalarBirth birth = make_birth("kot", [d](double v) { return (1.0 + d) * v / (1.0 + d * v); }, 1.0 + d, 1.0);
  birth.L1 = d * (1.0 + d);
  return birth;
}

LogisticRationals logistic_rationals() {
  using Q = LogisticRationals::Q;
  LogisticRationals out;
  // b(v) = 3v - 3v^2: positive fixed point 1 - 1/3, maximum at the vertex 1/2.
  out.vstar = Q(1) - Q(1, 3);
  out.v2 = LogisticRationals::b(Q(1, 2));
  out.v1 = LogisticRationals::b(out.v2);
  return out;
}

BirthCheck check_birth(const ScalarBirth& birth, std::size_t n) {
  BirthCheck out;
  out.fixed_point_error = std::abs(birth.b(birth.vstar) - birth.vstar);
  out.min_value = birth.b(birth.vbar);
  out.min_gap = birth.bprime0 * birth.vbar - birth.b(birth.vbar);
  out.max_above_linear = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double v = birth.vbar * static_cast<double>(k) / static_cast<double>(n);
    const double bv = birth.b(v);
    const double gap = birth.bprime0 * v - bv;
    out.min_value = std::min(out.min_value, bv);
    out.max_above_linear = std::max(out.max_above_linear, -gap);
    out.min_gap = std::min(out.min_gap, gap);
    out.max_gap_ratio = std::max(out.max_gap_ratio, birth.L1 > 0.0 ? gap / (birth.L1 * v * v) : 0.0);
  }
  out.ok = std::abs(birth.b(0.0)) <= 1e-15 && out.fixed_point_error <= 1e-12 && out.min_value >= 0.0 &&
           out.max_above_linear <= 1e-12 && out.min_gap >= -1e-12 && out.max_gap_ratio <= 1.0 + 1e-12;
  return out;
}

double CompetitionCoefficients::own_delay_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 1; j < tau; ++j) s += e_at(i, j);
  return s;
}

double CompetitionCoefficients::cross_sum(std::size_t i, std::size_t l) const {
  if (l == i) return 0.0;
  double s = 0.0;
  for (std::size_t j = 1; j <= tau; ++j) s += f_at(i, l, j);
  return s;
}

double CompetitionCoefficients::crowding(std::size_t i) const {
  double s = own_delay_sum(i);
  for (std::size_t l = 0; l < m; ++l) s += cross_sum(i, l);
  return s;
}

std::vector<double> SystemModel::apply(const std::vector<double>& state) const {
  if (state.size() != slots()) throw InputError("state block has the wrong size");
  std::vector<double> out(m);
  map(state.data(), out.data());
  return out;
}

std::vector<double> SystemModel::constant_state(const std::vector<double>& u) const {
  std::vector<double> x(slots());
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t j = 0; j < tau; ++j) x[slot(l, j)] = u[l];
  }
  return x;
}

SystemModel scalar_model(const ScalarBirth& birth) {
  SystemModel model;
  model.name = birth.name;
  model.m = 1;
  model.tau = 1;
  model.caps = {birth.vbar};
  model.steady = {birth.vstar};
  model.growth = {birth.bprime0};
  model.map = [b = birth.b](const double* x, double* out) { out[0] = b(x[0]); };
  model.birth = birth;
  model.effects = sampled_effects(model, {0.0}, {birth.vbar});
  model.lipschitz = lipschitz_bound(model).bound;
  return model;
}

SystemModel logistic_model() { return scalar_model(logistic_birth()); }

std::vector<double> competition_steady_state(const CompetitionCoefficients& coeffs) {
  const std::size_t m = coeffs.m;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < m; ++l) a[i][l] = l == i ? 1.0 + coeffs.own_delay_sum(i) : coeffs.cross_sum(i, l);
    a[i][m] = 1.0;
  }
  const auto original = a;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-13) throw InputError("no unique steady state (singular linear system)");
    std::swap(a[piv], a[col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= m; ++k) a[r][k] -= factor * a[col][k];
    }
  }
  std::vector<double> e(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = a[i][m];
    for (std::size_t k = i + 1; k < m; ++k) s -= a[i][k] * e[k];
    e[i] = s / a[i][i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < m; ++l) s += original[i][l] * e[l];
    if (std::abs(s - 1.0) >= 1e-12) throw NumericalError("steady state solve is ill-conditioned");
  }
  return e;
}

namespace {

SystemModel competition_family(std::string name, CompetitionCoefficients coeffs, std::vector<double> steady) {
  const std::size_t m = coeffs.m;
  const std::size_t tau = coeffs.tau;
  SystemModel model;
  model.name = std::move(name);
  model.m = m;
  model.tau = tau;
  model.caps.assign(m, 1.0);
  model.steady = std::move(steady);
  model.growth.resize(m);
  for (std::size_t i = 0; i < m; ++i) model.growth[i] = 1.0 + coeffs.d[i];

  // Denominator coefficients per species over the flat state block.
  std::vector<double> coef(m * m * tau, 0.0);
  model.effects.assign(m * m * tau, SlotEffect::none);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = &coef[i * m * tau];
    row[i * tau + tau - 1] = 1.0;
    model.effects[i * m * tau + i * tau + tau - 1] = SlotEffect::increasing;
    for (std::size_t j = 1; j < tau; ++j) row[i * tau + tau - 1 - j] = coeffs.e_at(i, j);
    for (std::size_t l = 0; l < m; ++l) {
      if (l == i) continue;
      for (std::size_t j = 1; j <= tau; ++j) row[l * tau + tau - j] = coeffs.f_at(i, l, j);
    }
    for (std::size_t s = 0; s < m * tau; ++s) {
      if (s != i * tau + tau - 1 && row[s] > 0.0) model.effects[i * m * tau + s] = SlotEffect::decreasing;
    }
  }
  model.map = [coef, d = coeffs.d, m, tau](const double* x, double* out) {
    const std::size_t n = m * tau;
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &coef[i * n];
      double crowd = 0.0;
      for (std::size_t s = 0; s < n; ++s) crowd += row[s] * x[s];
      out[i] = (1.0 + d[i]) * x[i * tau + tau - 1] / (1.0 + d[i] * crowd);
    }
  };
  model.rectangle_ready = true;
  for (std::size_t i = 0; i < m; ++i) model.rectangle_ready = model.rectangle_ready && coeffs.crowding(i) < 1.0;
  model.competition = std::move(coeffs);
  model.lipschitz = lipschitz_bound(model).bound;
  return model;
}

void validate(const CompetitionCoefficients& c) {
  if (c.m == 0 || c.tau == 0) throw InputError("mspecies model needs m >= 1 and tau >= 1");
  if (c.d.size() != c.m) throw InputError("mspecies model: d must have m entries");
  if (c.e.size() != c.m * (c.tau - 1)) throw InputError("mspecies model: e must be m x (tau - 1)");
  if (c.f.size() != c.m * c.m * c.tau) throw InputError("mspecies model: f must be m x m x tau");
  for (double d : c.d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InputError("mspecies model: every d_i must be positive");
  }
  for (double v : c.e) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("mspecies model: coefficients must be nonnegative");
  }
  for (double v : c.f) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("mspecies model: coefficients must be nonnegative");
  }
}

}  // namespace

SystemModel mspecies_model(CompetitionCoefficients coeffs) {
  validate(coeffs);
  for (std::size_t i = 0; i < coeffs.m; ++i) {
    for (std::size_t j = 1; j <= coeffs.tau; ++j) coeffs.f_at(i, i, j) = 0.0;
  }
  std::vector<double> steady = competition_steady_state(coeffs);
  for (double e : steady) {
    if (!(e > 0.0) || e > 1.0 + 1e-12) throw InputError("coexistence state not positive");
  }
  SystemModel model = competition_family("mspecies", coeffs, std::move(steady));
  model.params["m"] = static_cast<double>(coeffs.m);
  model.params["tau"] = static_cast<double>(coeffs.tau);
  return model;
}

SystemModel delayed_bh_model(double d, double a) {
  if (!(d > 0.0) || !std::isfinite(d)) throw InputError("delayed_bh needs d > 0");
  if (!(a >= 0.0)) throw InputError("delayed_bh needs a >= 0");
  if (!(a < 1.0)) throw InputError("steady state 1/(1+a) requires a < 1");
  CompetitionCoefficients c;
  c.m = 1;
  c.tau = 2;
  c.d = {d};
  c.e = {a};
  c.f.assign(2, 0.0);
  SystemModel model = competition_family("delayed_bh", c, {1.0 / (1.0 + a)});
  model.params = {{"d", d}, {"a", a}};
  return model;
}

SystemModel competition2_model(double d1, double d2, double a1, double a2, double b1, double b2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InputError("competition2 needs d1, d2 > 0");
  for (double v : {a1, a2, b1, b2}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("competition2 needs a_i, b_i >= 0");
  }
  if (!(1.0 + b1 > a2) || !(1.0 + b2 > a1)) {
    throw InputError("coexistence state not positive: need 1 + b1 > a2 and 1 + b2 > a1");
  }
  CompetitionCoefficients c;
  c.m = 2;
  c.tau = 2;
  c.d = {d1, d2};
  c.e = {b1, b2};
  c.f.assign(8, 0.0);
  c.f_at(0, 1, 1) = a1;
  c.f_at(1, 0, 1) = a2;
  const double den = (1.0 + b1) * (1.0 + b2) - a1 * a2;
  SystemModel model = competition_family("competition2", c, {(1.0 + b2 - a1) / den, (1.0 + b1 - a2) / den});
  model.params = {{"d1", d1}, {"d2", d2}, {"a1", a1}, {"a2", a2}, {"b1", b1}, {"b2", b2}};
  return model;
}

SystemModel custom_model(std::string name, std::size_t m, std::size_t tau, std::vector<double> caps,
                         std::vector<double> steady, std::vector<double> growth,
                         std::function<void(const double*, double*)> map, std::uint64_t seed) {
  if (caps.size() != m || steady.size() != m || growth.size() != m) {
    throw InputError("custom model: caps, steady and growth need m entries");
  }
  SystemModel model;
  model.name = std::move(name);
  model.m = m;
  model.tau = tau;
  model.caps = std::move(caps);
  model.steady = std::move(steady);
  model.growth = std::move(growth);
  model.map = std::move(map);
  std::vector<double> lo(m * tau, 0.0);
  std::vector<double> hi(m * tau);
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t j = 0; j < tau; ++j) hi[l * tau + j] = model.caps[l];
  }
  model.effects = sampled_effects(model, lo, hi, seed);
  model.lipschitz = lipschitz_bound(model, seed).bound;
  return model;
}

LipschitzEstimate lipschitz_bound(const SystemModel& model, std::uint64_t seed, std::size_t pairs) {
  std::mt19937_64 rng(seed);
  std::vector<double> px(model.m);
  std::vector<double> py(model.m);
  double best = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto x = random_state(model, rng);
    const auto y = random_state(model, rng);
    double dist = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) dist += std::abs(x[s] - y[s]);
    if (dist <= 0.0) continue;
    model.map(x.data(), px.data());
    model.map(y.data(), py.data());
    double diff = 0.0;
    for (std::size_t i = 0; i < model.m; ++i) diff = std::max(diff, std::abs(px[i] - py[i]));
    best = std::max(best, diff / dist);
  }
  return {best, 1.5 * best};
}

ModelCheck check_model(const SystemModel& model, std::uint64_t seed, std::size_t samples) {
  ModelCheck out;
  std::mt19937_64 rng(seed);
  std::vector<double> p(model.m);
  const auto excess = [&](const std::vector<double>& x) {
    model.map(x.data(), p.data());
    double worst = 0.0;
    for (std::size_t i = 0; i < model.m; ++i) {
      worst = std::max({worst, -p[i], p[i] - model.caps[i]});
      if (!std::isfinite(p[i])) worst = INFINITY;
    }
    return worst;
  };
  for (std::size_t k = 0; k < samples; ++k) out.box_excess = std::max(out.box_excess, excess(random_state(model, rng)));
  out.box_excess = std::max(out.box_excess, excess(model.constant_state(model.caps)));

  model.map(model.constant_state(model.steady).data(), p.data());
  for (std::size_t i = 0; i < model.m; ++i) out.steady_residual = std::max(out.steady_residual, std::abs(p[i] - model.steady[i]));
  model.map(std::vector<double>(model.slots(), 0.0).data(), p.data());
  for (std::size_t i = 0; i < model.m; ++i) out.zero_residual = std::max(out.zero_residual, std::abs(p[i]));
  out.steady_positive = true;
  for (std::size_t i = 0; i < model.m; ++i) {
    out.steady_positive = out.steady_positive && model.steady[i] > 0.0 && model.steady[i] <= model.caps[i];
  }
  out.ok = out.box_excess <= 1e-12 && out.steady_residual <= 1e-12 && out.zero_residual <= 1e-15 && out.steady_positive;
  return out;
}

std::vector<SlotEffect> sampled_effects(const SystemModel& model, const std::vector<double>& lo,
                                        const std::vector<double>& hi, std::uint64_t seed, std::size_t samples) {
  const std::size_t n = model.slots();
  if (lo.size() != n || hi.size() != n) throw InputError("sampled_effects: box has the wrong size");
  std::vector<char> up(model.m * n, 0);
  std::vector<char> down(model.m * n, 0);
  std::mt19937_64 rng(seed);
  std::vector<double> base(model.m);
  std::vector<double> bumped(model.m);
  std::vector<double> x(n);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t s = 0; s < n; ++s) x[s] = lo[s] + (hi[s] - lo[s]) * unit(rng);
    model.map(x.data(), base.data());
    for (std::size_t s = 0; s < n; ++s) {
      const double width = hi[s] - lo[s];
      if (!(width > 0.0)) continue;
      const double delta = 1e-6 * width;
      const double keep = x[s];
      const bool forward = keep + delta <= hi[s];
      x[s] = forward ? keep + delta : keep - delta;
      model.map(x.data(), bumped.data());
      x[s] = keep;
      for (std::size_t i = 0; i < model.m; ++i) {
        double diff = bumped[i] - base[i];
        if (!forward) diff = -diff;
        if (diff > 1e-14) up[i * n + s] = 1;
        if (diff < -1e-14) down[i * n + s] = 1;
      }
    }
  }
  std::vector<SlotEffect> out(model.m * n);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = up[k] && down[k] ? SlotEffect::mixed
             : up[k]          ? SlotEffect::increasing
             : down[k]        ? SlotEffect::decreasing
                              : SlotEffect::none;
  }
  return out;
}

bool slotwise_monotone(const std::vector<SlotEffect>& effects) {
  return std::none_of(effects.begin(), effects.end(), [](SlotEffect e) { return e == SlotEffect::mixed; });
}

}  // namespace idewave
