// Acceptance runner: `idewave_acceptance N` checks criterion N (1-7), no
// argument runs all of them. One [PASS]/[FAIL] line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "idewave/bounds.hpp"
#include "idewave/dispersion.hpp"
#include "idewave/error.hpp"
#include "idewave/kernels.hpp"
#include "idewave/models.hpp"
#include "idewave/rectangles.hpp"
#include "idewave/spatial_sim.hpp"
#include "idewave/wave_operator.hpp"

using namespace idewave;

namespace {

// tolerances
constexpr double kClosedFormTol = 1e-8;
constexpr double kRationalTol = 1e-12;
constexpr double kViolationTol = 1e-8;
constexpr double kResidualTol = 1e-10;
constexpr double kStartAgreeTol = 1e-6;
constexpr double kTailLo = 0.95, kTailHi = 1.05;
constexpr double kRightEndTol = 1e-3;
constexpr double kConvergeTol = 1e-8;
constexpr std::size_t kConvergeSteps = 10000;
constexpr double kLogisticSpeedTol = 0.05;
constexpr double kCompetitionSpeedTol = 0.07;
constexpr double kPlateauTol = 2e-2;
constexpr double kBoxTol = 1e-12;  // round-off of weights summing to 1

// runtime limits in seconds
constexpr double kLimit[8] = {0, 1.0, 1.0, 30.0, 120.0, 60.0, 300.0, 600.0};

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const Kernel kGauss = Kernel::gaussian(1.0);

Outcome dispersion_closed_forms() {
  Outcome o;
  const double c1 = minimal_speed(3.0, kGauss).cmin;
  const double c1_exact = std::sqrt(2.0 * std::log(3.0));
  o.check(std::abs(c1 - c1_exact) < kClosedFormTol, "c1 off by " + fmt("%.3g", c1 - c1_exact));
  const CharRoots r = char_roots(3.0, kGauss, 2.0);
  const double s = std::sqrt(4.0 - 2.0 * std::log(3.0));
  o.check(std::abs(r.lambda1 - (2.0 - s)) < kClosedFormTol, "lambda1 off by " + fmt("%.3g", r.lambda1 - (2.0 - s)));
  o.check(std::abs(r.lambda2 - (2.0 + s)) < kClosedFormTol, "lambda2 off by " + fmt("%.3g", r.lambda2 - (2.0 + s)));
  o.note("c1=" + fmt("%.12f", c1) + " roots=" + fmt("%.10f", r.lambda1) + "/" + fmt("%.10f", r.lambda2));
  return o;
}

Outcome logistic_rationals_check() {
  Outcome o;
  using Q = LogisticRationals::Q;
  const LogisticRationals q = logistic_rationals();
  o.check(q.v1 == Q(9, 16), "v1 != 9/16");
  o.check(q.v2 == Q(3, 4), "v2 != 3/4");
  o.check(q.vstar == Q(2, 3), "v* != 2/3");
  o.check(LogisticRationals::b(Q(9, 16)) == Q(189, 256), "b(9/16) != 189/256");
  o.check(LogisticRationals::b(Q(189, 256)) == Q(37989, 65536), "b(189/256) != 37989/65536");

  const ScalarBirth b = logistic_birth();
  const Envelopes env(b);
  const ScalarBirth g = make_birth("sampled", b.b, 3.0, 0.75);
  const auto near = [](double a, double x) { return std::abs(a - x) < kRationalTol; };
  o.check(near(g.vstar, 2.0 / 3.0), "sampled v* " + fmt("%.15g", g.vstar));
  o.check(near(env.v1(), 9.0 / 16.0), "envelope v1 " + fmt("%.15g", env.v1()));
  o.check(near(env.v2(), 0.75), "envelope v2 " + fmt("%.15g", env.v2()));
  o.check(near(b.b(9.0 / 16.0), 189.0 / 256.0), "b(9/16) float");
  o.check(near(b.b(189.0 / 256.0), 37989.0 / 65536.0), "b(189/256) float");
  o.note("v1=" + fmt("%.15g", env.v1()) + " v2=" + fmt("%.15g", env.v2()));
  return o;
}

struct Case {
  SystemModel model;
  double dc;
};

std::vector<Case> profile_matrix() {
  std::vector<Case> cases;
  for (const SystemModel& m : {logistic_model(), delayed_bh_model(1.0, 0.0), delayed_bh_model(1.0, 0.25)}) {
    for (double dc : {0.2, 1.0}) cases.push_back({m, dc});
  }
  return cases;
}

std::string label(const Case& c) {
  std::string s = c.model.name;
  if (c.model.params.count("a")) s += "(a=" + fmt("%g", c.model.params.at("a")) + ")";
  return s + " cmin+" + fmt("%g", c.dc);
}

Outcome bounds_verification() {
  Outcome o;
  double worst = 0.0;
  for (const Case& c : profile_matrix()) {
    const double cmin = system_minimal_speed(c.model, {kGauss});
    const DispersionResult d = analyze(c.model, {kGauss}, cmin + c.dc);
    const BoundsReport r = verify_bounds(build_bounds(c.model, d), c.model, {kGauss}, d.c);
    const double v = std::max(r.max_violation_upper, r.max_violation_lower);
    worst = std::max(worst, v);
    o.check(r.pass && v < kViolationTol, label(c) + " violation " + fmt("%.3g", v));
  }
  const SystemModel m = logistic_model();
  const DispersionResult d = analyze(m, {kGauss}, system_minimal_speed(m, {kGauss}) + 0.2);
  const BoundsReport bad = verify_bounds(build_bounds(m, d, 1.0), m, {kGauss}, d.c);
  o.check(!bad.pass && bad.max_violation_lower > kViolationTol, "q=1 not flagged");
  o.note("worst violation " + fmt("%.3g", worst) + ", q=1 lower violation " + fmt("%.3g", bad.max_violation_lower));
  return o;
}

Outcome profile_fixed_point() {
  Outcome o;
  for (const Case& c : profile_matrix()) {
    const double cmin = system_minimal_speed(c.model, {kGauss});
    const DispersionResult d = analyze(c.model, {kGauss}, cmin + c.dc);
    const BoundPair pair = build_bounds(c.model, d);
    const WaveOperator op(c.model, {kGauss}, d, default_grid(d, {kGauss}));
    auto [up, ru] = op.iterate(op.from_bound(pair, true), pair);
    auto [lo, rl] = op.iterate(op.from_bound(pair, false), pair);
    const std::string tag = label(c);
    o.check(ru.converged && ru.residual_mu < kResidualTol, tag + " upper start residual " + fmt("%.3g", ru.residual_mu));
    o.check(rl.converged && rl.residual_mu < kResidualTol, tag + " lower start residual " + fmt("%.3g", rl.residual_mu));
    double agree = 0.0;
    for (std::size_t k = 0; k < op.grid().n; ++k) agree = std::max(agree, std::abs(up.values[0][k] - lo.values[0][k]));
    o.check(agree < kStartAgreeTol, tag + " starts differ by " + fmt("%.3g", agree));
    const double l1 = pair.lambda[0];
    for (std::size_t k = 0; k < 10; ++k) {
      const double ratio = up.values[0][k] * std::exp(-l1 * op.grid().x(k));
      if (!(ratio >= kTailLo && ratio <= kTailHi)) {
        o.check(false, tag + " tail ratio " + fmt("%.4f", ratio));
        break;
      }
    }
    const double right = std::abs(up.values[0].back() - c.model.steady[0]);
    o.check(right < kRightEndTol, tag + " right end off by " + fmt("%.3g", right));
    o.note(tag + ": " + std::to_string(ru.iterations) + "/" + std::to_string(rl.iterations) + " it");
  }
  return o;
}

// A state block with every slot drawn inside the slice at a random level.
std::vector<double> slice_history(const SystemModel& m, const Rectangle& rect, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double s = 0.9 * u(rng);
  const auto r = rect.r(s);
  const auto t = rect.t(s);
  std::vector<double> h(m.slots());
  for (std::size_t l = 0; l < m.m; ++l) {
    for (std::size_t j = 0; j < m.tau; ++j) h[m.slot(l, j)] = r[l] + (0.02 + 0.96 * u(rng)) * (t[l] - r[l]);
  }
  return h;
}

Outcome contracting_rectangles() {
  Outcome o;
  const SystemModel logistic = logistic_model();
  const SystemModel comp = competition2_model(1, 1, 0.3, 0.3, 0.2, 0.2);
  const std::vector<std::pair<const SystemModel*, Rectangle>> cases{
      {&logistic, logistic_rectangle(0.1)}, {&comp, competition_rectangle(comp, 0.25)}};
  std::mt19937_64 rng(2024);
  for (const auto& [m, rect] : cases) {
    const RectangleReport r = verify_rectangle(*m, rect, 99);
    o.check(r.pass && r.min_margin > 0.0, m->name + " rectangle: " + r.message);
    std::size_t converged = 0, worst_steps = 0;
    double worst_dist = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Trajectory t = iterate_difference(*m, slice_history(*m, rect, rng), kConvergeSteps, &rect);
      const auto steps = t.steps_to(kConvergeTol);
      if (steps) {
        ++converged;
        worst_steps = std::max(worst_steps, *steps);
      } else {
        worst_dist = std::max(worst_dist, t.final_distance);
      }
    }
    o.check(converged == 50, m->name + ": " + std::to_string(50 - converged) + "/50 histories not within " +
                                 fmt("%g", kConvergeTol) + " after " + std::to_string(kConvergeSteps) +
                                 " steps (worst distance " + fmt("%.3g", worst_dist) + ")");
    if (converged == 50) o.note(m->name + ": 50/50 within " + std::to_string(worst_steps) + " steps");
  }
  return o;
}

double kernel_radius(const std::vector<Kernel>& ks) {
  double r = 0.0;
  for (const Kernel& k : ks) r = std::max(r, discretize(k, 0.05).radius);
  return r;
}

Outcome spreading_speed() {
  Outcome o;
  const std::size_t n = 200;
  {
    const SystemModel m = logistic_model();
    const double c1 = system_minimal_speed(m, {kGauss});
    const Simulator sim(m, {kGauss}, sim_grid(c1, n, kernel_radius({kGauss}), 5.0));
    const RunResult r = sim.run(sim.indicator({0.6}, 5.0), n);
    const double speed = r.fronts[0].fitted_speed;
    const Plateau p = behind_front_state(r.state, r.fronts[0]);
    o.check(std::abs(speed / c1 - 1.0) < kLogisticSpeedTol, "logistic speed " + fmt("%.4f", speed));
    o.check(std::abs(p.mean[0] - 2.0 / 3.0) < kPlateauTol, "logistic plateau " + fmt("%.4f", p.mean[0]));
    o.check(r.box_excess <= kBoxTol, "logistic left the box");
    o.note("logistic " + fmt("%.4f", speed) + " vs " + fmt("%.4f", c1) + ", plateau " + fmt("%.5f", p.mean[0]));
  }
  {
    const SystemModel m = competition2_model(1, 1, 0.3, 0.3, 0.2, 0.2);
    const double cstar = system_minimal_speed(m, {kGauss});
    const Simulator sim(m, {kGauss}, sim_grid(cstar, n, kernel_radius({kGauss}), 5.0));
    const RunResult r = sim.run(sim.indicator({0.6, 0.6}, 5.0), n);
    for (std::size_t i = 0; i < 2; ++i) {
      const double speed = r.fronts[i].fitted_speed;
      const Plateau p = behind_front_state(r.state, r.fronts[i]);
      const std::string tag = "competition species " + std::to_string(i + 1);
      o.check(std::abs(speed / cstar - 1.0) < kCompetitionSpeedTol, tag + " speed " + fmt("%.4f", speed));
      for (std::size_t l = 0; l < 2; ++l) {
        o.check(std::abs(p.mean[l] - m.steady[l]) < kPlateauTol, tag + " plateau " + fmt("%.4f", p.mean[l]));
      }
      o.note(tag + " " + fmt("%.4f", speed) + " vs " + fmt("%.4f", cstar));
    }
    o.check(r.box_excess <= kBoxTol, "competition left the box");
  }
  return o;
}

Outcome property_suites() {
  Outcome o;
  // kernels
  std::vector<double> tab{0.0, 0.25, 0.5, 1.0, 0.5, 0.25, 0.0};
  const std::vector<Kernel> kernels{Kernel::gaussian(0.7), Kernel::uniform(1.3), Kernel::triangular(2.0),
                                    Kernel::table(tab, 0.5)};
  for (const Kernel& k : kernels) {
    const std::string name(k.family_name());
    double asym = 0.0;
    for (double x = 0.05; x < 6.0; x += 0.1) asym = std::max(asym, std::abs(k.density(x) - k.density(-x)));
    o.check(asym == 0.0, name + " not symmetric");
    const double mass = mgf_by_quadrature(k, 0.0);
    o.check(std::abs(mass - 1.0) < 1e-9, name + " mass " + fmt("%.12f", mass));
    double prev2 = k.log_mgf(0.0), prev1 = k.log_mgf(0.1);
    for (double l = 0.2; l <= 4.0; l += 0.1) {
      const double cur = k.log_mgf(l);
      if (cur - 2.0 * prev1 + prev2 < -1e-12) {
        o.check(false, name + " log-MGF not convex at " + fmt("%.1f", l));
        break;
      }
      prev2 = prev1;
      prev1 = cur;
    }
  }

  // box invariance of simulations
  CompetitionCoefficients k3;
  k3.m = 3;
  k3.tau = 2;
  k3.d = {1.0, 1.5, 2.0};
  k3.e.assign(3, 0.0);
  k3.f.assign(18, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t l = 0; l < 3; ++l) {
      if (l != i) k3.f_at(i, l, 1) = 0.1;
    }
  }
  const std::vector<SystemModel> models{logistic_model(), scalar_model(kot_birth(1.0)), delayed_bh_model(1.0, 0.25),
                                        competition2_model(1, 2, 0.3, 0.4, 0.2, 0.1), mspecies_model(k3)};
  for (const SystemModel& m : models) {
    for (const Kernel& k : {kGauss, Kernel::uniform(1.0)}) {
      const double cmin = system_minimal_speed(m, {k});
      const Simulator sim(m, {k}, sim_grid(cmin, 40, kernel_radius({k}), 5.0, 4096));
      const RunResult r = sim.run(sim.indicator(m.caps, 5.0), 40, std::vector<double>(m.m, 0.1));
      o.check(r.box_excess <= kBoxTol, m.name + " left the box by " + fmt("%.3g", r.box_excess));
    }
  }

  // nested rectangle slices
  const SystemModel comp = competition2_model(1, 2, 0.3, 0.4, 0.2, 0.1);
  for (const auto& [m, rect] : std::vector<std::pair<SystemModel, Rectangle>>{
           {logistic_model(), logistic_rectangle(0.1)}, {comp, competition_rectangle(comp)}}) {
    bool nested = true;
    for (int i = 0; i < 100; ++i) {
      const double s = i / 100.0, s2 = (i + 1) / 100.0;
      for (std::size_t l = 0; l < m.m; ++l) {
        nested = nested && rect.r(s)[l] <= rect.r(s2)[l] && rect.t(s)[l] >= rect.t(s2)[l] && rect.r(s2)[l] <= rect.t(s2)[l];
      }
    }
    o.check(nested, m.name + " slices not nested");
  }

  // grid refinement: residual of the fine operator on coarse fixed points
  {
    const SystemModel m = logistic_model();
    const Kernel k = Kernel::uniform(1.0);
    const double cmin = system_minimal_speed(m, {k});
    const DispersionResult d = analyze(m, {k}, cmin + 1.0);
    const BoundPair pair = build_bounds(m, d);
    const double span = 60.0;
    const WaveOperator ref(m, {k}, d, default_grid(d, {k}, span, d.c / 320.0));
    std::vector<double> res;
    for (int steps : {20, 40, 80}) {
      const WaveOperator op(m, {k}, d, default_grid(d, {k}, span, d.c / steps));
      auto [phi, rep] = op.iterate(op.from_bound(pair, true), pair);
      o.check(rep.converged, "refinement run with c/h=" + std::to_string(steps) + " did not converge");
      res.push_back(ref.residual_sup(ref.resample(phi)));
    }
    o.check(res[1] <= 0.5 * res[0] && res[2] <= 0.5 * res[1],
            "residuals " + fmt("%.3g", res[0]) + " " + fmt("%.3g", res[1]) + " " + fmt("%.3g", res[2]));
    o.note("refinement residuals " + fmt("%.3g", res[0]) + " " + fmt("%.3g", res[1]) + " " + fmt("%.3g", res[2]));
  }
  return o;
}

const char* kNames[8] = {"",
                         "dispersion closed forms",
                         "logistic rationals",
                         "bounds verification",
                         "fixed-point profile",
                         "contracting rectangles",
                         "spreading speed",
                         "property suites"};

const std::function<Outcome()> kRun[8] = {nullptr,
                                          dispersion_closed_forms,
                                          logistic_rationals_check,
                                          bounds_verification,
                                          profile_fixed_point,
                                          contracting_rectangles,
                                          spreading_speed,
                                          property_suites};

bool run(int n) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = kRun[n]();
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(secs < kLimit[n], "runtime over " + fmt("%g", kLimit[n]) + " s");
  std::printf("[%s] %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", n, kNames[n], secs, o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 7) {
      std::fprintf(stderr, "usage: %s [1-7]\n", argv[0]);
      return 2;
    }
    which.push_back(n);
  } else {
    for (int n = 1; n <= 7; ++n) which.push_back(n);
  }
  bool ok = true;
  for (int n : which) ok = run(n) && ok;
  return ok ? 0 : 1;
}
