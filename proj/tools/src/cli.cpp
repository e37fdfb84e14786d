#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "config.hpp"
#include "idewave/bounds.hpp"
#include "idewave/dispersion.hpp"
#include "idewave/error.hpp"
#include "idewave/rectangles.hpp"
#include "idewave/spatial_sim.hpp"
#include "idewave/wave_operator.hpp"

namespace idewave::cli {

using nlohmann::json;

namespace {

void write_value(const json& v, std::string& out, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
  const std::string close(2 * static_cast<std::size_t>(depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(key).dump() + ": ";
        write_value(item, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ", ";
        first = false;
        write_value(item, out, depth + 1);
      }
      out += "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += v.dump();
  }
}

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> c, tol, span, h, eps, q;
  std::optional<std::size_t> n_steps;
};

struct Session {
  std::string command;
  RunConfig cfg;
  bool write_files = false;
  std::ostream& out;

  std::filesystem::path file(const std::string& name) const { return cfg.out / name; }

  void ensure_dir() const {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw InputError("cannot create output directory " + cfg.out.string() + ": " + ec.message());
  }

  void emit(json report) const {
    report["command"] = command;
    const std::string text = to_json_text(report);
    out << text << "\n";
    if (write_files) {
      ensure_dir();
      std::ofstream f(file(command + ".json"));
      if (!f) throw InputError("cannot write " + file(command + ".json").string());
      f << text << "\n";
    }
  }

  std::ofstream csv(const std::string& name) const {
    ensure_dir();
    std::ofstream f(file(name));
    if (!f) throw InputError("cannot write " + file(name).string());
    return f;
  }
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json dispersion_json(const DispersionResult& d) {
  json species = json::array();
  for (const auto& s : d.species) {
    species.push_back({{"growth", s.growth}, {"cmin", s.cmin}, {"lambda_star", s.lambda_star},
                       {"lambda1", s.lambda1}, {"lambda2", s.lambda2}});
  }
  const auto& crit = d.species[d.critical];
  return {{"c", d.c},
          {"cmin", d.cmin},
          {"lambda_star", crit.lambda_star},
          {"lambda1", crit.lambda1},
          {"lambda2", crit.lambda2},
          {"eta", d.eta},
          {"q", d.q},
          {"mu", d.mu},
          {"critical_species", d.critical + 1},
          {"species", species}};
}

int cmd_speed(Session& s) {
  const SystemModel model = build_model(s.cfg);
  const DispersionResult d = analyze(model, s.cfg.kernels, s.cfg.c);
  json r = dispersion_json(d);
  r["model"] = model.name;
  s.emit(r);
  return 0;
}

int cmd_bounds(Session& s) {
  const SystemModel model = build_model(s.cfg);
  const DispersionResult d = analyze(model, s.cfg.kernels, s.cfg.c);
  const BoundPair pair = build_bounds(model, d, s.cfg.q);
  VerifyOptions opt;
  opt.seed = s.cfg.seed;
  if (s.cfg.tol) opt.tol = *s.cfg.tol;
  if (s.cfg.h) opt.xi_step = *s.cfg.h;
  const BoundsReport rep = verify_bounds(pair, model, s.cfg.kernels, d.c, opt);
  json r = {{"model", model.name},
            {"c", d.c},
            {"cmin", d.cmin},
            {"eta", pair.eta},
            {"q", pair.Q},
            {"lambda1", pair.lambda},
            {"caps", pair.caps},
            {"max_violation_upper", rep.max_violation_upper},
            {"max_violation_lower", rep.max_violation_lower},
            {"xi_worst", rep.max_violation_lower > rep.max_violation_upper ? rep.xi_worst_lower : rep.xi_worst_upper},
            {"xi_worst_upper", rep.xi_worst_upper},
            {"xi_worst_lower", rep.xi_worst_lower},
            {"xi_range", {rep.xi_min, rep.xi_max}},
            {"n_points", rep.n_points},
            {"mode", rep.mode},
            {"certifying", rep.certifying},
            {"pass", rep.pass}};
  s.emit(r);
  return rep.pass ? 0 : 1;
}

int cmd_profile(Session& s) {
  const SystemModel model = build_model(s.cfg);
  const DispersionResult d = analyze(model, s.cfg.kernels, s.cfg.c);
  const BoundPair pair = build_bounds(model, d);
  const auto kernels = expand_kernels(model, s.cfg.kernels);
  const Grid grid = default_grid(d, kernels, s.cfg.span.value_or(0.0), s.cfg.h.value_or(0.0));
  const WaveOperator op(model, kernels, d, grid);
  IterationOptions opt;
  if (s.cfg.tol) opt.tol = *s.cfg.tol;
  if (s.cfg.n_steps) opt.max_iter = *s.cfg.n_steps;
  auto [phi, rep] = op.iterate(op.from_bound(pair, false), pair, opt);

  auto f = s.csv("profile.csv");
  f << "xi";
  for (std::size_t i = 0; i < model.m; ++i) f << ",phi_" << i + 1;
  f << "\n";
  for (std::size_t k = 0; k < grid.n; ++k) {
    f << num(grid.x(k));
    for (std::size_t i = 0; i < model.m; ++i) f << "," << num(phi.values[i][k]);
    f << "\n";
  }
  json right = json::array();
  json left_ratio = json::array();
  for (std::size_t i = 0; i < model.m; ++i) {
    right.push_back(phi.values[i].back());
    left_ratio.push_back(phi.values[i].front() * std::exp(-d.species[i].lambda1 * grid.x0));
  }
  json r = dispersion_json(d);
  r["model"] = model.name;
  r["grid"] = {{"x0", grid.x0}, {"h", grid.h}, {"n", grid.n}};
  r["iterations"] = rep.iterations;
  r["residual_mu"] = rep.residual_mu;
  r["residual_sup"] = rep.residual_sup;
  r["max_clamp"] = rep.max_clamp;
  r["clamp_after_100"] = rep.clamp_after_100;
  r["converged"] = rep.converged;
  r["right_value"] = right;
  r["left_tail_ratio"] = left_ratio;
  r["csv"] = s.file("profile.csv").string();
  s.emit(r);
  return rep.converged ? 0 : 1;
}

std::optional<Rectangle> rectangle_for(const SystemModel& model, std::optional<double> eps, bool required) {
  if (model.name == "logistic") return logistic_rectangle(eps.value_or(0.1));
  if (model.competition) {
    if (!model.rectangle_ready && !required) return std::nullopt;
    return competition_rectangle(model, eps);
  }
  if (required) throw NumericalError("no contracting rectangle construction for model " + model.name);
  return std::nullopt;
}

int cmd_rectangle(Session& s) {
  const SystemModel model = build_model(s.cfg);
  const Rectangle rect = *rectangle_for(model, s.cfg.eps, true);
  const std::size_t n_s = 99;
  const RectangleReport rep = verify_rectangle(model, rect, n_s, 1000, s.cfg.seed);
  json r = {{"model", model.name},
            {"rectangle", rect.name},
            {"eps", rect.eps},
            {"E", rect.E},
            {"R0", rect.r(0.0)},
            {"T0", rect.t(0.0)},
            {"continuity", rep.continuity},
            {"monotone", rep.monotone},
            {"endpoints", rep.endpoints},
            {"enlarged_box", rep.enlarged_box},
            {"contraction", rep.contraction},
            {"certifying", rep.certifying},
            {"min_margin", rep.min_margin},
            {"n_s", n_s},
            {"n_checked", rep.n_checked},
            {"message", rep.message},
            {"pass", rep.pass}};
  if (!rep.pass && !rep.witness_state.empty()) {
    r["witness_s"] = rep.witness_s;
    r["witness_state"] = rep.witness_state;
  }
  s.emit(r);
  return rep.pass ? 0 : 1;
}

int cmd_converge(Session& s) {
  const SystemModel model = build_model(s.cfg);
  std::vector<double> history;
  if (s.cfg.init_history) {
    history = *s.cfg.init_history;
    if (history.size() == model.m) {
      history = model.constant_state(history);
    }
    if (history.size() != model.slots()) {
      throw InputError("init.history needs m or m * tau = " + std::to_string(model.slots()) + " values");
    }
  } else {
    std::vector<double> u(model.m);
    for (std::size_t i = 0; i < model.m; ++i) u[i] = 0.9 * model.steady[i];
    history = model.constant_state(u);
  }
  const double tol = s.cfg.tol.value_or(1e-8);
  const std::size_t n_steps = s.cfg.n_steps.value_or(10000);
  std::optional<Rectangle> rect;
  try {
    rect = rectangle_for(model, s.cfg.eps, false);
  } catch (const NumericalError&) {
    rect.reset();
  }
  const Trajectory tr = iterate_difference(model, history, n_steps, rect ? &*rect : nullptr);
  const auto hit = tr.steps_to(tol);
  json r = {{"model", model.name},
            {"E", model.steady},
            {"initial_history", history},
            {"n_steps", n_steps},
            {"tol", tol},
            {"final_state", tr.states.back()},
            {"final_distance", tr.final_distance},
            {"steps_to_tol", hit ? json(*hit) : json(nullptr)},
            {"rectangle", rect ? json(rect->name) : json(nullptr)},
            {"start_level", tr.start_level ? json(*tr.start_level) : json(nullptr)},
            {"certified", tr.certified},
            {"converged", tr.final_distance <= tol}};
  s.emit(r);
  return tr.final_distance <= tol ? 0 : 1;
}

int cmd_simulate(Session& s) {
  const SystemModel model = build_model(s.cfg);
  const auto kernels = expand_kernels(model, s.cfg.kernels);
  const double cmin = system_minimal_speed(model, kernels);
  const std::size_t n_steps = s.cfg.n_steps.value_or(200);
  double radius = 0.0;
  for (const auto& k : kernels) radius = std::max(radius, discretize(k, 0.05).radius);
  Grid grid = sim_grid(cmin, n_steps, radius, s.cfg.init_halfwidth, s.cfg.cells.value_or(std::size_t{1} << 14));
  if (s.cfg.h) {
    const double length = grid.h * static_cast<double>(grid.n);
    grid.h = *s.cfg.h;
    grid.n = static_cast<std::size_t>(std::ceil(length / grid.h));
    grid.x0 = -0.5 * static_cast<double>(grid.n) * grid.h;
  }
  const Simulator sim(model, kernels, grid, s.cfg.boundary);
  std::vector<double> value = s.cfg.init_value.value_or(model.steady);
  if (value.size() == 1 && model.m > 1) value.assign(model.m, value[0]);
  const SimState start = sim.indicator(value, s.cfg.init_halfwidth);
  std::vector<double> levels;
  if (s.cfg.level) {
    levels = *s.cfg.level;
    if (levels.size() == 1 && model.m > 1) levels.assign(model.m, levels[0]);
  }
  const RunResult res = sim.run(start, n_steps, levels);

  auto fcsv = s.csv("front.csv");
  fcsv << "n";
  for (std::size_t i = 0; i < model.m; ++i) fcsv << ",x_front_" << i + 1;
  fcsv << "\n";
  std::set<std::size_t> steps;
  for (const auto& f : res.fronts) {
    for (const auto& [n, x] : f.positions) steps.insert(n);
  }
  std::vector<std::size_t> cursor(model.m, 0);
  for (std::size_t n : steps) {
    fcsv << n;
    for (std::size_t i = 0; i < model.m; ++i) {
      fcsv << ",";
      const auto& pos = res.fronts[i].positions;
      if (cursor[i] < pos.size() && pos[cursor[i]].first == n) fcsv << num(pos[cursor[i]++].second);
    }
    fcsv << "\n";
  }
  auto scsv = s.csv("final.csv");
  scsv << "x";
  for (std::size_t i = 0; i < model.m; ++i) scsv << ",u_" << i + 1;
  scsv << "\n";
  for (std::size_t k = 0; k < grid.n; ++k) {
    scsv << num(grid.x(k));
    for (std::size_t i = 0; i < model.m; ++i) scsv << "," << num(res.state.newest(i)[k]);
    scsv << "\n";
  }

  const Plateau plateau = behind_front_state(res.state, res.fronts[0]);
  json speeds = json::array(), ratio = json::array(), residual = json::array(), level = json::array();
  for (const auto& f : res.fronts) {
    speeds.push_back(f.fitted_speed);
    ratio.push_back(f.fitted_speed / cmin);
    residual.push_back(f.fit_residual);
    level.push_back(f.level);
  }
  json r = {{"model", model.name},
            {"cmin", cmin},
            {"fitted_speed", speeds},
            {"ratio", ratio},
            {"fit_residual", residual},
            {"level", level},
            {"n_steps", n_steps},
            {"grid", {{"x0", grid.x0}, {"h", grid.h}, {"n", grid.n}}},
            {"behind_front",
             {{"mean", plateau.mean}, {"min", plateau.min}, {"max", plateau.max}, {"x_lo", plateau.x_lo},
              {"x_hi", plateau.x_hi}}},
            {"box_excess", res.box_excess},
            {"front_csv", s.file("front.csv").string()},
            {"final_csv", s.file("final.csv").string()}};
  s.emit(r);
  return 0;
}

void check_positive(const std::optional<double>& v, const char* flag) {
  if (v && !(*v > 0.0)) throw InputError(std::string(flag) + " must be positive");
}

}  // namespace

std::string to_json_text(const json& value) {
  std::string out;
  write_value(value, out, 0);
  return out;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traveling waves and spreading speeds of delayed integro-difference systems", "idewave"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Overrides ov;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"speed", "minimal wave speed and characteristic roots"},
      {"roots", "characteristic roots, eta, q and mu at speed c"},
      {"bounds", "build and verify the upper/lower solution pair"},
      {"profile", "wave profile by clamped fixed-point iteration (writes profile.csv)"},
      {"rectangle", "verify the contracting rectangle"},
      {"converge", "iterate the non-spatial recurrence toward E"},
      {"simulate", "spatial simulation with front tracking (writes front.csv, final.csv)"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", ov.config, "JSON config file")->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", ov.seed, "seed for sampling-based checks");
    sub->add_option("--c", ov.c, "wave speed");
    sub->add_option("--tol", ov.tol, "tolerance");
    sub->add_option("--span", ov.span, "profile grid span");
    sub->add_option("--h", ov.h, "grid spacing");
    sub->add_option("--eps", ov.eps, "rectangle parameter");
    sub->add_option("--n-steps", ov.n_steps, "iterations or generations");
    sub->add_option("--q", ov.q, "replace the lower-solution coefficient");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    check_positive(ov.c, "--c");
    check_positive(ov.tol, "--tol");
    check_positive(ov.span, "--span");
    check_positive(ov.h, "--h");
    check_positive(ov.eps, "--eps");
    check_positive(ov.q, "--q");
    if (ov.n_steps && *ov.n_steps == 0) throw InputError("--n-steps must be at least 1");
    RunConfig cfg = load_config(ov.config);
    bool write_files = cfg.out != std::filesystem::path(".");
    if (!ov.out.empty()) {
      cfg.out = ov.out;
      write_files = true;
    }
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.c) cfg.c = ov.c;
    if (ov.tol) cfg.tol = ov.tol;
    if (ov.span) cfg.span = ov.span;
    if (ov.h) cfg.h = ov.h;
    if (ov.eps) cfg.eps = ov.eps;
    if (ov.q) cfg.q = ov.q;
    if (ov.n_steps) cfg.n_steps = ov.n_steps;

    Session s{command, std::move(cfg), write_files, out};
    try {
      if (command == "speed" || command == "roots") return cmd_speed(s);
      if (command == "bounds") return cmd_bounds(s);
      if (command == "profile") return cmd_profile(s);
      if (command == "rectangle") return cmd_rectangle(s);
      if (command == "converge") return cmd_converge(s);
      if (command == "simulate") return cmd_simulate(s);
    } catch (const NumericalError& e) {
      err << "error: " << e.what() << "\n";
      s.emit({{"error", e.what()}, {"pass", false}});
      return 1;
    }
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace idewave::cli
