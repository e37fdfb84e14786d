#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "idewave/error.hpp"

namespace idewave::cli {

using nlohmann::json;

namespace {

std::size_t line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class Context {
 public:
  Context(const std::string& text, std::filesystem::path path) : text_(text), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::ostringstream os;
    os << path_.string();
    const std::size_t pos = key.empty() ? std::string::npos : text_.find("\"" + key + "\"");
    if (pos != std::string::npos) os << ":" << line_at(text_, pos);
    os << ": " << what;
    throw InputError(os.str());
  }

  void only(const json& obj, const std::set<std::string>& allowed, const std::string& where) const {
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) fail(key, "unknown key \"" + key + "\" in " + where);
    }
  }

  double number(const json& obj, const std::string& key) const {
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(key, "\"" + key + "\" must be a number");
    return v.get<double>();
  }

  double positive(const json& obj, const std::string& key) const {
    const double v = number(obj, key);
    if (!(v > 0.0)) fail(key, "\"" + key + "\" must be positive");
    return v;
  }

  std::size_t count(const json& obj, const std::string& key, std::size_t min) const {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
      fail(key, "\"" + key + "\" must be an integer >= " + std::to_string(min));
    }
    return v.get<std::size_t>();
  }

  std::vector<double> numbers(const json& obj, const std::string& key) const {
    const auto& v = obj.at(key);
    if (!v.is_array()) fail(key, "\"" + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "\"" + key + "\" must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  const std::string& text_;
  std::filesystem::path path_;
};

Kernel parse_kernel(const Context& ctx, const json& spec) {
  if (!spec.is_object() || !spec.contains("family") || !spec["family"].is_string()) {
    ctx.fail("kernel", "kernel must be an object with a string \"family\"");
  }
  const std::string family = spec["family"].get<std::string>();
  try {
    if (family == "table") {
      ctx.only(spec, {"family", "csv", "samples", "spacing"}, "table kernel");
      if (spec.contains("csv")) {
        if (!spec["csv"].is_string()) ctx.fail("csv", "\"csv\" must be a path");
        std::filesystem::path p = spec["csv"].get<std::string>();
        if (p.is_relative()) p = ctx.path().parent_path() / p;
        return Kernel::from_csv(p);
      }
      if (!spec.contains("samples") || !spec.contains("spacing")) {
        ctx.fail("family", "table kernel needs \"csv\" or \"samples\" and \"spacing\"");
      }
      return Kernel::table(ctx.numbers(spec, "samples"), ctx.positive(spec, "spacing"));
    }
    if (family == "gaussian" || family == "normal") ctx.only(spec, {"family", "sigma"}, family + " kernel");
    if (family == "uniform" || family == "triangular") ctx.only(spec, {"family", "halfwidth"}, family + " kernel");
    std::map<std::string, double> params;
    for (const auto& [key, value] : spec.items()) {
      if (key == "family") continue;
      params[key] = ctx.number(spec, key);
    }
    return Kernel::make(family, params);
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(ctx.path().string(), 0) == 0) throw;
    ctx.fail("family", msg);
  }
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& path) {
  const Context ctx(text, path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << path.string() << ":" << line_at(text, e.byte == 0 ? 0 : e.byte - 1) << ": malformed JSON: " << e.what();
    throw InputError(os.str());
  }
  if (!doc.is_object()) ctx.fail("", "config must be a JSON object");
  ctx.only(doc, {"model", "params", "kernel", "kernels", "c", "h", "span", "tol", "eps", "q", "n_steps", "cells",
                 "seed", "init", "level", "boundary", "out"},
           "config");

  RunConfig cfg;
  cfg.path = path;
  if (!doc.contains("model") || !doc["model"].is_string()) ctx.fail("model", "\"model\" must name a model");
  cfg.model_name = doc["model"].get<std::string>();
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) ctx.fail("params", "\"params\" must be an object");
    cfg.params = doc["params"];
  }

  if (doc.contains("kernel") == doc.contains("kernels")) ctx.fail("kernel", "give exactly one of \"kernel\" or \"kernels\"");
  if (doc.contains("kernel")) {
    cfg.kernels.push_back(parse_kernel(ctx, doc["kernel"]));
  } else {
    if (!doc["kernels"].is_array() || doc["kernels"].empty()) ctx.fail("kernels", "\"kernels\" must be a nonempty array");
    for (const auto& k : doc["kernels"]) cfg.kernels.push_back(parse_kernel(ctx, k));
  }

  if (doc.contains("c")) cfg.c = ctx.positive(doc, "c");
  if (doc.contains("h")) cfg.h = ctx.positive(doc, "h");
  if (doc.contains("span")) cfg.span = ctx.positive(doc, "span");
  if (doc.contains("tol")) {
    cfg.tol = ctx.positive(doc, "tol");
    if (*cfg.tol >= 1.0) ctx.fail("tol", "\"tol\" must lie in (0, 1)");
  }
  if (doc.contains("eps")) cfg.eps = ctx.positive(doc, "eps");
  if (doc.contains("q")) cfg.q = ctx.positive(doc, "q");
  if (doc.contains("n_steps")) cfg.n_steps = ctx.count(doc, "n_steps", 1);
  if (doc.contains("cells")) cfg.cells = ctx.count(doc, "cells", 16);
  if (doc.contains("seed")) cfg.seed = ctx.count(doc, "seed", 0);
  if (doc.contains("level")) cfg.level = ctx.numbers(doc, "level");
  if (doc.contains("boundary")) {
    const auto& b = doc["boundary"];
    if (b == "zero_pad") cfg.boundary = Boundary::zero_pad;
    else if (b == "periodic") cfg.boundary = Boundary::periodic;
    else ctx.fail("boundary", "\"boundary\" must be \"zero_pad\" or \"periodic\"");
  }
  if (doc.contains("init")) {
    const auto& init = doc["init"];
    if (!init.is_object()) ctx.fail("init", "\"init\" must be an object");
    ctx.only(init, {"history", "value", "halfwidth"}, "init");
    if (init.contains("history")) cfg.init_history = ctx.numbers(init, "history");
    if (init.contains("value")) cfg.init_value = ctx.numbers(init, "value");
    if (init.contains("halfwidth")) cfg.init_halfwidth = ctx.positive(init, "halfwidth");
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) ctx.fail("out", "\"out\" must be a path");
    cfg.out = doc["out"].get<std::string>();
    if (cfg.out.is_relative()) cfg.out = path.parent_path() / cfg.out;
  }

  // Validate the model parameters now so errors point into the file.
  const json& p = cfg.params;
  const auto need = [&](const std::set<std::string>& keys) {
    ctx.only(p, keys, "params of model \"" + cfg.model_name + "\"");
    for (const auto& k : keys) {
      if (!p.contains(k)) ctx.fail("params", "model \"" + cfg.model_name + "\" needs parameter \"" + k + "\"");
    }
  };
  if (cfg.model_name == "logistic") need({});
  else if (cfg.model_name == "kot") need({"d"});
  else if (cfg.model_name == "delayed_bh") need({"d", "a"});
  else if (cfg.model_name == "competition2") need({"d1", "d2", "a1", "a2", "b1", "b2"});
  else if (cfg.model_name == "mspecies") need({"m", "tau", "d", "e", "f"});
  else ctx.fail("model", "unknown model \"" + cfg.model_name + "\"");
  if (cfg.model_name == "mspecies") {
    ctx.count(p, "m", 1);
    ctx.count(p, "tau", 1);
    ctx.numbers(p, "d");
  } else {
    for (const auto& [key, value] : p.items()) ctx.number(p, key);
  }
  try {
    (void)build_model(cfg);
  } catch (const InputError& e) {
    ctx.fail("params", e.what());
  }
  return cfg;
}

SystemModel build_model(const RunConfig& cfg) {
  const json& p = cfg.params;
  const auto v = [&](const char* key) { return p.at(key).get<double>(); };
  if (cfg.model_name == "logistic") return logistic_model();
  if (cfg.model_name == "kot") return scalar_model(kot_birth(v("d")));
  if (cfg.model_name == "delayed_bh") return delayed_bh_model(v("d"), v("a"));
  if (cfg.model_name == "competition2") {
    return competition2_model(v("d1"), v("d2"), v("a1"), v("a2"), v("b1"), v("b2"));
  }
  if (cfg.model_name == "mspecies") {
    CompetitionCoefficients k;
    k.m = p.at("m").get<std::size_t>();
    k.tau = p.at("tau").get<std::size_t>();
    k.d = p.at("d").get<std::vector<double>>();
    if (k.d.size() != k.m) throw InputError("\"d\" needs m entries");
    // e[i][j-1] for j = 1 .. tau-1, f[i][l][j-1] for j = 1 .. tau
    k.e.assign(k.m * (k.tau - 1), 0.0);
    k.f.assign(k.m * k.m * k.tau, 0.0);
    const json& e = p.at("e");
    const json& f = p.at("f");
    try {
      if (!e.is_array() || e.size() != k.m) throw InputError("\"e\" must be an m x (tau - 1) array");
      for (std::size_t i = 0; i < k.m; ++i) {
        if (e[i].size() != k.tau - 1) throw InputError("\"e\" must be an m x (tau - 1) array");
        for (std::size_t j = 1; j < k.tau; ++j) k.e_at(i, j) = e[i][j - 1].get<double>();
      }
      if (!f.is_array() || f.size() != k.m) throw InputError("\"f\" must be an m x m x tau array");
      for (std::size_t i = 0; i < k.m; ++i) {
        if (f[i].size() != k.m) throw InputError("\"f\" must be an m x m x tau array");
        for (std::size_t l = 0; l < k.m; ++l) {
          if (f[i][l].size() != k.tau) throw InputError("\"f\" must be an m x m x tau array");
          for (std::size_t j = 1; j <= k.tau; ++j) k.f_at(i, l, j) = f[i][l][j - 1].get<double>();
        }
      }
    } catch (const json::exception&) {
      throw InputError("\"e\" and \"f\" must hold numbers");
    }
    return mspecies_model(std::move(k));
  }
  throw InputError("unknown model \"" + cfg.model_name + "\"");
}

}  // namespace idewave::cli
