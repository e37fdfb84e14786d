#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idewave/kernels.hpp"
#include "idewave/models.hpp"
#include "idewave/spatial_sim.hpp"

namespace idewave::cli {

/// Parsed run configuration. Relative paths (table kernels, out) resolve
/// against the directory of the config file.
struct RunConfig {
  std::filesystem::path path;
  std::string model_name;
  nlohmann::json params = nlohmann::json::object();
  std::vector<Kernel> kernels;

  std::optional<double> c;
  std::optional<double> h;
  std::optional<double> span;
  std::optional<double> tol;
  std::optional<double> eps;
  std::optional<double> q;
  std::optional<std::size_t> n_steps;
  std::optional<std::size_t> cells;
  std::uint64_t seed = 1;

  std::optional<std::vector<double>> init_history;  // flat m x tau block, oldest first per species
  std::optional<std::vector<double>> init_value;    // simulate: height of the initial indicator
  double init_halfwidth = 5.0;
  std::optional<std::vector<double>> level;
  Boundary boundary = Boundary::zero_pad;
  std::filesystem::path out = ".";
};

/// Reads and validates a JSON config. Every error is an InputError whose
/// message carries the file name and, when it can be located, the line.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& path);

SystemModel build_model(const RunConfig& config);

}  // namespace idewave::cli
