#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracle/solver.hpp"
#include "fracle/stability.hpp"

namespace fracle {

/// Invalid or unknown configuration entry. The message names the field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& problem)
      : std::runtime_error(field + ": " + problem), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct GeometrySpec {
  int dim = 1;
  std::vector<double> lengths{20.0};
  std::vector<std::size_t> counts{41};

  Grid make_grid() const;
  friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
};

struct TimeSpec {
  double t_end = 10.0;
  double dt = 1e-3;
  std::optional<std::size_t> memory_window;
  friend bool operator==(const TimeSpec&, const TimeSpec&) = default;
};

struct OutputSpec {
  std::string dir;
  std::size_t snapshot_every = 1000;
  std::vector<std::vector<double>> probes;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Everything a run or an analysis reads from a configuration file.
struct Config {
  SystemParams params;
  GeometrySpec geometry;
  std::optional<TimeSpec> time;
  IcSpec ic;
  OutputSpec output;
  std::size_t modes = kDefaultModeCount;

  friend bool operator==(const Config&, const Config&);
};

struct StabilityQuery {
  SystemParams params;
  Geometry geometry;
  std::size_t modes = kDefaultModeCount;
};

/// Strict parse: unknown keys and constraint violations raise ConfigError.
Config parse_config(const nlohmann::json& j);
Config parse_config_file(const std::filesystem::path& path);

nlohmann::json to_json(const Config& c);

/// Requires the time section.
SimConfig to_sim_config(const Config& c);
StabilityQuery to_stability_query(const Config& c);

}  // namespace fracle
