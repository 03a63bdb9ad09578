// Copyright 2026 The oppdrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPPDRIVE__ENV_CONFIG_HPP_
#define OPPDRIVE__ENV_CONFIG_HPP_

#include "oppdrive/config_file.hpp"
#include "oppdrive/errors.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oppdrive
{

/// Highway configuration. Defaults follow the training setup
/// (lane-4-density-2, 60 policy steps).
struct EnvConfig
{
  int lane_count = 4;
  double vehicles_density = 2.0;
  int duration = 60;
  double ego_spacing = 4.0;
  int observed_vehicles = 33;
  std::vector<double> target_speeds{20.0, 25.0, 30.0, 35.0, 40.0};
  double policy_frequency = 1.0;
  double sim_frequency = 15.0;
  double lane_width = 4.0;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  int spawn_count = 50;
  std::uint64_t seed = 0;

  bool operator==(const EnvConfig &) const = default;

  int substeps() const
  {
    return static_cast<int>(std::lround(sim_frequency / policy_frequency));
  }

  double dt() const { return 1.0 / sim_frequency; }

  void validate() const
  {
    auto fail = [](const std::string & msg) { throw ConfigError("invalid env config: " + msg); };
    if (lane_count < 2) fail("lane_count must be >= 2");
    if (!(vehicles_density > 0.0)) fail("vehicles_density must be > 0");
    if (duration < 1) fail("duration must be >= 1");
    if (observed_vehicles < 1) fail("observed_vehicles must be >= 1");
    if (!(ego_spacing > 0.0)) fail("ego_spacing must be > 0");
    if (spawn_count < 0) fail("spawn_count must be >= 0");
    if (target_speeds.empty()) fail("target_speeds must not be empty");
    for (std::size_t i = 0; i < target_speeds.size(); ++i) {
      if (!(target_speeds[i] >= 0.0)) fail("target_speeds must be non-negative");
      if (i > 0 && !(target_speeds[i] > target_speeds[i - 1])) {
        fail("target_speeds must be strictly increasing");
      }
    }
    if (!(policy_frequency > 0.0) || !(sim_frequency > 0.0)) fail("frequencies must be > 0");
    const double ratio = sim_frequency / policy_frequency;
    if (ratio < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-9) {
      fail("sim_frequency must be an integer multiple of policy_frequency");
    }
    if (!(lane_width > 0.0) || !(vehicle_length > 0.0) || !(vehicle_width > 0.0)) {
      fail("lane_width, vehicle_length and vehicle_width must be > 0");
    }
    if (vehicle_width >= lane_width) fail("vehicle_width must be smaller than lane_width");
  }
};

/// Evaluation variant: same traffic, 30 policy steps.
inline EnvConfig testing_config(int lane_count, double vehicles_density)
{
  EnvConfig cfg;
  cfg.lane_count = lane_count;
  cfg.vehicles_density = vehicles_density;
  cfg.duration = 30;
  return cfg;
}

/// Set one field by its file name. Unknown keys are a ConfigError.
inline void set_env_field(EnvConfig & cfg, const std::string & key, const std::string & value)
{
  if (key == "lane_count") {
    cfg.lane_count = static_cast<int>(parse_integer(key, value));
  } else if (key == "vehicles_density") {
    cfg.vehicles_density = parse_real(key, value);
  } else if (key == "duration") {
    cfg.duration = static_cast<int>(parse_integer(key, value));
  } else if (key == "ego_spacing") {
    cfg.ego_spacing = parse_real(key, value);
  } else if (key == "observed_vehicles" || key == "vehicles_count") {
    cfg.observed_vehicles = static_cast<int>(parse_integer(key, value));
  } else if (key == "target_speeds") {
    cfg.target_speeds = parse_real_list(key, value);
  } else if (key == "policy_frequency") {
    cfg.policy_frequency = parse_real(key, value);
  } else if (key == "sim_frequency" || key == "simulation_frequency") {
    cfg.sim_frequency = parse_real(key, value);
  } else if (key == "lane_width") {
    cfg.lane_width = parse_real(key, value);
  } else if (key == "vehicle_length") {
    cfg.vehicle_length = parse_real(key, value);
  } else if (key == "vehicle_width") {
    cfg.vehicle_width = parse_real(key, value);
  } else if (key == "spawn_count") {
    cfg.spawn_count = static_cast<int>(parse_integer(key, value));
  } else if (key == "seed") {
    cfg.seed = parse_unsigned(key, value);
  } else {
    throw ConfigError("unknown env config key '" + key + "'");
  }
}

/// Apply every key of a flat tree (no nested sections allowed).
inline EnvConfig env_config_from_tree(const ConfigTree & tree, EnvConfig cfg = {})
{
  for (const auto & [key, node] : tree) {
    if (!node.empty()) {
      throw ConfigError("unexpected section '[" + key + "]' in env config");
    }
    set_env_field(cfg, key, node.data());
  }
  cfg.validate();
  return cfg;
}

inline EnvConfig parse_env_config(std::istream & in) { return env_config_from_tree(parse_config_text(in)); }

inline EnvConfig load_env_config(const std::string & path)
{
  return env_config_from_tree(load_config_file(path));
}

inline std::map<std::string, std::string> env_config_fields(const EnvConfig & cfg)
{
  return {
    {"lane_count", std::to_string(cfg.lane_count)},
    {"vehicles_density", format_real(cfg.vehicles_density)},
    {"duration", std::to_string(cfg.duration)},
    {"ego_spacing", format_real(cfg.ego_spacing)},
    {"observed_vehicles", std::to_string(cfg.observed_vehicles)},
    {"target_speeds", format_real_list(cfg.target_speeds)},
    {"policy_frequency", format_real(cfg.policy_frequency)},
    {"sim_frequency", format_real(cfg.sim_frequency)},
    {"lane_width", format_real(cfg.lane_width)},
    {"vehicle_length", format_real(cfg.vehicle_length)},
    {"vehicle_width", format_real(cfg.vehicle_width)},
    {"spawn_count", std::to_string(cfg.spawn_count)},
    {"seed", std::to_string(cfg.seed)},
  };
}

inline std::string format_env_config(const EnvConfig & cfg)
{
  std::ostringstream out;
  for (const auto & [key, value] : env_config_fields(cfg)) {
    out << key << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace oppdrive

#endif  // OPPDRIVE__ENV_CONFIG_HPP_
