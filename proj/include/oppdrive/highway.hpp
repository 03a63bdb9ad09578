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

#ifndef OPPDRIVE__HIGHWAY_HPP_
#define OPPDRIVE__HIGHWAY_HPP_

#include "oppdrive/collision.hpp"
#include "oppdrive/env_config.hpp"
#include "oppdrive/errors.hpp"
#include "oppdrive/npc_control.hpp"
#include "oppdrive/random.hpp"
#include "oppdrive/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

namespace oppdrive
{

/// Low-level realization of the ego meta-actions.
struct EgoControllerParams
{
  double speed_gain = 1.0 / 0.6;    // [1/s]
  double lateral_gain = 1.0 / 0.6;  // [1/s]
  double heading_gain = 1.0 / 0.2;  // [1/s]
  double max_acceleration = 6.0;
  double max_heading = std::numbers::pi / 4.0;

  bool operator==(const EgoControllerParams &) const = default;
};

struct WorldState
{
  std::vector<VehicleState> vehicles;  // ego first
  int step_index = 0;
  bool ended = false;
  Rng rng;
  EnvConfig config;
  NpcParams npc;
  EgoControllerParams ego_control;

  bool operator==(const WorldState &) const = default;

  const VehicleState & ego() const { return vehicles.front(); }
  VehicleState & ego() { return vehicles.front(); }

  double lane_center(int lane) const { return lane * config.lane_width; }

  int nearest_lane(double y) const
  {
    const int lane = static_cast<int>(std::lround(y / config.lane_width));
    return std::clamp(lane, 0, config.lane_count - 1);
  }
};

struct StepOutcome
{
  WorldState world;
  bool collided = false;
  double ego_speed = 0.0;
  double ego_x = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Flags produced by an in-place step.
struct StepFlags
{
  bool collided = false;
  bool terminated = false;
  bool truncated = false;
};

/// Called after every simulation substep (e.g. to record video frames).
using SubstepHook = std::function<void(const WorldState &)>;

namespace detail
{

inline bool overlaps_any(
  const std::vector<VehicleState> & placed, const VehicleState & candidate, double clearance)
{
  for (const auto & v : placed) {
    if (v.lane_index == candidate.lane_index && std::abs(v.x - candidate.x) < clearance) {
      return true;
    }
  }
  return false;
}

inline double wrap_angle(double a)
{
  return std::remainder(a, 2.0 * std::numbers::pi);
}

}  // namespace detail

/// Seeded episode start. Ego on a random lane at a random target speed,
/// npcs placed one after another ahead (4/5) and behind (1/5) with gaps
/// drawn around ego_spacing * vehicle_length / vehicles_density.
inline WorldState reset(const EnvConfig & config, std::uint64_t seed)
{
  config.validate();
  WorldState world;
  world.config = config;
  world.rng.seed(seed);
  auto & rng = world.rng;

  VehicleState ego;
  ego.id = 0;
  ego.is_ego = true;
  ego.lane_index = static_cast<int>(uniform_index(rng, config.lane_count));
  ego.target_lane = ego.lane_index;
  ego.y = world.lane_center(ego.lane_index);
  ego.target_speed = config.target_speeds[uniform_index(rng, config.target_speeds.size())];
  ego.speed = ego.target_speed;
  world.vehicles.push_back(ego);

  const double mean_gap = config.ego_spacing * config.vehicle_length / config.vehicles_density;
  const double clearance = 2.0 * config.vehicle_length;
  const double v_lo = config.target_speeds.front();
  const double v_hi = v_lo + 0.5 * (config.target_speeds.back() - v_lo);
  const int behind = config.spawn_count / 5;
  const int ahead = config.spawn_count - behind;

  auto place = [&](int count, double direction) {
    double cursor = 0.0;
    for (int i = 0; i < count; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
        VehicleState v;
        v.id = static_cast<int>(world.vehicles.size());
        v.lane_index = static_cast<int>(uniform_index(rng, config.lane_count));
        v.target_lane = v.lane_index;
        v.y = world.lane_center(v.lane_index);
        v.x = cursor + direction * mean_gap * uniform(rng, 0.5, 1.5);
        v.target_speed = uniform(rng, v_lo, v_hi);
        v.speed = v.target_speed;
        if (!detail::overlaps_any(world.vehicles, v, clearance)) {
          cursor = v.x;
          world.vehicles.push_back(v);
          placed = true;
        }
      }
      if (!placed) {
        throw SpawnError(
          "could not place vehicle " + std::to_string(world.vehicles.size()) +
          " without overlap after 100 attempts");
      }
    }
  };
  place(ahead, 1.0);
  place(behind, -1.0);

  // No npc starts faster than its same-lane leader.
  std::vector<std::size_t> order(world.vehicles.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return world.vehicles[a].x > world.vehicles[b].x;
  });
  std::vector<double> lane_speed(config.lane_count, std::numeric_limits<double>::infinity());
  for (auto idx : order) {
    auto & v = world.vehicles[idx];
    if (!v.is_ego) {
      v.speed = std::min(v.speed, lane_speed[v.lane_index]);
    }
    lane_speed[v.lane_index] = v.speed;
  }
  return world;
}

/// Apply a meta-action to the ego set-points. Saturates at the speed
/// range ends; lane changes at the road edge are no-ops.
inline void apply_meta_action(WorldState & world, MetaAction action)
{
  auto & ego = world.ego();
  const auto & speeds = world.config.target_speeds;
  auto nearest_speed_index = [&]() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < speeds.size(); ++i) {
      if (std::abs(speeds[i] - ego.target_speed) < std::abs(speeds[best] - ego.target_speed)) {
        best = i;
      }
    }
    return best;
  };
  switch (action) {
    case MetaAction::LaneLeft:
      ego.target_lane = std::max(0, ego.target_lane - 1);
      break;
    case MetaAction::LaneRight:
      ego.target_lane = std::min(world.config.lane_count - 1, ego.target_lane + 1);
      break;
    case MetaAction::Faster:
      ego.target_speed = speeds[std::min(nearest_speed_index() + 1, speeds.size() - 1)];
      break;
    case MetaAction::Slower: {
      const auto idx = nearest_speed_index();
      ego.target_speed = speeds[idx == 0 ? 0 : idx - 1];
      break;
    }
    case MetaAction::Idle:
      break;
  }
}

namespace detail
{

inline double steer_heading(
  const VehicleState & v, double lane_y, const EgoControllerParams & c, double dt)
{
  const double lateral_error = v.y - lane_y;
  if (lateral_error == 0.0 && v.heading == 0.0) {
    return 0.0;
  }
  const double lateral_speed = -c.lateral_gain * lateral_error;
  const double ratio = std::clamp(lateral_speed / std::max(v.speed, 1.0), -1.0, 1.0);
  const double heading_ref = std::clamp(std::asin(ratio), -c.max_heading, c.max_heading);
  return v.heading + c.heading_gain * wrap_angle(heading_ref - v.heading) * dt;
}

}  // namespace detail

/// Advance `world` by one policy step in place.
inline StepFlags advance(WorldState & world, MetaAction action, const SubstepHook & hook = {})
{
  if (world.ended) {
    throw LifecycleError("step() called on an episode that has already ended");
  }
  const auto & cfg = world.config;
  const double dt = cfg.dt();
  const int substeps = cfg.substeps();
  const double diag2 =
    cfg.vehicle_length * cfg.vehicle_length + cfg.vehicle_width * cfg.vehicle_width;

  apply_meta_action(world, action);

  auto & vehicles = world.vehicles;
  const std::size_t n = vehicles.size();
  std::vector<double> accel(n, 0.0);
  std::vector<std::size_t> order(n);
  StepFlags flags;

  for (int sub = 0; sub < substeps && !flags.collided; ++sub) {
    // Decisions before integration, in id order. A committed lane change is
    // visible to later vehicles, so two npcs cannot claim one gap.
    for (std::size_t i = 0; i < n; ++i) {
      auto & v = vehicles[i];
      if (v.is_ego) {
        accel[i] = std::clamp(
          world.ego_control.speed_gain * (v.target_speed - v.speed),
          -world.ego_control.max_acceleration, world.ego_control.max_acceleration);
        continue;
      }
      const auto cmd = npc_control(v, vehicles, world.npc, cfg, sub == 0);
      accel[i] = cmd.acceleration;
      if (cmd.lane_change) {
        v.target_lane = v.lane_index + *cmd.lane_change;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      auto & v = vehicles[i];
      const double heading = v.crashed ? v.heading :
        detail::steer_heading(v, world.lane_center(v.target_lane), world.ego_control, dt);
      v.x += v.speed * std::cos(v.heading) * dt;
      v.y += v.speed * std::sin(v.heading) * dt;
      v.heading = heading;
      v.speed = std::max(0.0, v.speed + accel[i] * dt);
      v.lane_index = world.nearest_lane(v.y);
    }

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      return vehicles[a].x < vehicles[b].x || (vehicles[a].x == vehicles[b].x && a < b);
    });
    for (std::size_t a = 0; a < n; ++a) {
      auto & va = vehicles[order[a]];
      for (std::size_t b = a + 1; b < n; ++b) {
        auto & vb = vehicles[order[b]];
        const double dx = vb.x - va.x;
        if (dx * dx > diag2) {
          break;
        }
        if (check_collision(va, vb, cfg.vehicle_length, cfg.vehicle_width)) {
          va.crashed = true;
          vb.crashed = true;
          if (va.is_ego || vb.is_ego) {
            flags.collided = true;
          }
        }
      }
    }
    if (hook) {
      hook(world);
    }
  }

  ++world.step_index;
  flags.terminated = flags.collided;
  flags.truncated = !flags.terminated && world.step_index >= cfg.duration;
  world.ended = flags.terminated || flags.truncated;
  return flags;
}

inline StepOutcome step(const WorldState & world, MetaAction action, const SubstepHook & hook = {})
{
  StepOutcome out{world};
  const auto flags = advance(out.world, action, hook);
  out.collided = flags.collided;
  out.terminated = flags.terminated;
  out.truncated = flags.truncated;
  out.ego_speed = out.world.ego().speed;
  out.ego_x = out.world.ego().x;
  return out;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__HIGHWAY_HPP_
