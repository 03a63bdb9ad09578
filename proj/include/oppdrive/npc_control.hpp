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

#ifndef OPPDRIVE__NPC_CONTROL_HPP_
#define OPPDRIVE__NPC_CONTROL_HPP_

#include "oppdrive/env_config.hpp"
#include "oppdrive/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

namespace oppdrive
{

/// Intelligent Driver Model + MOBIL parameters for npc traffic.
struct NpcParams
{
  double max_acceleration = 3.0;      // a_max
  double comfort_deceleration = 5.0;  // b
  double max_braking = 6.0;           // b_max, also the emergency value
  double time_headway = 1.5;          // T
  double min_gap = 10.0;              // s0
  double delta = 4.0;
  double politeness = 0.0;
  double lane_change_threshold = 0.2;
  double safe_braking = 2.0;  // deceleration MOBIL may impose on the new follower

  bool operator==(const NpcParams &) const = default;
};

struct Leader
{
  double gap;    // bumper-to-bumper [m]
  double speed;  // [m/s]
};

/// IDM acceleration, clipped to [-max_braking, max_acceleration].
inline double idm_acceleration(
  double speed, double desired_speed, std::optional<Leader> leader, const NpcParams & p)
{
  const double v0 = std::max(desired_speed, 1e-3);
  double a = p.max_acceleration * (1.0 - std::pow(std::max(speed, 0.0) / v0, p.delta));
  if (leader) {
    if (leader->gap <= 0.0) {
      return -p.max_braking;
    }
    const double approach = speed - leader->speed;
    const double dynamic =
      speed * p.time_headway +
      speed * approach / (2.0 * std::sqrt(p.max_acceleration * p.comfort_deceleration));
    const double desired_gap = p.min_gap + std::max(0.0, dynamic);
    const double ratio = desired_gap / leader->gap;
    a -= p.max_acceleration * ratio * ratio;
  }
  return std::clamp(a, -p.max_braking, p.max_acceleration);
}

struct LaneNeighbors
{
  const VehicleState * leader = nullptr;
  const VehicleState * follower = nullptr;
};

inline bool occupies_lane(const VehicleState & v, int lane)
{
  return v.lane_index == lane || v.target_lane == lane;
}

/// Closest vehicles ahead of / behind `self` on `lane`, ignoring `self`.
inline LaneNeighbors find_neighbors(
  const VehicleState & self, std::span<const VehicleState> others, int lane)
{
  LaneNeighbors out;
  double best_ahead = std::numeric_limits<double>::infinity();
  double best_behind = std::numeric_limits<double>::infinity();
  for (const auto & v : others) {
    if (v.id == self.id || !occupies_lane(v, lane)) {
      continue;
    }
    const double dx = v.x - self.x;
    if (dx >= 0.0) {
      if (dx < best_ahead) {
        best_ahead = dx;
        out.leader = &v;
      }
    } else if (-dx < best_behind) {
      best_behind = -dx;
      out.follower = &v;
    }
  }
  return out;
}

inline std::optional<Leader> leader_of(
  const VehicleState & follower, const VehicleState * leader, double vehicle_length)
{
  if (leader == nullptr) {
    return std::nullopt;
  }
  return Leader{leader->x - follower.x - vehicle_length, leader->speed};
}

struct NpcCommand
{
  double acceleration = 0.0;
  std::optional<int> lane_change;  // -1 = left (lower index), +1 = right
};

/// Longitudinal IDM command plus an optional MOBIL lane change. Lane
/// changes are only considered when `consider_lane_change` is set and the
/// vehicle is not already moving between lanes.
inline NpcCommand npc_control(
  const VehicleState & vehicle, std::span<const VehicleState> neighbors, const NpcParams & p,
  const EnvConfig & env, bool consider_lane_change = true)
{
  NpcCommand cmd;
  if (vehicle.crashed) {
    cmd.acceleration = vehicle.speed > 0.0 ? -p.max_braking : 0.0;
    return cmd;
  }
  const double length = env.vehicle_length;
  const auto own = find_neighbors(vehicle, neighbors, vehicle.target_lane);
  const double current_acc = idm_acceleration(
    vehicle.speed, vehicle.target_speed, leader_of(vehicle, own.leader, length), p);
  cmd.acceleration = current_acc;

  if (!consider_lane_change || vehicle.lane_index != vehicle.target_lane) {
    return cmd;
  }

  double best_gain = p.lane_change_threshold;
  for (int direction : {-1, 1}) {
    const int lane = vehicle.lane_index + direction;
    if (lane < 0 || lane >= env.lane_count) {
      continue;
    }
    const auto next = find_neighbors(vehicle, neighbors, lane);
    if (next.leader && next.leader->x - vehicle.x - length <= 0.0) {
      continue;
    }
    if (next.follower && vehicle.x - next.follower->x - length <= 0.0) {
      continue;
    }
    const double self_after = idm_acceleration(
      vehicle.speed, vehicle.target_speed, leader_of(vehicle, next.leader, length), p);
    if (self_after < -p.safe_braking) {
      continue;
    }
    double follower_change = 0.0;
    if (next.follower) {
      const auto & nf = *next.follower;
      const double after = idm_acceleration(
        nf.speed, nf.target_speed, Leader{vehicle.x - nf.x - length, vehicle.speed}, p);
      if (after < -p.safe_braking) {
        continue;
      }
      const double before =
        idm_acceleration(nf.speed, nf.target_speed, leader_of(nf, next.leader, length), p);
      follower_change += after - before;
    }
    if (own.follower) {
      const auto & of = *own.follower;
      const double before = idm_acceleration(
        of.speed, of.target_speed, Leader{vehicle.x - of.x - length, vehicle.speed}, p);
      const double after =
        idm_acceleration(of.speed, of.target_speed, leader_of(of, own.leader, length), p);
      follower_change += after - before;
    }
    const double gain = self_after - current_acc + p.politeness * follower_change;
    if (gain > best_gain) {
      best_gain = gain;
      cmd.lane_change = direction;
    }
  }
  return cmd;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__NPC_CONTROL_HPP_
