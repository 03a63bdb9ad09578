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

#ifndef OPPDRIVE__VEHICLE_HPP_
#define OPPDRIVE__VEHICLE_HPP_

#include "oppdrive/errors.hpp"

#include <array>
#include <string>
#include <string_view>

namespace oppdrive
{

struct VehicleState
{
  int id = 0;
  int lane_index = 0;
  double x = 0.0;  // longitudinal [m]
  double y = 0.0;  // lateral [m], lane k is centered at k * lane_width
  double speed = 0.0;
  double heading = 0.0;
  double target_speed = 0.0;  // ego: selected set-point; npc: IDM desired speed
  int target_lane = 0;
  bool crashed = false;
  bool is_ego = false;

  bool operator==(const VehicleState &) const = default;
};

enum class MetaAction : int { LaneLeft = 0, Idle = 1, LaneRight = 2, Faster = 3, Slower = 4 };

inline constexpr int kActionCount = 5;

inline constexpr std::array<MetaAction, kActionCount> kAllActions{
  MetaAction::LaneLeft, MetaAction::Idle, MetaAction::LaneRight, MetaAction::Faster,
  MetaAction::Slower};

inline MetaAction action_from_index(int index)
{
  if (index < 0 || index >= kActionCount) {
    throw InputError("meta-action index out of range: " + std::to_string(index));
  }
  return static_cast<MetaAction>(index);
}

inline constexpr int action_index(MetaAction a) { return static_cast<int>(a); }

inline std::string_view to_string(MetaAction a)
{
  switch (a) {
    case MetaAction::LaneLeft:
      return "LANE_LEFT";
    case MetaAction::Idle:
      return "IDLE";
    case MetaAction::LaneRight:
      return "LANE_RIGHT";
    case MetaAction::Faster:
      return "FASTER";
    case MetaAction::Slower:
      return "SLOWER";
  }
  return "?";
}

inline MetaAction action_from_string(std::string_view name)
{
  for (auto a : kAllActions) {
    if (to_string(a) == name) {
      return a;
    }
  }
  throw InputError("unknown meta-action '" + std::string(name) + "'");
}

}  // namespace oppdrive

#endif  // OPPDRIVE__VEHICLE_HPP_
