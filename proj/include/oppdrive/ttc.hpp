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

#ifndef OPPDRIVE__TTC_HPP_
#define OPPDRIVE__TTC_HPP_

#include "oppdrive/highway.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

namespace oppdrive
{

enum class LaneRelation { Same, Left, Right };

inline std::string_view to_string(LaneRelation r)
{
  switch (r) {
    case LaneRelation::Same:
      return "same";
    case LaneRelation::Left:
      return "left";
    case LaneRelation::Right:
      return "right";
  }
  return "?";
}

struct TtcEntry
{
  int vehicle_id = 0;
  LaneRelation relation = LaneRelation::Same;
  double ttc = std::numeric_limits<double>::infinity();  // [s]
  double gap = 0.0;                                       // bumper-to-bumper [m]
  double speed_diff = 0.0;                                // v_other - v_ego [m/s]
  bool ahead = true;
};

struct TtcReport
{
  std::vector<TtcEntry> entries;
};

inline constexpr double kMinGap = 0.1;
inline constexpr double kAttentionHorizon = 5.0;  // seconds of ego travel

/// Centre distance minus one vehicle length, floored at kMinGap.
inline double bumper_gap(double center_distance, double vehicle_length)
{
  return std::max(std::abs(center_distance) - vehicle_length, kMinGap);
}

/// Time to collision with every vehicle on the ego lane or an adjacent lane
/// within 5 * ego_speed metres. Front vehicles count when the ego closes in;
/// rear vehicles only on adjacent lanes, when they close in on the ego.
inline TtcReport compute_ttc(const WorldState & world)
{
  TtcReport report;
  const auto & ego = world.ego();
  const double radius = kAttentionHorizon * ego.speed;
  for (const auto & v : world.vehicles) {
    if (v.is_ego) {
      continue;
    }
    const int dl = v.lane_index - ego.lane_index;
    if (dl < -1 || dl > 1) {
      continue;
    }
    const double dx = v.x - ego.x;
    if (std::hypot(dx, v.y - ego.y) > radius) {
      continue;
    }
    TtcEntry e;
    e.vehicle_id = v.id;
    e.relation = dl == 0 ? LaneRelation::Same : (dl < 0 ? LaneRelation::Left : LaneRelation::Right);
    e.ahead = dx >= 0.0;
    e.gap = bumper_gap(dx, world.config.vehicle_length);
    e.speed_diff = v.speed - ego.speed;
    if (e.ahead && e.speed_diff < 0.0) {
      e.ttc = e.gap / -e.speed_diff;
    } else if (!e.ahead && e.relation != LaneRelation::Same && e.speed_diff > 0.0) {
      e.ttc = e.gap / e.speed_diff;
    }
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace oppdrive

#endif  // OPPDRIVE__TTC_HPP_
