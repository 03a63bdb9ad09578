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

#ifndef OPPDRIVE__COLLISION_HPP_
#define OPPDRIVE__COLLISION_HPP_

#include "oppdrive/vehicle.hpp"

#include <array>
#include <cmath>

namespace oppdrive
{

struct Vec2
{
  double x;
  double y;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Oriented rectangle: center, unit heading axis, half extents.
struct OrientedBox
{
  Vec2 center;
  Vec2 axis_long;
  Vec2 axis_lat;
  double half_length;
  double half_width;

  std::array<Vec2, 4> corners() const
  {
    std::array<Vec2, 4> out{};
    const double sl[4] = {1, 1, -1, -1};
    const double sw[4] = {1, -1, -1, 1};
    for (int i = 0; i < 4; ++i) {
      out[i] = {center.x + sl[i] * half_length * axis_long.x + sw[i] * half_width * axis_lat.x,
                center.y + sl[i] * half_length * axis_long.y + sw[i] * half_width * axis_lat.y};
    }
    return out;
  }

  bool contains(Vec2 p) const
  {
    const Vec2 d{p.x - center.x, p.y - center.y};
    return std::abs(dot(d, axis_long)) <= half_length && std::abs(dot(d, axis_lat)) <= half_width;
  }
};

inline OrientedBox vehicle_box(const VehicleState & v, double length, double width)
{
  const double c = std::cos(v.heading);
  const double s = std::sin(v.heading);
  return {{v.x, v.y}, {c, s}, {-s, c}, 0.5 * length, 0.5 * width};
}

/// Separating-axis test on the four edge normals. Touching counts as intersecting.
inline bool boxes_intersect(const OrientedBox & a, const OrientedBox & b)
{
  const Vec2 d{b.center.x - a.center.x, b.center.y - a.center.y};
  const std::array<Vec2, 4> axes{a.axis_long, a.axis_lat, b.axis_long, b.axis_lat};
  for (const auto & axis : axes) {
    const double ra = a.half_length * std::abs(dot(a.axis_long, axis)) +
                      a.half_width * std::abs(dot(a.axis_lat, axis));
    const double rb = b.half_length * std::abs(dot(b.axis_long, axis)) +
                      b.half_width * std::abs(dot(b.axis_lat, axis));
    if (std::abs(dot(d, axis)) > ra + rb) {
      return false;
    }
  }
  return true;
}

inline bool check_collision(
  const VehicleState & a, const VehicleState & b, double length = 5.0, double width = 2.0)
{
  // Circumscribed circles cannot touch: skip the trig.
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double reach = length * length + width * width;
  if (dx * dx + dy * dy > reach) {
    return false;
  }
  return boxes_intersect(vehicle_box(a, length, width), vehicle_box(b, length, width));
}

}  // namespace oppdrive

#endif  // OPPDRIVE__COLLISION_HPP_
